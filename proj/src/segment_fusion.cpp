#include "gsmart/segment_fusion.hpp"
#include "gsmart/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsmart::fusion {

namespace {

constexpr double kMinDepth = 1e-9;

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

} // namespace

std::optional<Projection> project_point(const Vec3& world_point, const CameraIntrinsics& intr,
                                        const CameraPose& pose, const ProjectOptions& opts) {
    Vec3 pc = pose.world_to_camera() * world_point + pose.translation;
    if (pc.z() <= kMinDepth) return std::nullopt;
    double u = intr.fx * (pc.x() / pc.z()) + intr.cx;
    double v = intr.fy * (pc.y() / pc.z()) + intr.cy;
    if (opts.y_flip) v = static_cast<double>(intr.height) - v;
    if (u < 0 || u >= static_cast<double>(intr.width) || v < 0 ||
        v >= static_cast<double>(intr.height))
        return std::nullopt;
    Projection pr;
    pr.view_name = pose.view_name;
    pr.u = u;
    pr.v = v;
    pr.depth = pc.z();
    return pr;
}

Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& intr,
               const CameraPose& pose, const ProjectOptions& opts) {
    if (opts.y_flip) v = static_cast<double>(intr.height) - v;
    Vec3 pc((u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth);
    return pose.world_to_camera().transpose() * (pc - pose.translation);
}

std::map<std::uint64_t, std::uint16_t> assign_view_labels(const SceneModel& model,
                                                          const std::string& view_name,
                                                          const SegmentMask& mask,
                                                          const AssignOptions& opts) {
    const CameraPose* pose = model.find_view(view_name);
    if (!pose) throw DataError("assign_view_labels: unknown view '" + view_name + "'");
    const CameraIntrinsics& intr = model.cameras.at(pose->camera_id);
    if (mask.width != intr.width || mask.height != intr.height)
        throw DataError("mask for view '" + view_name + "' is " + std::to_string(mask.width) + "x" +
                        std::to_string(mask.height) + " but camera expects " +
                        std::to_string(intr.width) + "x" + std::to_string(intr.height));

    ProjectOptions popts;
    popts.y_flip = opts.y_flip;
    std::map<std::uint64_t, std::uint16_t> labels;
    for (const auto& pt : model.points) {
        if (opts.strict_visibility) {
            bool observed = std::find(pt.track_image_ids.begin(), pt.track_image_ids.end(),
                                      pose->image_id) != pt.track_image_ids.end();
            if (!observed) continue;
        }
        auto pr = project_point(pt.position, intr, *pose, popts);
        if (!pr) continue;
        auto x = static_cast<std::uint32_t>(std::floor(pr->u));
        auto y = static_cast<std::uint32_t>(std::floor(pr->v));
        std::uint16_t label = mask.at(x, y);
        if (label != 0) labels[pt.point_id] = label;
    }
    return labels;
}

SegmentMap build_global_map(const std::vector<ViewAssignment>& assignments,
                            double overlap_threshold) {
    // canonical segment order: view processing order, then local label ascending
    struct Segment {
        std::string view;
        std::uint16_t label;
        std::vector<std::uint64_t> points; // sorted
    };
    std::vector<Segment> segments;
    std::vector<const ViewAssignment*> processed;
    for (const auto& va : assignments) {
        bool duplicate = false;
        for (const auto* p : processed)
            if (p->view_name == va.view_name) duplicate = true;
        if (duplicate) continue; // refusing the same view twice keeps fusion idempotent
        processed.push_back(&va);
        std::map<std::uint16_t, std::vector<std::uint64_t>> by_label;
        for (const auto& [pid, label] : va.labels) by_label[label].push_back(pid);
        for (auto& [label, pts] : by_label) {
            std::sort(pts.begin(), pts.end());
            segments.push_back({va.view_name, label, std::move(pts)});
        }
    }

    UnionFind uf(segments.size());
    for (std::size_t a = 0; a < segments.size(); ++a) {
        for (std::size_t b = a + 1; b < segments.size(); ++b) {
            if (segments[a].view == segments[b].view) continue;
            std::vector<std::uint64_t> inter;
            std::set_intersection(segments[a].points.begin(), segments[a].points.end(),
                                  segments[b].points.begin(), segments[b].points.end(),
                                  std::back_inserter(inter));
            double denom = static_cast<double>(
                std::min(segments[a].points.size(), segments[b].points.size()));
            if (denom > 0 && static_cast<double>(inter.size()) / denom >= overlap_threshold)
                uf.unite(a, b);
        }
    }

    SegmentMap map;
    std::map<std::size_t, std::uint32_t> root_to_global;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        std::size_t root = uf.find(s);
        auto it = root_to_global.find(root);
        if (it == root_to_global.end())
            it = root_to_global.emplace(root, static_cast<std::uint32_t>(root_to_global.size()))
                     .first;
        std::uint32_t gid = it->second;
        map.global_ids.insert(gid);
        ViewLabelKey key{segments[s].view, segments[s].label};
        map.per_view_links[key] = gid;
        map.merged_from[gid].insert(key);
        for (auto pid : segments[s].points)
            map.point_labels.emplace(pid, gid); // emplace keeps the first assignment
    }
    return map;
}

} // namespace gsmart::fusion
