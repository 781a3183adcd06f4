#pragma once

#include "gsmart/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace gsmart::fusion {

struct Projection {
    std::string view_name;
    std::uint64_t point_id = 0;
    double u = 0, v = 0;
    double depth = 0; // camera-frame z, always > 0
};

struct ProjectOptions {
    bool y_flip = false;
};

// Pinhole projection; nullopt for points behind the camera or outside the
// image bounds.
std::optional<Projection> project_point(const Vec3& world_point, const CameraIntrinsics& intr,
                                        const CameraPose& pose, const ProjectOptions& opts = {});

// inverse of project_point given (u, v, depth)
Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& intr,
               const CameraPose& pose, const ProjectOptions& opts = {});

struct AssignOptions {
    bool strict_visibility = false; // require the point's track to include the view
    bool y_flip = false;
};

// point_id -> local mask label for every point that projects into a labeled cell
std::map<std::uint64_t, std::uint16_t> assign_view_labels(const SceneModel& model,
                                                          const std::string& view_name,
                                                          const SegmentMask& mask,
                                                          const AssignOptions& opts = {});

struct ViewAssignment {
    std::string view_name;
    std::map<std::uint64_t, std::uint16_t> labels;
};

using ViewLabelKey = std::pair<std::string, std::uint16_t>; // (view, local label)

struct SegmentMap {
    std::set<std::uint32_t> global_ids;
    std::map<ViewLabelKey, std::uint32_t> per_view_links;
    std::map<std::uint64_t, std::uint32_t> point_labels; // first assignment wins
    std::map<std::uint32_t, std::set<ViewLabelKey>> merged_from;
};

// Links segments across views by normalized point-set overlap
// |a∩b| / min(|a|,|b|) >= threshold, transitively via union-find. Global ids
// are dense, ordered by first appearance in (view order, label ascending).
// Duplicate views (same name) are skipped.
SegmentMap build_global_map(const std::vector<ViewAssignment>& assignments,
                            double overlap_threshold);

} // namespace gsmart::fusion
