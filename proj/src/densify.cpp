#include "gsmart/densify.hpp"
#include "gsmart/error.hpp"
#include "gsmart/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsmart::densify {

namespace {

constexpr double kSigmaFloor = 1e-12;

// inverse-distance-weighted blend of the 3 nearest source colors
Eigen::Matrix<std::uint8_t, 3, 1> interpolate_color(
    const Vec3& p, const std::vector<Vec3>& points,
    const std::vector<Eigen::Matrix<std::uint8_t, 3, 1>>& colors) {
    struct Near {
        double d;
        std::size_t i;
    };
    std::vector<Near> near;
    near.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) near.push_back({(points[i] - p).norm(), i});
    std::size_t k = std::min<std::size_t>(3, near.size());
    std::partial_sort(near.begin(), near.begin() + static_cast<long>(k), near.end(),
                      [](const Near& a, const Near& b) { return a.d < b.d; });

    // coincident source dominates
    if (near[0].d < 1e-15) return colors[near[0].i];

    double wsum = 0;
    Vec3 blend = Vec3::Zero();
    for (std::size_t j = 0; j < k; ++j) {
        double w = 1.0 / near[j].d;
        wsum += w;
        blend += w * colors[near[j].i].cast<double>();
    }
    blend /= wsum;
    Eigen::Matrix<std::uint8_t, 3, 1> out;
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<std::uint8_t>(std::clamp(std::round(blend[c]), 0.0, 255.0));
    return out;
}

} // namespace

std::uint64_t target_count(std::uint64_t area, double gamma, std::uint64_t n_min) {
    auto scaled = static_cast<std::uint64_t>(std::floor(std::sqrt(static_cast<double>(area)) * gamma));
    return std::max(scaled, n_min);
}

std::uint64_t augmentation_need(std::uint64_t n_target, std::uint64_t existing) {
    if (existing < kMinSegmentPoints) return 0;
    return n_target > existing ? n_target - existing : 0;
}

double adaptive_sigma(const std::vector<Vec3>& points) {
    if (points.size() < 2)
        throw DataError("adaptive_sigma needs at least 2 points to estimate local density");
    double sum = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, (points[i] - points[j]).norm());
        }
        sum += best;
    }
    double mean_nn = sum / static_cast<double>(points.size());
    return std::max(0.5 * mean_nn, kSigmaFloor);
}

std::vector<NewPoint> augment_segment(const std::vector<Vec3>& points,
                                      const std::vector<Eigen::Matrix<std::uint8_t, 3, 1>>& colors,
                                      std::uint64_t n_add, SampleMode mode, std::uint64_t seed) {
    if (points.size() < kMinSegmentPoints)
        throw DataError("augment_segment needs at least " + std::to_string(kMinSegmentPoints) +
                        " points, got " + std::to_string(points.size()));
    if (colors.size() != points.size())
        throw DataError("augment_segment: color count does not match point count");

    std::vector<NewPoint> out;
    if (n_add == 0) return out;
    out.reserve(n_add);

    Rng rng(seed);

    double sigma = 0;
    Mat3 chol = Mat3::Zero();
    if (mode == SampleMode::Isotropic) {
        sigma = adaptive_sigma(points);
    } else {
        Vec3 mean = Vec3::Zero();
        for (const auto& p : points) mean += p;
        mean /= static_cast<double>(points.size());
        Mat3 cov = Mat3::Zero();
        for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
        cov /= static_cast<double>(points.size() - 1);
        cov += 1e-12 * cov.trace() * Mat3::Identity();
        if (!cov.allFinite()) throw DataError("augment_segment: non-finite segment covariance");
        Eigen::LLT<Mat3> llt(kCovarianceScale * cov);
        if (llt.info() != Eigen::Success)
            throw DataError("augment_segment: segment covariance is not positive definite");
        chol = llt.matrixL();
    }

    for (std::uint64_t i = 0; i < n_add; ++i) {
        const Vec3& base = points[rng.uniform_index(points.size())];
        Vec3 noise(rng.normal(), rng.normal(), rng.normal());
        Vec3 pos = mode == SampleMode::Isotropic ? Vec3(base + sigma * noise)
                                                 : Vec3(base + chol * noise);
        out.push_back({pos, interpolate_color(pos, points, colors)});
    }
    return out;
}

AugmentedCloud densify_cloud(const LabeledCloud& cloud,
                             const std::map<std::uint32_t, std::uint64_t>& areas,
                             const DensifyParams& params, DensifyReport& report) {
    AugmentedCloud out;
    out.points = cloud.points;
    out.synthetic.assign(cloud.points.size(), false);
    out.labels = cloud.labels;
    report = DensifyReport{};

    // segment membership in ascending global id
    std::map<std::uint32_t, std::vector<const ScenePoint*>> segments;
    for (const auto& pt : cloud.points) {
        auto it = cloud.labels.find(pt.point_id);
        if (it != cloud.labels.end()) segments[it->second].push_back(&pt);
    }

    std::uint64_t next_id = 0;
    for (const auto& pt : cloud.points) next_id = std::max(next_id, pt.point_id + 1);

    for (const auto& [gid, members] : segments) {
        auto area_it = areas.find(gid);
        if (area_it == areas.end()) continue; // no mask evidence for this segment

        SegmentStats stats;
        stats.global_id = gid;
        stats.area = area_it->second;
        stats.existing = members.size();
        stats.n_target = target_count(stats.area, params.gamma, params.n_min);
        stats.n_add = augmentation_need(stats.n_target, stats.existing);
        if (stats.n_add == 0) continue;

        std::vector<Vec3> positions;
        std::vector<Eigen::Matrix<std::uint8_t, 3, 1>> colors;
        for (const auto* m : members) {
            positions.push_back(m->position);
            colors.push_back(m->color);
        }

        std::vector<NewPoint> fresh;
        try {
            // per-segment sub-seed keeps segments independent of processing order
            fresh = augment_segment(positions, colors, stats.n_add, params.mode,
                                    params.seed ^ (0x64656e73ULL + gid));
            if (params.mode == SampleMode::Isotropic) stats.sigma = adaptive_sigma(positions);
        } catch (const std::exception& e) {
            report.warnings.push_back("segment " + std::to_string(gid) + " skipped: " + e.what());
            continue;
        }

        for (const auto& np : fresh) {
            ScenePoint pt;
            pt.point_id = next_id++;
            pt.position = np.position;
            pt.color = np.color;
            out.points.push_back(pt);
            out.synthetic.push_back(true);
            out.labels[pt.point_id] = gid;
        }
        report.points_added_total += stats.n_add;
        ++report.segments_touched;
        report.per_segment.push_back(stats);
    }
    return out;
}

} // namespace gsmart::densify
