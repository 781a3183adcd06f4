#include "gsmart/hull_filter.hpp"
#include "gsmart/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace gsmart::hull_filter {

namespace {

// affine rank with a tolerance relative to the largest singular value
int affine_rank(const std::vector<Vec3>& pts) {
    if (pts.size() < 2) return 0;
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::MatrixXd centered(pts.size(), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) centered.row(i) = (pts[i] - mean).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-9 * sv[0]) ++rank;
    return rank;
}

} // namespace

CoreSelection select_trusted_core(const std::vector<ScenePoint>& points, std::uint64_t min_track,
                                  double max_error_quantile) {
    CoreSelection sel;
    if (points.empty()) return sel;

    std::vector<double> errors;
    errors.reserve(points.size());
    for (const auto& p : points) errors.push_back(p.reprojection_error);
    std::sort(errors.begin(), errors.end());
    auto idx = static_cast<std::size_t>(
        std::ceil(max_error_quantile * static_cast<double>(errors.size())));
    idx = idx == 0 ? 0 : idx - 1;
    idx = std::min(idx, errors.size() - 1);
    const double error_cut = errors[idx];

    std::vector<Vec3> positions;
    for (const auto& p : points) {
        if (p.track_length() >= min_track && p.reprojection_error <= error_cut) {
            sel.ids.push_back(p.point_id);
            positions.push_back(p.position);
        }
    }
    if (positions.size() < 4 || affine_rank(positions) < 3) {
        sel.ids.clear();
        for (const auto& p : points) sel.ids.push_back(p.point_id);
        sel.degraded = true;
    }
    return sel;
}

FilterResult filter_outliers(const std::vector<ScenePoint>& points, const FilterParams& params) {
    FilterResult result;
    if (points.empty()) return result;

    CoreSelection core = select_trusted_core(points, params.min_track, params.max_error_quantile);
    result.core_size = core.ids.size();
    result.core_degraded = core.degraded;

    std::unordered_map<std::uint64_t, const ScenePoint*> by_id;
    for (const auto& p : points) by_id[p.point_id] = &p;

    std::vector<Vec3> core_positions;
    core_positions.reserve(core.ids.size());
    for (auto id : core.ids) core_positions.push_back(by_id.at(id)->position);

    ConvexHull3 hull = build_hull(core_positions);
    result.threshold_used = params.rel_threshold * hull.bbox_diagonal;

    for (const auto& p : points) {
        double d = distance_to_hull(hull, p.position);
        if (d > result.threshold_used)
            result.removed.push_back(p.point_id);
        else
            result.kept.push_back(p.point_id);
    }
    return result;
}

} // namespace gsmart::hull_filter
