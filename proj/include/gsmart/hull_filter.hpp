#pragma once

#include "gsmart/hull.hpp"
#include "gsmart/types.hpp"

#include <cstdint>
#include <vector>

namespace gsmart::hull_filter {

struct FilterParams {
    double rel_threshold = 0.05; // fraction of the hull bounding-box diagonal
    std::uint64_t min_track = 3;
    double max_error_quantile = 0.9;
};

struct CoreSelection {
    std::vector<std::uint64_t> ids;
    bool degraded = false; // true when the core was relaxed to all points
};

struct FilterResult {
    std::vector<std::uint64_t> kept;
    std::vector<std::uint64_t> removed;
    double threshold_used = 0.0;
    std::size_t core_size = 0;
    bool core_degraded = false;
};

// Points with track_length >= min_track and reprojection error at or below the
// given quantile. Relaxes to all points (flagging degradation) when fewer than
// 4 non-coplanar points qualify.
CoreSelection select_trusted_core(const std::vector<ScenePoint>& points, std::uint64_t min_track,
                                  double max_error_quantile);

FilterResult filter_outliers(const std::vector<ScenePoint>& points, const FilterParams& params);

} // namespace gsmart::hull_filter
