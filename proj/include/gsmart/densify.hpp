#pragma once

#include "gsmart/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace gsmart::densify {

enum class SampleMode { Isotropic, Covariance };

struct DensifyParams {
    double gamma = 0.1;
    std::uint64_t n_min = 10;
    SampleMode mode = SampleMode::Isotropic;
    std::uint64_t seed = 0;
};

// existing-point floor below which a segment is skipped entirely
constexpr std::uint64_t kMinSegmentPoints = 5;
// scale applied to the segment covariance in Covariance mode
constexpr double kCovarianceScale = 0.01;

struct SegmentStats {
    std::uint32_t global_id = 0;
    std::uint64_t area = 0; // max mask area over linked views
    std::uint64_t existing = 0;
    std::uint64_t n_target = 0;
    std::uint64_t n_add = 0;
    double sigma = 0.0;
};

struct DensifyReport {
    std::uint64_t points_added_total = 0;
    std::uint64_t segments_touched = 0;
    std::vector<SegmentStats> per_segment;
    std::vector<std::string> warnings;
};

struct NewPoint {
    Vec3 position;
    Eigen::Matrix<std::uint8_t, 3, 1> color;
};

std::uint64_t target_count(std::uint64_t area, double gamma, std::uint64_t n_min);

// n_target - existing when positive and existing meets the 5-point floor
std::uint64_t augmentation_need(std::uint64_t n_target, std::uint64_t existing);

// 0.5 x mean nearest-neighbor distance, floored at 1e-12; needs >= 2 points
double adaptive_sigma(const std::vector<Vec3>& points);

std::vector<NewPoint> augment_segment(const std::vector<Vec3>& points,
                                      const std::vector<Eigen::Matrix<std::uint8_t, 3, 1>>& colors,
                                      std::uint64_t n_add, SampleMode mode, std::uint64_t seed);

struct LabeledCloud {
    std::vector<ScenePoint> points;
    std::map<std::uint64_t, std::uint32_t> labels; // point_id -> global segment id
};

struct AugmentedCloud {
    std::vector<ScenePoint> points; // input points followed by the new points
    std::vector<bool> synthetic;    // provenance flag, parallel to points
    std::map<std::uint64_t, std::uint32_t> labels;
};

// areas: global id -> mask area (max over linked views)
AugmentedCloud densify_cloud(const LabeledCloud& cloud,
                             const std::map<std::uint32_t, std::uint64_t>& areas,
                             const DensifyParams& params, DensifyReport& report);

} // namespace gsmart::densify
