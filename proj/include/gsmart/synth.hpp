#pragma once

#include "gsmart/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

namespace gsmart::synth {

enum class CameraRig { Ring, Sphere, TwoRings };

struct SynthConfig {
    std::size_t n_cameras = 12;
    CameraRig camera_rig = CameraRig::Ring;
    std::size_t n_points = 1000;
    std::size_t n_segments = 5;
    double outlier_fraction = 0.0;
    double outlier_radius_multiplier = 10.0;
    std::uint64_t seed = 0;
    std::uint32_t image_width = 128;
    std::uint32_t image_height = 128;
};

struct GroundTruth {
    SceneModel scene;
    std::set<std::uint64_t> true_outlier_ids;
    std::map<std::uint64_t, std::uint16_t> true_segment_of_point; // 1-based, matches mask labels
    std::vector<SegmentMask> masks;                               // one per view, in view order
};

// Deterministic scene with per-segment point clusters, far-flung outliers with
// track length 1, cameras on the chosen rig looking at the origin, and masks
// rasterized from the true segments (1-pixel dilation; ambiguous pixels stay
// unlabeled so every labeled pixel traces to exactly one segment).
GroundTruth make_scene(const SynthConfig& config);

// COLMAP text model + mask rasters/sidecars + ground-truth sidecar
void write_dataset(const GroundTruth& gt, const std::filesystem::path& dir);

} // namespace gsmart::synth
