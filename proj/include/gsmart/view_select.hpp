#pragma once

#include "gsmart/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace gsmart::view_select {

enum class ForwardConvention { NegZ, PosZ };

struct CameraFeature {
    std::string view_name;
    Vec3 center;
    Vec3 forward; // unit, camera view axis in world coordinates
    Vec3 normalized_center;
};

struct Clustering {
    std::size_t k = 0;
    std::vector<std::size_t> assignment; // feature index -> cluster index
    std::vector<Vec3> centroids;         // in normalized coordinates
    double inertia = 0.0;
    std::vector<double> inertia_history; // per Lloyd iteration
};

struct SelectionResult {
    std::size_t chosen_k = 0;
    std::map<std::size_t, double> score_per_k;
    std::vector<std::string> representatives; // one view per cluster
};

struct SelectParams {
    std::size_t k_min = 3;
    double alpha = 0.5;
    double beta = 0.5;
    std::uint64_t seed = 0;
    ForwardConvention forward = ForwardConvention::NegZ;
};

std::vector<CameraFeature> extract_features(const SceneModel& model,
                                            ForwardConvention convention = ForwardConvention::NegZ);

Clustering kmeans(const std::vector<CameraFeature>& features, std::size_t k, std::uint64_t seed);

double coverage(const Clustering& clustering, const std::vector<CameraFeature>& features);
double compactness(const Clustering& clustering, const std::vector<CameraFeature>& features);

// Scores every k in [k_min, min(15, N/2)]; argmax wins, ties to smallest k.
// Representatives are left empty; select_views fills them.
SelectionResult select_k(const std::vector<CameraFeature>& features, const SelectParams& params);

std::vector<std::string> select_representatives(const Clustering& clustering,
                                                const std::vector<CameraFeature>& features);

// select_k + kmeans at chosen_k + representative per cluster
SelectionResult select_views(const std::vector<CameraFeature>& features, const SelectParams& params);

} // namespace gsmart::view_select
