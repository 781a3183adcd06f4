#include "gsmart/view_select.hpp"
#include "gsmart/error.hpp"
#include "gsmart/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsmart::view_select {

namespace {

constexpr double kSigmaFloor = 1e-12;
constexpr double kShiftTol = 1e-8;
constexpr int kMaxIterations = 200;

void center_stats(const std::vector<CameraFeature>& features, Vec3& mean, Vec3& sigma) {
    mean = Vec3::Zero();
    for (const auto& f : features) mean += f.center;
    mean /= static_cast<double>(features.size());
    Vec3 var = Vec3::Zero();
    for (const auto& f : features) var += (f.center - mean).cwiseAbs2();
    var /= static_cast<double>(features.size());
    sigma = var.cwiseSqrt().cwiseMax(kSigmaFloor);
}

double angle_between(const Vec3& a, const Vec3& b) {
    double c = std::clamp(a.dot(b), -1.0, 1.0);
    return std::acos(c);
}

double scene_diagonal(const std::vector<CameraFeature>& features) {
    Vec3 lo = features[0].center, hi = features[0].center;
    for (const auto& f : features) {
        lo = lo.cwiseMin(f.center);
        hi = hi.cwiseMax(f.center);
    }
    return (hi - lo).norm();
}

std::vector<std::size_t> assign_nearest(const std::vector<CameraFeature>& features,
                                        const std::vector<Vec3>& centroids) {
    std::vector<std::size_t> assignment(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            double d = (features[i].normalized_center - centroids[c]).squaredNorm();
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        assignment[i] = arg;
    }
    return assignment;
}

double total_inertia(const std::vector<CameraFeature>& features,
                     const std::vector<Vec3>& centroids, const std::vector<std::size_t>& assignment) {
    double s = 0;
    for (std::size_t i = 0; i < features.size(); ++i)
        s += (features[i].normalized_center - centroids[assignment[i]]).squaredNorm();
    return s;
}

// empty clusters steal the farthest member of the largest cluster
void repair_empty(const std::vector<CameraFeature>& features, std::size_t k,
                  std::vector<std::size_t>& assignment, const std::vector<Vec3>& centroids) {
    while (true) {
        std::vector<std::size_t> sizes(k, 0);
        for (auto a : assignment) ++sizes[a];
        std::size_t empty = k;
        for (std::size_t c = 0; c < k; ++c)
            if (sizes[c] == 0) {
                empty = c;
                break;
            }
        if (empty == k) return;
        std::size_t largest = std::max_element(sizes.begin(), sizes.end()) - sizes.begin();
        double far = -1;
        std::size_t victim = 0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (assignment[i] != largest) continue;
            double d = (features[i].normalized_center - centroids[largest]).squaredNorm();
            if (d > far) {
                far = d;
                victim = i;
            }
        }
        assignment[victim] = empty;
    }
}

} // namespace

std::vector<CameraFeature> extract_features(const SceneModel& model, ForwardConvention convention) {
    if (model.views.empty()) throw DataError("feature extraction needs at least one registered view");
    std::vector<CameraFeature> features;
    features.reserve(model.views.size());
    for (const auto& v : model.views) {
        CameraFeature f;
        f.view_name = v.view_name;
        f.center = v.center();
        Mat3 c2w = v.c2w_rotation();
        f.forward = convention == ForwardConvention::NegZ ? Vec3(-c2w.col(2)) : Vec3(c2w.col(2));
        f.forward.normalize();
        features.push_back(std::move(f));
    }
    Vec3 mean, sigma;
    center_stats(features, mean, sigma);
    for (auto& f : features)
        f.normalized_center = (f.center - mean).cwiseQuotient(sigma);
    return features;
}

Clustering kmeans(const std::vector<CameraFeature>& features, std::size_t k, std::uint64_t seed) {
    const std::size_t n = features.size();
    if (k < 1 || k > n) throw DataError("kmeans: k must be in [1, N]");

    Rng rng(seed ^ 0x6b6d65616e73ULL ^ (k * 0x9e3779b97f4a7c15ULL));
    Clustering cl;
    cl.k = k;

    // k-means++ seeding
    cl.centroids.push_back(features[rng.uniform_index(n)].normalized_center);
    std::vector<double> dist2(n);
    while (cl.centroids.size() < k) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : cl.centroids)
                best = std::min(best, (features[i].normalized_center - c).squaredNorm());
            dist2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0) {
            pick = rng.uniform_index(n);
        } else {
            double r = rng.uniform() * total;
            double acc = 0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        cl.centroids.push_back(features[pick].normalized_center);
    }

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        cl.assignment = assign_nearest(features, cl.centroids);
        repair_empty(features, k, cl.assignment, cl.centroids);
        cl.inertia_history.push_back(total_inertia(features, cl.centroids, cl.assignment));

        std::vector<Vec3> next(k, Vec3::Zero());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            next[cl.assignment[i]] += features[i].normalized_center;
            ++counts[cl.assignment[i]];
        }
        double shift = 0;
        for (std::size_t c = 0; c < k; ++c) {
            next[c] /= static_cast<double>(counts[c]);
            shift = std::max(shift, (next[c] - cl.centroids[c]).norm());
        }
        cl.centroids = std::move(next);
        if (shift < kShiftTol) break;
    }
    cl.assignment = assign_nearest(features, cl.centroids);
    repair_empty(features, k, cl.assignment, cl.centroids);
    cl.inertia = total_inertia(features, cl.centroids, cl.assignment);
    cl.inertia_history.push_back(cl.inertia);
    return cl;
}

double coverage(const Clustering& clustering, const std::vector<CameraFeature>& features) {
    const double diag = std::max(scene_diagonal(features), kSigmaFloor);
    std::vector<std::vector<std::size_t>> members(clustering.k);
    for (std::size_t i = 0; i < features.size(); ++i)
        members[clustering.assignment[i]].push_back(i);

    double total = 0;
    for (const auto& m : members) {
        if (m.size() < 2) continue; // singleton contributes 0
        double spread = 0, angular = 0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < m.size(); ++a) {
            for (std::size_t b = a + 1; b < m.size(); ++b) {
                spread += (features[m[a]].center - features[m[b]].center).norm();
                angular += angle_between(features[m[a]].forward, features[m[b]].forward);
                ++pairs;
            }
        }
        spread /= static_cast<double>(pairs) * diag;
        angular /= static_cast<double>(pairs) * M_PI;
        total += (spread + angular) / 2.0;
    }
    return total / static_cast<double>(clustering.k);
}

double compactness(const Clustering& clustering, const std::vector<CameraFeature>& features) {
    double fro2 = 0;
    for (const auto& f : features) fro2 += f.normalized_center.squaredNorm();
    double fro = std::max(std::sqrt(fro2), kSigmaFloor);
    return -clustering.inertia / fro;
}

SelectionResult select_k(const std::vector<CameraFeature>& features, const SelectParams& params) {
    const std::size_t n = features.size();
    SelectionResult result;
    const std::size_t k_max = std::min<std::size_t>(15, n / 2);
    if (k_max < params.k_min) {
        result.chosen_k = std::max<std::size_t>(1, n / 2);
        return result;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = params.k_min; k <= k_max; ++k) {
        Clustering cl = kmeans(features, k, params.seed);
        double score = params.alpha * coverage(cl, features) + params.beta * compactness(cl, features);
        result.score_per_k[k] = score;
        if (score > best) {
            best = score;
            result.chosen_k = k;
        }
    }
    return result;
}

std::vector<std::string> select_representatives(const Clustering& clustering,
                                                const std::vector<CameraFeature>& features) {
    Vec3 mean, sigma;
    center_stats(features, mean, sigma);

    std::vector<std::vector<std::size_t>> members(clustering.k);
    for (std::size_t i = 0; i < features.size(); ++i)
        members[clustering.assignment[i]].push_back(i);

    std::vector<std::string> reps;
    for (std::size_t c = 0; c < clustering.k; ++c) {
        const auto& m = members[c];
        Vec3 world_center = clustering.centroids[c].cwiseProduct(sigma) + mean;

        // raw angular uniqueness, then min-max scaled within the cluster
        std::vector<double> ang(m.size(), 0.0);
        if (m.size() > 1) {
            for (std::size_t a = 0; a < m.size(); ++a) {
                double s = 0;
                for (std::size_t b = 0; b < m.size(); ++b)
                    if (a != b) s += angle_between(features[m[a]].forward, features[m[b]].forward);
                ang[a] = s / static_cast<double>(m.size() - 1);
            }
        }
        double lo = *std::min_element(ang.begin(), ang.end());
        double hi = *std::max_element(ang.begin(), ang.end());

        double best_score = -1;
        std::string best_name;
        for (std::size_t a = 0; a < m.size(); ++a) {
            double term1 = 1.0 / (1.0 + (features[m[a]].center - world_center).norm());
            double term2 = (hi - lo) > 0 ? (ang[a] - lo) / (hi - lo) : 0.0;
            double score = (term1 + term2) / 2.0;
            const std::string& name = features[m[a]].view_name;
            if (score > best_score || (score == best_score && name < best_name)) {
                best_score = score;
                best_name = name;
            }
        }
        reps.push_back(best_name);
    }
    return reps;
}

SelectionResult select_views(const std::vector<CameraFeature>& features, const SelectParams& params) {
    SelectionResult result = select_k(features, params);
    Clustering cl = kmeans(features, result.chosen_k, params.seed);
    result.representatives = select_representatives(cl, features);
    return result;
}

} // namespace gsmart::view_select
