#include "gsmart/synth.hpp"
#include "gsmart/colmap.hpp"
#include "gsmart/error.hpp"
#include "gsmart/mask_io.hpp"
#include "gsmart/rng.hpp"
#include "gsmart/segment_fusion.hpp"

#include <cmath>
#include <fstream>

namespace gsmart::synth {

namespace {

constexpr double kClusterRadius = 0.12;
constexpr double kSegmentRingRadius = 0.7;
constexpr double kCameraDistance = 4.0;

CameraPose look_at_origin(const Vec3& center, std::int32_t image_id, std::int32_t camera_id,
                          const std::string& name) {
    // COLMAP-style world-to-camera with +z toward the scene
    Vec3 z = (-center).normalized();
    Vec3 up(0, 0, 1);
    if (std::abs(z.dot(up)) > 0.999) up = Vec3(0, 1, 0);
    Vec3 x = up.cross(z).normalized();
    Vec3 y = z.cross(x);
    Mat3 world_to_cam;
    world_to_cam.row(0) = x.transpose();
    world_to_cam.row(1) = y.transpose();
    world_to_cam.row(2) = z.transpose();

    CameraPose pose;
    pose.image_id = image_id;
    pose.camera_id = camera_id;
    pose.view_name = name;
    pose.rotation = Eigen::Quaterniond(world_to_cam);
    if (pose.rotation.w() < 0) pose.rotation.coeffs() = -pose.rotation.coeffs();
    pose.translation = -(world_to_cam * center);
    return pose;
}

std::vector<Vec3> rig_centers(const SynthConfig& cfg, Rng& rng) {
    std::vector<Vec3> centers;
    const auto n = cfg.n_cameras;
    switch (cfg.camera_rig) {
    case CameraRig::Ring:
        for (std::size_t i = 0; i < n; ++i) {
            double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
            centers.emplace_back(0.6 * kCameraDistance * std::cos(a),
                                 0.6 * kCameraDistance * std::sin(a), 0.8 * kCameraDistance);
        }
        break;
    case CameraRig::Sphere:
        for (std::size_t i = 0; i < n; ++i) {
            // Fibonacci sphere, upper hemisphere biased to limit occlusion
            double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            double z = 0.2 + 0.8 * t;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double a = 2.0 * M_PI * static_cast<double>(i) * 0.6180339887498949;
            centers.emplace_back(kCameraDistance * r * std::cos(a),
                                 kCameraDistance * r * std::sin(a), kCameraDistance * z);
        }
        break;
    case CameraRig::TwoRings:
        for (std::size_t i = 0; i < n; ++i) {
            double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>((n + 1) / 2);
            double zf = (i % 2 == 0) ? 0.7 : 1.0;
            centers.emplace_back(0.6 * kCameraDistance * std::cos(a),
                                 0.6 * kCameraDistance * std::sin(a), zf * kCameraDistance);
        }
        break;
    }
    (void)rng;
    return centers;
}

} // namespace

GroundTruth make_scene(const SynthConfig& cfg) {
    if (cfg.outlier_fraction < 0 || cfg.outlier_fraction > 1)
        throw ConfigError("outlier_fraction must be in [0,1]");
    if (cfg.outlier_radius_multiplier <= 1)
        throw ConfigError("outlier_radius_multiplier must exceed 1");
    if (cfg.n_cameras == 0) throw ConfigError("need at least one camera");
    if (cfg.n_segments == 0) throw ConfigError("need at least one segment");

    const auto n_outliers =
        static_cast<std::size_t>(std::llround(cfg.outlier_fraction * static_cast<double>(cfg.n_points)));
    const auto n_inliers = cfg.n_points - n_outliers;
    if (n_inliers < cfg.n_segments * 5)
        throw ConfigError("n_points too small: " + std::to_string(n_inliers) +
                          " inliers cannot give every of " + std::to_string(cfg.n_segments) +
                          " segments the 5-point minimum");

    Rng rng(cfg.seed ^ 0x73796e7468ULL);
    GroundTruth gt;

    // intrinsics
    CameraIntrinsics intr;
    intr.camera_id = 1;
    intr.model_kind = CameraModelKind::Pinhole;
    intr.width = cfg.image_width;
    intr.height = cfg.image_height;
    intr.fx = intr.fy = 0.9 * cfg.image_width;
    intr.cx = cfg.image_width / 2.0;
    intr.cy = cfg.image_height / 2.0;
    gt.scene.cameras[1] = intr;

    // cameras
    auto centers = rig_centers(cfg, rng);
    std::vector<std::int32_t> image_ids;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "cam%03zu", i);
        auto id = static_cast<std::int32_t>(i + 1);
        gt.scene.views.push_back(look_at_origin(centers[i], id, 1, name));
        image_ids.push_back(id);
    }

    // segment centers on a ring, clusters inside a small ball
    std::vector<Vec3> seg_centers;
    for (std::size_t s = 0; s < cfg.n_segments; ++s) {
        double a = 2.0 * M_PI * static_cast<double>(s) / static_cast<double>(cfg.n_segments);
        seg_centers.emplace_back(kSegmentRingRadius * std::cos(a),
                                 kSegmentRingRadius * std::sin(a),
                                 0.1 * std::sin(3.0 * a));
    }

    std::uint64_t pid = 0;
    double inlier_radius = 0;
    for (std::size_t i = 0; i < n_inliers; ++i) {
        auto seg = static_cast<std::uint16_t>(i % cfg.n_segments + 1);
        Vec3 dir(rng.normal(), rng.normal(), rng.normal());
        dir.normalize();
        double r = kClusterRadius * std::cbrt(rng.uniform());
        ScenePoint pt;
        pt.point_id = pid++;
        pt.position = seg_centers[seg - 1] + r * dir;
        pt.color = {static_cast<std::uint8_t>(40 * seg % 256),
                    static_cast<std::uint8_t>(255 - 30 * seg % 256),
                    static_cast<std::uint8_t>(90 + 50 * seg % 256)};
        pt.reprojection_error = 0.1 * rng.uniform();
        pt.track_image_ids = image_ids;
        gt.true_segment_of_point[pt.point_id] = seg;
        inlier_radius = std::max(inlier_radius, pt.position.norm());
        gt.scene.points.push_back(std::move(pt));
    }

    for (std::size_t i = 0; i < n_outliers; ++i) {
        Vec3 dir(rng.normal(), rng.normal(), rng.normal());
        dir.normalize();
        double r = cfg.outlier_radius_multiplier * inlier_radius * (1.0 + rng.uniform());
        ScenePoint pt;
        pt.point_id = pid++;
        pt.position = r * dir;
        pt.color = {255, 0, 0};
        pt.reprojection_error = 1.5 + rng.uniform();
        pt.track_image_ids = {image_ids[0]};
        gt.true_outlier_ids.insert(pt.point_id);
        gt.scene.points.push_back(std::move(pt));
    }

    // rasterize masks from the true segments; pixels reached by two different
    // segments stay unlabeled so point-to-pixel lookups are never ambiguous
    for (const auto& view : gt.scene.views) {
        SegmentMask mask;
        mask.view_name = view.view_name;
        mask.width = cfg.image_width;
        mask.height = cfg.image_height;
        mask.labels.assign(std::size_t(mask.width) * mask.height, 0);
        std::vector<bool> conflicted(mask.labels.size(), false);

        for (const auto& pt : gt.scene.points) {
            auto seg_it = gt.true_segment_of_point.find(pt.point_id);
            if (seg_it == gt.true_segment_of_point.end()) continue;
            auto pr = fusion::project_point(pt.position, intr, view);
            if (!pr) continue;
            auto x = static_cast<std::uint32_t>(pr->u);
            auto y = static_cast<std::uint32_t>(pr->v);
            std::size_t idx = std::size_t(y) * mask.width + x;
            if (conflicted[idx]) continue;
            if (mask.labels[idx] == 0) {
                mask.labels[idx] = seg_it->second;
            } else if (mask.labels[idx] != seg_it->second) {
                mask.labels[idx] = 0;
                conflicted[idx] = true;
            }
        }

        // 1-pixel dilation into unambiguous empty neighbors
        std::vector<std::uint16_t> dilated = mask.labels;
        const std::int64_t W = mask.width, H = mask.height;
        for (std::int64_t y = 0; y < H; ++y) {
            for (std::int64_t x = 0; x < W; ++x) {
                std::size_t idx = std::size_t(y) * mask.width + x;
                if (mask.labels[idx] != 0 || conflicted[idx]) continue;
                std::uint16_t found = 0;
                bool ambiguous = false;
                for (std::int64_t dy = -1; dy <= 1 && !ambiguous; ++dy) {
                    for (std::int64_t dx = -1; dx <= 1; ++dx) {
                        std::int64_t nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
                        std::uint16_t l = mask.labels[std::size_t(ny) * mask.width + nx];
                        if (l == 0) continue;
                        if (found == 0) found = l;
                        else if (found != l) {
                            ambiguous = true;
                            break;
                        }
                    }
                }
                if (!ambiguous && found != 0) dilated[idx] = found;
            }
        }
        mask.labels = std::move(dilated);
        mask.recompute_stats();
        gt.masks.push_back(std::move(mask));
    }
    return gt;
}

void write_dataset(const GroundTruth& gt, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "sparse");
    fs::create_directories(dir / "masks");
    colmap::write_model_dir(gt.scene, dir / "sparse", colmap::Format::Text);
    for (const auto& mask : gt.masks)
        mask_io::save_mask(mask, dir / "masks" / (mask.view_name + ".png"));

    std::ofstream f(dir / "ground_truth.txt", std::ios::trunc);
    f << "# outlier point ids\n";
    for (auto id : gt.true_outlier_ids) f << "outlier " << id << '\n';
    f << "# point_id true_segment\n";
    for (const auto& [id, seg] : gt.true_segment_of_point) f << "segment " << id << ' ' << seg << '\n';
}

} // namespace gsmart::synth
