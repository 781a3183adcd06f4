#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gsmart {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class CameraModelKind { Pinhole, SimplePinhole };

struct CameraIntrinsics {
    std::int32_t camera_id = -1;
    CameraModelKind model_kind = CameraModelKind::Pinhole;
    std::uint64_t width = 0, height = 0;
    double fx = 0, fy = 0, cx = 0, cy = 0;
};

// World-to-camera rotation/translation; camera center is c = -R^T t.
struct CameraPose {
    std::int32_t image_id = -1;
    std::string view_name;
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
    Vec3 translation = Vec3::Zero();
    std::int32_t camera_id = -1;

    Mat3 world_to_camera() const { return rotation.toRotationMatrix(); }
    Vec3 center() const { return -(world_to_camera().transpose() * translation); }
    // camera-to-world rotation (columns are the camera axes in world coords)
    Mat3 c2w_rotation() const { return world_to_camera().transpose(); }
};

struct ScenePoint {
    std::uint64_t point_id = 0;
    Vec3 position = Vec3::Zero();
    Eigen::Matrix<std::uint8_t, 3, 1> color = Eigen::Matrix<std::uint8_t, 3, 1>::Zero();
    double reprojection_error = 0.0;
    std::vector<std::int32_t> track_image_ids; // registered views observing this point
    std::uint64_t track_length() const { return track_image_ids.size(); }
};

struct SceneModel {
    std::map<std::int32_t, CameraIntrinsics> cameras;
    std::vector<CameraPose> views; // sorted by image_id on parse
    std::vector<ScenePoint> points;

    const CameraPose* find_view(const std::string& name) const {
        for (const auto& v : views)
            if (v.view_name == name) return &v;
        return nullptr;
    }
};

struct BBox2i {
    std::int32_t x = 0, y = 0, w = 0, h = 0;
};

// Per-view label raster. 0 = unlabeled, k > 0 = segment k.
struct SegmentMask {
    std::string view_name;
    std::uint32_t width = 0, height = 0;
    std::vector<std::uint16_t> labels; // row-major, height*width
    std::map<std::uint16_t, std::uint64_t> areas;
    std::map<std::uint16_t, BBox2i> bboxes;

    std::uint16_t at(std::uint32_t x, std::uint32_t y) const { return labels[y * width + x]; }
    std::uint16_t& at(std::uint32_t x, std::uint32_t y) { return labels[y * width + x]; }

    void recompute_stats();
};

struct EmbeddingVector {
    Eigen::VectorXd values;
    Eigen::Index dim() const { return values.size(); }
};

} // namespace gsmart
