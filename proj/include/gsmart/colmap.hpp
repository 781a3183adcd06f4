#pragma once

#include "gsmart/types.hpp"

#include <filesystem>
#include <string>

namespace gsmart::colmap {

enum class Format { Binary, Text };

// Parse a COLMAP sparse model from the three per-entity byte streams.
// Only PINHOLE and SIMPLE_PINHOLE camera models are accepted.
SceneModel parse_model(const std::string& camera_bytes,
                       const std::string& image_bytes,
                       const std::string& point_bytes,
                       Format format);

// Reads cameras.{bin,txt} / images.{bin,txt} / points3D.{bin,txt} from a
// directory, auto-detecting the format (binary preferred when both exist).
SceneModel read_model_dir(const std::filesystem::path& dir);

void encode_model(const SceneModel& model, Format format,
                  std::string& camera_bytes, std::string& image_bytes,
                  std::string& point_bytes);

void write_model_dir(const SceneModel& model, const std::filesystem::path& dir, Format format);

} // namespace gsmart::colmap
