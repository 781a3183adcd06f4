#pragma once

#include "gsmart/types.hpp"

#include <filesystem>
#include <vector>

namespace gsmart::ply {

// binary-little-endian PLY, vertex element with float x,y,z + uchar red,green,blue
void write(const std::vector<ScenePoint>& points, const std::filesystem::path& path);
std::vector<ScenePoint> read(const std::filesystem::path& path);

} // namespace gsmart::ply
