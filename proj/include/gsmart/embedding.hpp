#pragma once

#include "gsmart/types.hpp"

#include <filesystem>

namespace gsmart::embedding {

// "EMB1" magic + uint32 little-endian dim + dim float32 values
EmbeddingVector load(const std::filesystem::path& path);
void save(const EmbeddingVector& v, const std::filesystem::path& path);

} // namespace gsmart::embedding
