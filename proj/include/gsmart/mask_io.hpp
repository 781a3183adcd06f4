#pragma once

#include "gsmart/types.hpp"

#include <filesystem>
#include <functional>

namespace gsmart::mask_io {

using WarnFn = std::function<void(const std::string&)>;

// Loads a 16-bit grayscale label raster; a sidecar "<stem>.seg.txt" next to it
// (label id, area, bbox per line) is cross-checked when present. Recomputed
// areas/bboxes win over inconsistent sidecar values, with a warning.
SegmentMask load_mask(const std::filesystem::path& raster_path, const WarnFn& warn = {});

void save_mask(const SegmentMask& mask, const std::filesystem::path& raster_path);

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path);

} // namespace gsmart::mask_io
