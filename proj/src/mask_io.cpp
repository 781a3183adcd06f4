#include "gsmart/mask_io.hpp"
#include "gsmart/error.hpp"
#include "gsmart/png_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gsmart {

void SegmentMask::recompute_stats() {
    areas.clear();
    bboxes.clear();
    for (std::uint32_t y = 0; y < height; ++y) {
        for (std::uint32_t x = 0; x < width; ++x) {
            std::uint16_t k = at(x, y);
            if (k == 0) continue;
            ++areas[k];
            auto it = bboxes.find(k);
            if (it == bboxes.end()) {
                bboxes[k] = {static_cast<std::int32_t>(x), static_cast<std::int32_t>(y), 1, 1};
            } else {
                BBox2i& b = it->second;
                std::int32_t x1 = std::max(b.x + b.w, static_cast<std::int32_t>(x) + 1);
                std::int32_t y1 = std::max(b.y + b.h, static_cast<std::int32_t>(y) + 1);
                b.x = std::min(b.x, static_cast<std::int32_t>(x));
                b.y = std::min(b.y, static_cast<std::int32_t>(y));
                b.w = x1 - b.x;
                b.h = y1 - b.y;
            }
        }
    }
}

} // namespace gsmart

namespace gsmart::mask_io {

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path) {
    auto p = raster_path;
    p.replace_extension(".seg.txt");
    return p;
}

SegmentMask load_mask(const std::filesystem::path& raster_path, const WarnFn& warn) {
    auto gray = png_io::read_gray16(raster_path);
    SegmentMask mask;
    mask.view_name = raster_path.stem().string();
    mask.width = gray.width;
    mask.height = gray.height;
    mask.labels = std::move(gray.pixels);
    mask.recompute_stats();

    auto sidecar = sidecar_path(raster_path);
    if (std::filesystem::exists(sidecar)) {
        std::ifstream f(sidecar);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ss(line);
            std::uint32_t label;
            std::uint64_t area;
            BBox2i bbox;
            if (!(ss >> label >> area >> bbox.x >> bbox.y >> bbox.w >> bbox.h))
                throw ParseError(sidecar.string() + " line " + std::to_string(lineno) +
                                 ": expected 'label area x y w h'");
            auto k = static_cast<std::uint16_t>(label);
            auto it = mask.areas.find(k);
            if (it == mask.areas.end()) {
                if (warn)
                    warn(sidecar.string() + ": label " + std::to_string(label) +
                         " absent from raster, ignored");
                continue;
            }
            if (it->second != area && warn)
                warn(sidecar.string() + ": label " + std::to_string(label) + " declares area " +
                     std::to_string(area) + " but raster has " + std::to_string(it->second) +
                     "; recount wins");
            const BBox2i& rb = mask.bboxes.at(k);
            if ((bbox.x != rb.x || bbox.y != rb.y || bbox.w != rb.w || bbox.h != rb.h) && warn)
                warn(sidecar.string() + ": label " + std::to_string(label) +
                     " bbox differs from raster; recount wins");
        }
    }
    return mask;
}

void save_mask(const SegmentMask& mask, const std::filesystem::path& raster_path) {
    png_io::Gray16 gray;
    gray.width = mask.width;
    gray.height = mask.height;
    gray.pixels = mask.labels;
    png_io::write_gray16(gray, raster_path);

    std::ofstream f(sidecar_path(raster_path), std::ios::trunc);
    f << "# label area x y w h\n";
    for (const auto& [k, area] : mask.areas) {
        const BBox2i& b = mask.bboxes.at(k);
        f << k << ' ' << area << ' ' << b.x << ' ' << b.y << ' ' << b.w << ' ' << b.h << '\n';
    }
}

} // namespace gsmart::mask_io
