#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gsmart::png_io {

struct Gray16 {
    std::uint32_t width = 0, height = 0;
    std::vector<std::uint16_t> pixels; // row-major
};

// Normalized image, values in [0,1], interleaved by channel.
struct ImageF {
    std::uint32_t width = 0, height = 0;
    std::uint32_t channels = 0; // 1 or 3
    std::vector<double> values; // size = width*height*channels
};

Gray16 read_gray16(const std::filesystem::path& path);
void write_gray16(const Gray16& img, const std::filesystem::path& path);

// Reads 8- or 16-bit gray/RGB PNG; alpha is dropped.
ImageF read_image(const std::filesystem::path& path);
void write_image8(const ImageF& img, const std::filesystem::path& path);

} // namespace gsmart::png_io
