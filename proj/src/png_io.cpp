#include "gsmart/png_io.hpp"
#include "gsmart/error.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace gsmart::png_io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngRead {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngRead() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWrite {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWrite() { png_destroy_write_struct(&png, &info); }
};

// decodes to 16-bit big-endian rows as libpng delivers them
void read_png(const std::filesystem::path& path, std::uint32_t& w, std::uint32_t& h,
              std::uint32_t& channels, std::uint32_t& bit_depth,
              std::vector<std::vector<png_byte>>& rows) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) throw DataError("cannot open " + path.string());

    PngRead ctx;
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw DataError("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw ParseError(path.string() + ": PNG decode failed");

    png_init_io(ctx.png, f.get());
    png_read_info(ctx.png, ctx.info);

    w = png_get_image_width(ctx.png, ctx.info);
    h = png_get_image_height(ctx.png, ctx.info);
    bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    int color = png_get_color_type(ctx.png, ctx.info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    channels = png_get_channels(ctx.png, ctx.info);

    std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    rows.assign(h, std::vector<png_byte>(rowbytes));
    std::vector<png_bytep> ptrs(h);
    for (std::uint32_t y = 0; y < h; ++y) ptrs[y] = rows[y].data();
    png_read_image(ctx.png, ptrs.data());
    png_read_end(ctx.png, nullptr);
}

} // namespace

Gray16 read_gray16(const std::filesystem::path& path) {
    std::uint32_t w, h, ch, depth;
    std::vector<std::vector<png_byte>> rows;
    read_png(path, w, h, ch, depth, rows);
    if (ch != 1)
        throw ParseError(path.string() + ": expected grayscale label raster, got " +
                         std::to_string(ch) + " channels");
    Gray16 img;
    img.width = w;
    img.height = h;
    img.pixels.resize(std::size_t(w) * h);
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            if (depth == 16)
                img.pixels[std::size_t(y) * w + x] =
                    static_cast<std::uint16_t>((rows[y][2 * x] << 8) | rows[y][2 * x + 1]);
            else
                img.pixels[std::size_t(y) * w + x] = rows[y][x];
        }
    }
    return img;
}

void write_gray16(const Gray16& img, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) throw DataError("cannot write " + path.string());

    PngWrite ctx;
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw DataError("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw DataError(path.string() + ": PNG encode failed");

    png_init_io(ctx.png, f.get());
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    std::vector<png_byte> row(std::size_t(img.width) * 2);
    for (std::uint32_t y = 0; y < img.height; ++y) {
        for (std::uint32_t x = 0; x < img.width; ++x) {
            std::uint16_t v = img.pixels[std::size_t(y) * img.width + x];
            row[2 * x] = static_cast<png_byte>(v >> 8);
            row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
}

ImageF read_image(const std::filesystem::path& path) {
    std::uint32_t w, h, ch, depth;
    std::vector<std::vector<png_byte>> rows;
    read_png(path, w, h, ch, depth, rows);
    if (ch != 1 && ch != 3)
        throw ParseError(path.string() + ": expected 1 or 3 channels, got " + std::to_string(ch));
    ImageF img;
    img.width = w;
    img.height = h;
    img.channels = ch;
    img.values.resize(std::size_t(w) * h * ch);
    const double scale = depth == 16 ? 65535.0 : 255.0;
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t i = 0; i < w * ch; ++i) {
            double v = depth == 16
                           ? static_cast<double>((rows[y][2 * i] << 8) | rows[y][2 * i + 1])
                           : static_cast<double>(rows[y][i]);
            img.values[std::size_t(y) * w * ch + i] = v / scale;
        }
    }
    return img;
}

void write_image8(const ImageF& img, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) throw DataError("cannot write " + path.string());

    PngWrite ctx;
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw DataError("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw DataError(path.string() + ": PNG encode failed");

    png_init_io(ctx.png, f.get());
    int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    std::vector<png_byte> row(std::size_t(img.width) * img.channels);
    for (std::uint32_t y = 0; y < img.height; ++y) {
        for (std::uint32_t i = 0; i < img.width * img.channels; ++i) {
            double v = img.values[std::size_t(y) * img.width * img.channels + i];
            v = v < 0 ? 0 : (v > 1 ? 1 : v);
            row[i] = static_cast<png_byte>(v * 255.0 + 0.5);
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
}

} // namespace gsmart::png_io
