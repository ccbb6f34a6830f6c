#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "forge/error.hpp"
#include "forge/image.hpp"

namespace forge {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open " + path.string());
    return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
    auto* what = static_cast<std::string*>(png_get_error_ptr(png));
    if (what) *what = msg;
    png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

// rows: height pointers to packed big-endian sample rows.
void write_rows(const std::filesystem::path& path, int width, int height, int bit_depth, int color_type,
                const std::vector<png_bytep>& rows) {
    auto file = open_file(path, "wb");
    std::string error;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
    if (!png) throw IoError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write failed for " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

struct Decoded {
    int width = 0, height = 0, channels = 0, bit_depth = 0;
    std::vector<png_byte> data;
};

Decoded read_any(const std::filesystem::path& path, bool keep_16) {
    auto file = open_file(path, "rb");
    std::string error;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
    if (!png) throw IoError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    Decoded out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png read failed for " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (!keep_16 && depth == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const auto stride = png_get_rowbytes(png, info);
    out.data.resize(stride * out.height);
    std::vector<png_bytep> rows(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image& image) {
    if (image.empty()) throw IoError("refusing to write an empty image to " + path.string());
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) rows[y] = const_cast<png_bytep>(image.at(0, y));
    write_rows(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

void write_png(const std::filesystem::path& path, const SegmentationMask& mask) {
    if (mask.labels.empty()) throw IoError("refusing to write an empty mask to " + path.string());
    std::vector<png_byte> packed(mask.labels.size() * 2);
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        packed[2 * i] = static_cast<png_byte>(mask.labels[i] >> 8);
        packed[2 * i + 1] = static_cast<png_byte>(mask.labels[i] & 0xff);
    }
    std::vector<png_bytep> rows(mask.height);
    for (int y = 0; y < mask.height; ++y) rows[y] = packed.data() + static_cast<std::size_t>(y) * mask.width * 2;
    write_rows(path, mask.width, mask.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

Image read_png_rgb(const std::filesystem::path& path) {
    const auto d = read_any(path, false);
    Image img(d.width, d.height);
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            const png_byte* src = d.data.data() + (static_cast<std::size_t>(y) * d.width + x) * d.channels;
            std::uint8_t* dst = img.at(x, y);
            if (d.channels >= 3) {
                dst[0] = src[0], dst[1] = src[1], dst[2] = src[2];
            } else {
                dst[0] = dst[1] = dst[2] = src[0];
            }
        }
    }
    return img;
}

SegmentationMask read_png_mask(const std::filesystem::path& path) {
    const auto d = read_any(path, true);
    if (d.channels != 1) throw IoError(path.string() + " is not a single-channel mask");
    SegmentationMask mask(d.width, d.height);
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        mask.labels[i] = d.bit_depth == 16
                             ? static_cast<std::uint16_t>((d.data[2 * i] << 8) | d.data[2 * i + 1])
                             : static_cast<std::uint16_t>(d.data[i]);
    }
    return mask;
}

}  // namespace forge
