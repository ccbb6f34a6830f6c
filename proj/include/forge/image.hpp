#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace forge {

/// 8-bit RGB raster, row 0 at the top.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) noexcept { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* at(int x, int y) const noexcept {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    bool empty() const noexcept { return pixels.empty(); }
    friend bool operator==(const Image&, const Image&) = default;
};

/// Per-pixel label image, row 0 at the top.
/// 0 = background, 1 = ground plane, >= 2 = object instance id.
struct SegmentationMask {
    static constexpr std::uint16_t kBackground = 0;
    static constexpr std::uint16_t kPlane = 1;

    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> labels;

    SegmentationMask() = default;
    SegmentationMask(int w, int h) : width(w), height(h), labels(static_cast<std::size_t>(w) * h, 0) {}

    std::uint16_t at(int x, int y) const noexcept { return labels[static_cast<std::size_t>(y) * width + x]; }
    friend bool operator==(const SegmentationMask&, const SegmentationMask&) = default;
};

/// PNG encoding is deterministic: fixed compression settings, no
/// timestamps or text chunks. All functions throw IoError.
void write_png(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const SegmentationMask& mask);  // 16-bit gray
Image read_png_rgb(const std::filesystem::path& path);
SegmentationMask read_png_mask(const std::filesystem::path& path);

}  // namespace forge
