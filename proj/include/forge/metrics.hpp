#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/image.hpp"

namespace forge {

/// Pixel rectangle [x0, x1) x [y0, y1).
struct RoiRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const noexcept { return x1 - x0; }
    int height() const noexcept { return y1 - y0; }
    bool empty() const noexcept { return width() <= 0 || height() <= 0; }
    friend constexpr bool operator==(const RoiRect&, const RoiRect&) = default;

    static RoiRect full(int w, int h) noexcept { return {0, 0, w, h}; }
};

/// Bounding rectangle of the union of `instance_id` pixels in both masks,
/// grown by `padding_px` and clamped to the image. Throws MetricError when
/// the masks differ in size or neither contains the id.
RoiRect roi_from_masks(const SegmentationMask& source, const SegmentationMask& target, std::uint16_t instance_id,
                       int padding_px = 8);

/// Grows a rectangle symmetrically (then clamped) until both sides are at
/// least `min_side`, as far as the image allows.
RoiRect grow_to_min(RoiRect roi, int min_side, int width, int height) noexcept;

inline constexpr double kPsnrCap = 99.0;
inline constexpr int kSsimWindow = 11;

/// 10 log10(255^2 / MSE) over the ROI, MSE averaged over pixels and
/// channels, capped at kPsnrCap (also returned for MSE = 0).
/// Throws MetricError on size mismatch or an empty/out-of-bounds ROI.
double psnr(const Image& a, const Image& b, const RoiRect& roi);
double psnr(const Image& a, const Image& b);

/// Mean local SSIM over every 11x11 window that fits inside the ROI,
/// Gaussian weights (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255, averaged
/// over channels. Throws MetricError when the ROI is smaller than 11x11.
double ssim(const Image& a, const Image& b, const RoiRect& roi);
double ssim(const Image& a, const Image& b);

/// Normalized 1-D Gaussian weights of the SSIM window.
const std::array<double, kSsimWindow>& ssim_weights() noexcept;

namespace reference {

// Direct 2-D windowed sums, one window at a time, single-threaded.
double ssim(const Image& a, const Image& b, const RoiRect& roi);
double psnr(const Image& a, const Image& b, const RoiRect& roi);

}  // namespace reference

enum class Selector { Ssim, Psnr };

std::string_view to_string(Selector s) noexcept;
std::optional<Selector> selector_from_string(std::string_view name) noexcept;

struct CandidateScore {
    double psnr = 0;
    double ssim = 0;

    friend bool operator==(const CandidateScore&, const CandidateScore&) = default;
};

struct BestOfK {
    std::size_t index = 0;
    std::vector<CandidateScore> scores;

    const CandidateScore& best() const { return scores.at(index); }
};

/// Scores every candidate and picks the argmax of the selector metric;
/// ties go to the lowest index. Throws MetricError on an empty list.
BestOfK best_of_k(std::span<const Image> candidates, const Image& ground_truth, const RoiRect& roi,
                  Selector selector);

/// Argmax with lowest-index tie-break over precomputed scores.
std::size_t select_best(std::span<const CandidateScore> scores, Selector selector);

}  // namespace forge
