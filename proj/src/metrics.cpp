#include "forge/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "forge/error.hpp"

namespace forge {

RoiRect roi_from_masks(const SegmentationMask& source, const SegmentationMask& target, std::uint16_t instance_id,
                       int padding_px) {
    if (source.width != target.width || source.height != target.height)
        throw MetricError("roi_from_masks: mask sizes differ");
    if (padding_px < 0) throw MetricError("roi_from_masks: negative padding");
    int x0 = source.width, y0 = source.height, x1 = -1, y1 = -1;
    for (const SegmentationMask* m : {&source, &target})
        for (int y = 0; y < m->height; ++y)
            for (int x = 0; x < m->width; ++x)
                if (m->at(x, y) == instance_id) {
                    x0 = std::min(x0, x);
                    y0 = std::min(y0, y);
                    x1 = std::max(x1, x);
                    y1 = std::max(y1, y);
                }
    if (x1 < 0) throw MetricError("roi_from_masks: instance " + std::to_string(instance_id) + " is in neither mask");
    // Widen before clamping so huge paddings cannot overflow.
    const long pad = padding_px;
    return {static_cast<int>(std::max<long>(0, x0 - pad)), static_cast<int>(std::max<long>(0, y0 - pad)),
            static_cast<int>(std::min<long>(source.width, x1 + 1L + pad)),
            static_cast<int>(std::min<long>(source.height, y1 + 1L + pad))};
}

RoiRect grow_to_min(RoiRect r, int min_side, int width, int height) noexcept {
    auto grow = [](int& lo, int& hi, int limit, int side) {
        while (hi - lo < side && (lo > 0 || hi < limit)) {
            if (lo > 0) --lo;
            if (hi - lo < side && hi < limit) ++hi;
        }
    };
    grow(r.x0, r.x1, width, min_side);
    grow(r.y0, r.y1, height, min_side);
    return r;
}

namespace {

void check_pair(const Image& a, const Image& b, const RoiRect& roi, const char* who) {
    if (a.width != b.width || a.height != b.height)
        throw MetricError(std::string(who) + ": image sizes differ (" + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                          std::to_string(b.height) + ")");
    if (roi.empty()) throw MetricError(std::string(who) + ": empty region of interest");
    if (roi.x0 < 0 || roi.y0 < 0 || roi.x1 > a.width || roi.y1 > a.height)
        throw MetricError(std::string(who) + ": region of interest exceeds the image");
}

double psnr_from_sse(double sse, double count) {
    if (sse == 0) return kPsnrCap;
    const double mse = sse / count;
    return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

}  // namespace

double psnr(const Image& a, const Image& b, const RoiRect& roi) {
    check_pair(a, b, roi, "psnr");
    // Integer accumulation is exact and order independent.
    std::uint64_t sse = 0;
    for (int y = roi.y0; y < roi.y1; ++y) {
        const std::uint8_t* pa = a.at(roi.x0, y);
        const std::uint8_t* pb = b.at(roi.x0, y);
        for (int i = 0; i < roi.width() * 3; ++i) {
            const int d = static_cast<int>(pa[i]) - static_cast<int>(pb[i]);
            sse += static_cast<std::uint64_t>(d * d);
        }
    }
    return psnr_from_sse(static_cast<double>(sse), 3.0 * roi.width() * roi.height());
}

double psnr(const Image& a, const Image& b) { return psnr(a, b, RoiRect::full(a.width, a.height)); }

namespace reference {

double psnr(const Image& a, const Image& b, const RoiRect& roi) {
    check_pair(a, b, roi, "psnr");
    double sse = 0;
    for (int y = roi.y0; y < roi.y1; ++y)
        for (int x = roi.x0; x < roi.x1; ++x)
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(a.at(x, y)[c]) - b.at(x, y)[c];
                sse += d * d;
            }
    return psnr_from_sse(sse, 3.0 * roi.width() * roi.height());
}

}  // namespace reference

std::string_view to_string(Selector s) noexcept { return s == Selector::Ssim ? "ssim" : "psnr"; }

std::optional<Selector> selector_from_string(std::string_view name) noexcept {
    if (name == "ssim") return Selector::Ssim;
    if (name == "psnr") return Selector::Psnr;
    return std::nullopt;
}

std::size_t select_best(std::span<const CandidateScore> scores, Selector selector) {
    if (scores.empty()) throw MetricError("best_of_k: no candidates");
    std::size_t best = 0;
    auto value = [selector](const CandidateScore& s) { return selector == Selector::Ssim ? s.ssim : s.psnr; };
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (value(scores[i]) > value(scores[best])) best = i;
    return best;
}

BestOfK best_of_k(std::span<const Image> candidates, const Image& ground_truth, const RoiRect& roi,
                  Selector selector) {
    if (candidates.empty()) throw MetricError("best_of_k: no candidates");
    BestOfK out;
    for (const Image& c : candidates) out.scores.push_back({psnr(c, ground_truth, roi), ssim(c, ground_truth, roi)});
    out.index = select_best(out.scores, selector);
    return out;
}

}  // namespace forge
