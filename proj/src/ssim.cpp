#include <cmath>
#include <vector>

#include "forge/error.hpp"
#include "forge/metrics.hpp"

namespace forge {

const std::array<double, kSsimWindow>& ssim_weights() noexcept {
    static const std::array<double, kSsimWindow> w = [] {
        std::array<double, kSsimWindow> g{};
        double sum = 0;
        for (int i = 0; i < kSsimWindow; ++i) {
            const double d = i - kSsimWindow / 2;
            g[i] = std::exp(-d * d / (2 * 1.5 * 1.5));
            sum += g[i];
        }
        for (double& v : g) v /= sum;
        return g;
    }();
    return w;
}

namespace {

constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
constexpr double kC2 = (0.03 * 255) * (0.03 * 255);

// Written so that swapping a and b, or passing a == b, gives bit-identical
// numerator and denominator.
inline double local_ssim(double mu_a, double mu_b, double e_aa, double e_bb, double e_ab) noexcept {
    const double mu_ab = mu_a * mu_b;
    const double mu_aa = mu_a * mu_a;
    const double mu_bb = mu_b * mu_b;
    const double s_aa = e_aa - mu_aa;
    const double s_bb = e_bb - mu_bb;
    const double s_ab = e_ab - mu_ab;
    return ((2.0 * mu_ab + kC1) * (2.0 * s_ab + kC2)) / ((mu_aa + mu_bb + kC1) * (s_aa + s_bb + kC2));
}

void check(const Image& a, const Image& b, const RoiRect& roi) {
    if (a.width != b.width || a.height != b.height) throw MetricError("ssim: image sizes differ");
    if (roi.x0 < 0 || roi.y0 < 0 || roi.x1 > a.width || roi.y1 > a.height)
        throw MetricError("ssim: region of interest exceeds the image");
    if (roi.width() < kSsimWindow || roi.height() < kSsimWindow)
        throw MetricError("ssim: region of interest " + std::to_string(roi.width()) + "x" +
                          std::to_string(roi.height()) + " is smaller than the 11x11 window");
}

}  // namespace

// Separable filtering of the five moment images, parallel over rows. Row
// sums are reduced in row order afterwards so the thread count cannot
// change the result.
double ssim(const Image& a, const Image& b, const RoiRect& roi) {
    check(a, b, roi);
    const auto& w = ssim_weights();
    const int rw = roi.width(), rh = roi.height();
    const int ow = rw - kSsimWindow + 1, oh = rh - kSsimWindow + 1;
    double channel_total = 0;
    for (int c = 0; c < 3; ++c) {
        // Horizontal pass: 5 moments per (row, output column).
        std::vector<double> h(static_cast<std::size_t>(rh) * ow * 5);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < rh; ++y) {
            const std::uint8_t* pa = a.at(roi.x0, roi.y0 + y);
            const std::uint8_t* pb = b.at(roi.x0, roi.y0 + y);
            for (int x = 0; x < ow; ++x) {
                double m[5] = {0, 0, 0, 0, 0};
                for (int i = 0; i < kSsimWindow; ++i) {
                    const double va = pa[(x + i) * 3 + c], vb = pb[(x + i) * 3 + c];
                    m[0] += w[i] * va;
                    m[1] += w[i] * vb;
                    m[2] += w[i] * (va * va);
                    m[3] += w[i] * (vb * vb);
                    m[4] += w[i] * (va * vb);
                }
                double* out = &h[(static_cast<std::size_t>(y) * ow + x) * 5];
                for (int k = 0; k < 5; ++k) out[k] = m[k];
            }
        }
        std::vector<double> row_sum(static_cast<std::size_t>(oh), 0.0);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < oh; ++y) {
            double s = 0;
            for (int x = 0; x < ow; ++x) {
                double m[5] = {0, 0, 0, 0, 0};
                for (int j = 0; j < kSsimWindow; ++j) {
                    const double* in = &h[(static_cast<std::size_t>(y + j) * ow + x) * 5];
                    for (int k = 0; k < 5; ++k) m[k] += w[j] * in[k];
                }
                s += local_ssim(m[0], m[1], m[2], m[3], m[4]);
            }
            row_sum[static_cast<std::size_t>(y)] = s;
        }
        double total = 0;
        for (double s : row_sum) total += s;
        channel_total += total / (static_cast<double>(ow) * oh);
    }
    return channel_total / 3.0;
}

double ssim(const Image& a, const Image& b) { return ssim(a, b, RoiRect::full(a.width, a.height)); }

namespace reference {

double ssim(const Image& a, const Image& b, const RoiRect& roi) {
    check(a, b, roi);
    const auto& w = ssim_weights();
    const int ow = roi.width() - kSsimWindow + 1, oh = roi.height() - kSsimWindow + 1;
    double channel_total = 0;
    for (int c = 0; c < 3; ++c) {
        double total = 0;
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double mu_a = 0, mu_b = 0, e_aa = 0, e_bb = 0, e_ab = 0;
                for (int j = 0; j < kSsimWindow; ++j)
                    for (int i = 0; i < kSsimWindow; ++i) {
                        const double wt = w[i] * w[j];
                        const double va = a.at(roi.x0 + ox + i, roi.y0 + oy + j)[c];
                        const double vb = b.at(roi.x0 + ox + i, roi.y0 + oy + j)[c];
                        mu_a += wt * va;
                        mu_b += wt * vb;
                        e_aa += wt * va * va;
                        e_bb += wt * vb * vb;
                        e_ab += wt * va * vb;
                    }
                total += local_ssim(mu_a, mu_b, e_aa, e_bb, e_ab);
            }
        channel_total += total / (static_cast<double>(ow) * oh);
    }
    return channel_total / 3.0;
}

}  // namespace reference

}  // namespace forge
