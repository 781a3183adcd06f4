#include "gsmart/metrics.hpp"
#include "gsmart/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsmart::metrics {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_same_shape(const ImageF& a, const ImageF& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw DataError("image dimension mismatch: " + std::to_string(a.width) + "x" +
                        std::to_string(a.height) + "x" + std::to_string(a.channels) + " vs " +
                        std::to_string(b.width) + "x" + std::to_string(b.height) + "x" +
                        std::to_string(b.channels));
}

std::vector<double> gaussian_kernel() {
    std::vector<double> k(kWindow);
    double sum = 0;
    for (int i = 0; i < kWindow; ++i) {
        double x = i - (kWindow - 1) / 2.0;
        k[i] = std::exp(-x * x / (2.0 * kWindowSigma * kWindowSigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// separable Gaussian filter, valid region only; out is (h-10) x (w-10)
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& kernel) {
    const int ow = w - kWindow + 1, oh = h - kWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < kWindow; ++i) s += kernel[i] * img[std::size_t(y) * w + x + i];
            tmp[std::size_t(y) * ow + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < kWindow; ++i) s += kernel[i] * tmp[std::size_t(y + i) * ow + x];
            out[std::size_t(y) * ow + x] = s;
        }
    }
    return out;
}

double ssim_channel(const std::vector<double>& a, const std::vector<double>& b, int w, int h) {
    if (w < kWindow || h < kWindow) {
        // image smaller than the window: single uniform-weight window
        double ma = 0, mb = 0;
        const auto n = static_cast<double>(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= n;
        mb /= n;
        double va = 0, vb = 0, cab = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            va += (a[i] - ma) * (a[i] - ma);
            vb += (b[i] - mb) * (b[i] - mb);
            cab += (a[i] - ma) * (b[i] - mb);
        }
        va /= n;
        vb /= n;
        cab /= n;
        return ((2 * ma * mb + kC1) * (2 * cab + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }

    auto kernel = gaussian_kernel();
    std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    auto mu_a = filter_valid(a, w, h, kernel);
    auto mu_b = filter_valid(b, w, h, kernel);
    auto m_aa = filter_valid(aa, w, h, kernel);
    auto m_bb = filter_valid(bb, w, h, kernel);
    auto m_ab = filter_valid(ab, w, h, kernel);

    double total = 0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        double va = m_aa[i] - mu_a[i] * mu_a[i];
        double vb = m_bb[i] - mu_b[i] * mu_b[i];
        double cab = m_ab[i] - mu_a[i] * mu_b[i];
        total += ((2 * mu_a[i] * mu_b[i] + kC1) * (2 * cab + kC2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (va + vb + kC2));
    }
    return total / static_cast<double>(mu_a.size());
}

} // namespace

double cosine(const EmbeddingVector& f_gt, const EmbeddingVector& f_r) {
    if (f_gt.dim() != f_r.dim())
        throw DataError("cosine: dimension mismatch " + std::to_string(f_gt.dim()) + " vs " +
                        std::to_string(f_r.dim()));
    double na = f_gt.values.norm(), nb = f_r.values.norm();
    if (na <= 1e-12 || nb <= 1e-12) throw DataError("cosine: zero-norm embedding");
    return std::clamp(f_gt.values.dot(f_r.values) / (na * nb), -1.0, 1.0);
}

double dino_loss(const EmbeddingVector& f_gt, const EmbeddingVector& f_r, const LossWeights& w) {
    double c = cosine(f_gt, f_r);
    return w.dino_sign == DinoSign::PaperLiteral ? w.lambda_dino * c : w.lambda_dino * (1.0 - c);
}

double ssim(const ImageF& a, const ImageF& b) {
    check_same_shape(a, b);
    const int w = static_cast<int>(a.width), h = static_cast<int>(a.height);
    const std::size_t plane = std::size_t(w) * h;
    double total = 0;
    for (std::uint32_t c = 0; c < a.channels; ++c) {
        std::vector<double> pa(plane), pb(plane);
        for (std::size_t i = 0; i < plane; ++i) {
            pa[i] = a.values[i * a.channels + c];
            pb[i] = b.values[i * a.channels + c];
        }
        total += ssim_channel(pa, pb, w, h);
    }
    return total / a.channels;
}

double l1(const ImageF& a, const ImageF& b) {
    check_same_shape(a, b);
    double s = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
    return s / static_cast<double>(a.values.size());
}

double l_photo(const ImageF& gt, const ImageF& r, const LossWeights& w) {
    return (1.0 - w.lambda_dssim) * l1(gt, r) + w.lambda_dssim * (1.0 - ssim(gt, r));
}

double l_total(const ImageF& gt, const ImageF& r, const EmbeddingVector& f_gt,
               const EmbeddingVector& f_r, const LossWeights& w) {
    return l_photo(gt, r, w) + dino_loss(f_gt, f_r, w);
}

double psnr(const ImageF& gt, const ImageF& r) {
    check_same_shape(gt, r);
    double mse = 0;
    for (std::size_t i = 0; i < gt.values.size(); ++i) {
        double d = gt.values[i] - r.values[i];
        mse += d * d;
    }
    mse /= static_cast<double>(gt.values.size());
    if (mse <= 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

PointSetDistance point_set_distance(std::span<const Vec3> d, std::span<const Vec3> s) {
    if (d.empty() || s.empty()) throw DataError("point_set_distance: empty point set");
    auto one_way = [](std::span<const Vec3> from, std::span<const Vec3> to) {
        double sum = 0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
            sum += std::sqrt(best);
        }
        return sum / static_cast<double>(from.size());
    };
    PointSetDistance out;
    out.mean_d2s = one_way(d, s);
    out.mean_s2d = one_way(s, d);
    out.overall = (out.mean_d2s + out.mean_s2d) / 2.0;
    return out;
}

} // namespace gsmart::metrics
