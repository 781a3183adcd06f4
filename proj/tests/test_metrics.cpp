#include <doctest.h>

#include "gsmart/error.hpp"
#include "gsmart/metrics.hpp"
#include "gsmart/rng.hpp"

#include <cmath>
#include <limits>

using namespace gsmart;
using namespace gsmart::metrics;

namespace {

EmbeddingVector emb(std::initializer_list<double> vals) {
    EmbeddingVector v;
    v.values.resize(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v.values[i++] = x;
    return v;
}

ImageF random_image(std::uint64_t seed, std::uint32_t w, std::uint32_t h, std::uint32_t ch) {
    ImageF img;
    img.width = w;
    img.height = h;
    img.channels = ch;
    Rng rng(seed);
    img.values.resize(std::size_t(w) * h * ch);
    for (auto& v : img.values) v = rng.uniform();
    return img;
}

ImageF constant_image(double value, std::uint32_t w, std::uint32_t h, std::uint32_t ch) {
    ImageF img;
    img.width = w;
    img.height = h;
    img.channels = ch;
    img.values.assign(std::size_t(w) * h * ch, value);
    return img;
}

// reference SSIM: direct 2D Gaussian-weighted windows, no separable shortcut
double ssim_reference(const ImageF& a, const ImageF& b) {
    const int win = 11;
    const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
    const int w = int(a.width), h = int(a.height);
    std::vector<double> kern(std::size_t(win) * win);
    double ksum = 0;
    for (int y = 0; y < win; ++y)
        for (int x = 0; x < win; ++x) {
            double dx = x - 5.0, dy = y - 5.0;
            kern[std::size_t(y) * win + x] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
            ksum += kern[std::size_t(y) * win + x];
        }
    for (auto& k : kern) k /= ksum;

    double channel_total = 0;
    for (std::uint32_t c = 0; c < a.channels; ++c) {
        double total = 0;
        std::size_t windows = 0;
        for (int oy = 0; oy + win <= h; ++oy) {
            for (int ox = 0; ox + win <= w; ++ox) {
                double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
                for (int y = 0; y < win; ++y)
                    for (int x = 0; x < win; ++x) {
                        double k = kern[std::size_t(y) * win + x];
                        std::size_t idx =
                            (std::size_t(oy + y) * w + (ox + x)) * a.channels + c;
                        double va = a.values[idx], vb = b.values[idx];
                        ma += k * va;
                        mb += k * vb;
                        maa += k * va * va;
                        mbb += k * vb * vb;
                        mab += k * va * vb;
                    }
                double var_a = maa - ma * ma, var_b = mbb - mb * mb, cov = mab - ma * mb;
                total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                         ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
                ++windows;
            }
        }
        channel_total += total / double(windows);
    }
    return channel_total / a.channels;
}

} // namespace

TEST_CASE("cosine similarity") {
    CHECK(cosine(emb({1, 0, 0}), emb({1, 0, 0})) == 1.0);
    CHECK(cosine(emb({1, 0, 0}), emb({0, 1, 0})) == 0.0);
    CHECK(cosine(emb({1, 0, 0}), emb({-1, 0, 0})) == -1.0);
    CHECK(cosine(emb({1, 1, 0}), emb({1, 0, 0})) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    SUBCASE("scale invariance to within 1e-12") {
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            EmbeddingVector a, b;
            a.values.resize(64);
            b.values.resize(64);
            for (int i = 0; i < 64; ++i) {
                a.values[i] = rng.normal();
                b.values[i] = rng.normal();
            }
            double base = cosine(a, b);
            for (double s : {1e-4, 0.5, 3.0, 1e5}) {
                EmbeddingVector as;
                as.values = a.values * s;
                CHECK(std::abs(cosine(as, b) - base) < 1e-12);
            }
        }
    }

    SUBCASE("mismatched dimension and zero norm are data errors") {
        CHECK_THROWS_AS(cosine(emb({1, 0}), emb({1, 0, 0})), DataError);
        CHECK_THROWS_AS(cosine(emb({0, 0, 0}), emb({1, 0, 0})), DataError);
    }
}

TEST_CASE("semantic loss under both sign conventions") {
    LossWeights w; // lambda_dino 0.05, dissimilarity
    CHECK(dino_loss(emb({1, 0}), emb({1, 0}), w) == 0.0);
    CHECK(dino_loss(emb({1, 0}), emb({-1, 0}), w) == doctest::Approx(0.1).epsilon(1e-15));

    LossWeights lit = w;
    lit.dino_sign = DinoSign::PaperLiteral;
    CHECK(dino_loss(emb({1, 0}), emb({1, 0}), lit) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(dino_loss(emb({1, 0}), emb({0, 1}), lit) == 0.0);
    CHECK(dino_loss(emb({1, 0}), emb({-1, 0}), lit) == doctest::Approx(-0.05).epsilon(1e-15));
}

TEST_CASE("ssim identities") {
    auto img = random_image(5, 32, 24, 3);
    CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
    // symmetric in its arguments
    auto other = random_image(6, 32, 24, 3);
    CHECK(ssim(img, other) == doctest::Approx(ssim(other, img)).epsilon(1e-12));
    CHECK(ssim(img, other) < 1.0);
    CHECK(ssim(img, other) > -1.0);
}

TEST_CASE("ssim matches a direct 2D windowed reference") {
    for (std::uint32_t ch : {1u, 3u}) {
        auto a = random_image(7, 20, 16, ch);
        auto b = random_image(8, 20, 16, ch);
        CHECK(ssim(a, b) == doctest::Approx(ssim_reference(a, b)).epsilon(1e-6));
        // and on a correlated pair (b = a + mild noise)
        ImageF c = a;
        Rng rng(9);
        for (auto& v : c.values) v = std::clamp(v + 0.05 * rng.normal(), 0.0, 1.0);
        CHECK(ssim(a, c) == doctest::Approx(ssim_reference(a, c)).epsilon(1e-6));
    }
}

TEST_CASE("ssim on images smaller than the window") {
    auto a = random_image(10, 6, 6, 1);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    auto b = random_image(11, 6, 6, 1);
    double v = ssim(a, b);
    CHECK(v < 1.0);
    CHECK(v == doctest::Approx(ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("l1 and photometric loss") {
    auto black = constant_image(0.0, 16, 16, 3);
    auto half = constant_image(0.5, 16, 16, 3);
    CHECK(l1(black, black) == 0.0);
    CHECK(l1(black, half) == 0.5);

    LossWeights w; // lambda_dssim 0.2
    CHECK(l_photo(black, black, w) == 0.0);
    // constant images: SSIM has zero variance terms; compute the closed form
    double s = (2 * 0.0 * 0.5 + 1e-4) / (0.0 + 0.25 + 1e-4) * (9e-4) / (9e-4);
    CHECK(l_photo(black, half, w) ==
          doctest::Approx(0.8 * 0.5 + 0.2 * (1.0 - s)).epsilon(1e-12));

    SUBCASE("shape mismatch is a data error") {
        CHECK_THROWS_AS(l1(black, constant_image(0, 8, 16, 3)), DataError);
        CHECK_THROWS_AS(ssim(black, constant_image(0, 16, 16, 1)), DataError);
        CHECK_THROWS_AS(psnr(black, constant_image(0, 16, 8, 3)), DataError);
    }
}

TEST_CASE("total loss composes the photometric and semantic parts") {
    auto img = random_image(12, 24, 24, 3);
    LossWeights w;
    auto e1 = emb({1, 0, 0});

    // identical everything: zero under the dissimilarity convention
    CHECK(l_total(img, img, e1, e1, w) == 0.0);
    // literal-sign convention: identical embeddings contribute +lambda
    LossWeights lit = w;
    lit.dino_sign = DinoSign::PaperLiteral;
    CHECK(l_total(img, img, e1, e1, lit) == doctest::Approx(0.05).epsilon(1e-15));

    auto other = random_image(13, 24, 24, 3);
    auto e2 = emb({0, 1, 0});
    CHECK(l_total(other, img, e1, e2, w) ==
          doctest::Approx(l_photo(other, img, w) + dino_loss(e1, e2, w)).epsilon(1e-15));
}

TEST_CASE("psnr") {
    auto img = random_image(14, 16, 16, 3);
    CHECK(std::isinf(psnr(img, img)));

    // uniform offset of 0.1: MSE = 0.01, PSNR = 20 dB
    ImageF shifted = img;
    for (auto& v : shifted.values) v += 0.1;
    CHECK(psnr(img, shifted) == doctest::Approx(20.0).epsilon(1e-12));

    auto a = constant_image(0.0, 8, 8, 1);
    auto b = constant_image(0.5, 8, 8, 1);
    // MSE = 0.25 -> 10*log10(4)
    CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
}

TEST_CASE("point set distance") {
    SUBCASE("hand-computed asymmetric pair") {
        std::vector<Vec3> d = {{0, 0, 0}};
        std::vector<Vec3> s = {{1, 0, 0}, {3, 0, 0}};
        auto r = point_set_distance(d, s);
        CHECK(r.mean_d2s == 1.0);
        CHECK(r.mean_s2d == 2.0); // (1 + 3) / 2
        CHECK(r.overall == 1.5);
    }

    SUBCASE("identical sets are zero") {
        std::vector<Vec3> d = {{0, 0, 0}, {1, 2, 3}, {-1, 4, 0}};
        auto r = point_set_distance(d, d);
        CHECK(r.mean_d2s == 0.0);
        CHECK(r.mean_s2d == 0.0);
        CHECK(r.overall == 0.0);
    }

    SUBCASE("matches brute force on random clouds and is symmetric") {
        Rng rng(15);
        std::vector<Vec3> d, s;
        for (int i = 0; i < 50; ++i) d.push_back({rng.normal(), rng.normal(), rng.normal()});
        for (int i = 0; i < 70; ++i) s.push_back({rng.normal(), rng.normal(), rng.normal()});
        auto r = point_set_distance(d, s);
        auto flipped = point_set_distance(s, d);
        CHECK(r.mean_d2s == flipped.mean_s2d);
        CHECK(r.mean_s2d == flipped.mean_d2s);
        CHECK(r.overall == flipped.overall);
        CHECK(r.overall == doctest::Approx((r.mean_d2s + r.mean_s2d) / 2.0).epsilon(1e-15));

        double sum = 0;
        for (const auto& p : d) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : s) best = std::min(best, (p - q).norm());
            sum += best;
        }
        CHECK(r.mean_d2s == doctest::Approx(sum / 50.0).epsilon(1e-15));
    }

    SUBCASE("empty sets are data errors") {
        std::vector<Vec3> d = {{0, 0, 0}};
        CHECK_THROWS_AS(point_set_distance(d, {}), DataError);
        CHECK_THROWS_AS(point_set_distance({}, d), DataError);
    }
}
