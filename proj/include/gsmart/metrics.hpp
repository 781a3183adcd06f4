#pragma once

#include "gsmart/png_io.hpp"
#include "gsmart/types.hpp"

#include <span>
#include <tuple>
#include <vector>

namespace gsmart::metrics {

using png_io::ImageF;

enum class DinoSign { PaperLiteral, Dissimilarity };

struct LossWeights {
    double lambda_dino = 0.05;
    double lambda_dssim = 0.2;
    DinoSign dino_sign = DinoSign::Dissimilarity;
};

double cosine(const EmbeddingVector& f_gt, const EmbeddingVector& f_r);
double dino_loss(const EmbeddingVector& f_gt, const EmbeddingVector& f_r, const LossWeights& w);

// single-scale SSIM: 11x11 Gaussian window, sigma 1.5, C1=0.01^2, C2=0.03^2,
// channel-averaged mean over fully-interior window positions
double ssim(const ImageF& a, const ImageF& b);

double l1(const ImageF& a, const ImageF& b);
double l_photo(const ImageF& gt, const ImageF& r, const LossWeights& w);
double l_total(const ImageF& gt, const ImageF& r, const EmbeddingVector& f_gt,
               const EmbeddingVector& f_r, const LossWeights& w);

// +infinity for identical images
double psnr(const ImageF& gt, const ImageF& r);

struct PointSetDistance {
    double mean_d2s = 0; // data-to-set (point-to-point nearest neighbor)
    double mean_s2d = 0;
    double overall = 0; // arithmetic mean of the two
};

PointSetDistance point_set_distance(std::span<const Vec3> d, std::span<const Vec3> s);

} // namespace gsmart::metrics
