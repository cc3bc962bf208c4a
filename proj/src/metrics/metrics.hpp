#pragma once

#include "core/tensor.hpp"
#include "train/features.hpp"

namespace tamp {

// 10*log10(R^2 / MSE) with R = 2 for the [-1,1] representation; capped at
// 100 dB when MSE < 1e-12.
double psnr(const Tensor& pred, const Tensor& target, double value_range = 2.0);

// Mean local structural similarity over an 11-tap Gaussian window (sigma 1.5,
// k1 = 0.01, k2 = 0.03). Inputs are mapped from [-1,1] to [0,1] internally.
double ssim(const Tensor& pred, const Tensor& target, int window = 11, double k1 = 0.01,
            double k2 = 0.03);

// Mean absolute error; shares the l1_loss contract.
double l1_metric(const Tensor& pred, const Tensor& target);

// Learned-feature distance behind a pluggable extractor: sum over levels of
// mean absolute feature differences. Zero on identical inputs.
double perceptual_distance(const Tensor& pred, const Tensor& target,
                           const FeatureExtractor& extractor);

}  // namespace tamp
