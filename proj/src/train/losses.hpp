#pragma once

#include "train/discriminator.hpp"
#include "train/features.hpp"

namespace tamp {

struct LossWeights {
    float l1 = 1.0f;
    float gan = 0.1f;
    float perceptual = 0.1f;
    float style = 250.0f;

    void validate() const;
};

// mean absolute error
Var l1_loss(const Var& pred, const Var& target);

// Hinge adversarial pair. gen_loss pulls the critic score of pred up;
// disc_loss separates target (real) from a detached copy of pred (fake).
struct AdversarialLosses {
    Var gen_loss;
    Var disc_loss;
};
AdversarialLosses adversarial_losses(const Var& pred, const Var& target,
                                     const PatchDiscriminator& disc);

// sum over levels of mean absolute feature differences
Var perceptual_loss(const Var& pred, const Var& target, const FeatureExtractor& extractor);

// sum over levels of mean absolute Gram-matrix differences
Var style_loss(const Var& pred, const Var& target, const FeatureExtractor& extractor);

// Term-by-term view of the four-term objective; terms with zero weight are
// skipped and left undefined. total() is the weighted sum.
struct LossBreakdown {
    Var l1, gan, perceptual, style;
    Var total(const LossWeights& w) const;
    double term_value(const Var& term) const { return term.defined() ? term.value().data[0] : 0.0; }
};
LossBreakdown complement_loss_terms(const Var& pred, const Var& target, const LossWeights& w,
                                    const PatchDiscriminator& disc,
                                    const FeatureExtractor& extractor);

// weighted four-term objective for the complement head
Var complement_loss(const Var& pred, const Var& target, const LossWeights& w,
                    const PatchDiscriminator& disc, const FeatureExtractor& extractor);

// Trust target for the confidence head: 1 - clamp(mean_c|gt - comp| / rho, 0, 1).
// Small residual -> high confidence. rho defaults to half the value range.
Tensor confidence_target(const Tensor& gt, const Tensor& complemented, float rho = 1.0f);

// Same four-term structure on single-channel maps; maps are replicated to
// three channels for the extractor and critic.
Var confidence_loss(const Var& confidence_pred, const Tensor& target, const LossWeights& w,
                    const PatchDiscriminator& disc, const FeatureExtractor& extractor);

// critic objective for a single-channel pair (replicated), used by the trainer
Var confidence_disc_loss(const Tensor& confidence_pred, const Tensor& target,
                         const PatchDiscriminator& disc);

}  // namespace tamp
