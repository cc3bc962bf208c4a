#include "train/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tamp {

namespace {
Var hinge_relu_mean(const Var& x) { return mean_all(relu(x)); }
}  // namespace

void LossWeights::validate() const {
    if (l1 < 0.0f || gan < 0.0f || perceptual < 0.0f || style < 0.0f)
        throw std::invalid_argument("LossWeights: weights must be nonnegative");
}

Var l1_loss(const Var& pred, const Var& target) {
    check_same_shape(pred.value(), target.value(), "l1_loss");
    return mean_all(abs_op(sub(pred, target)));
}

AdversarialLosses adversarial_losses(const Var& pred, const Var& target,
                                     const PatchDiscriminator& disc) {
    check_same_shape(pred.value(), target.value(), "adversarial_losses");
    AdversarialLosses out;
    out.gen_loss = scale(mean_all(disc.score(pred)), -1.0f);
    const Var real_score = disc.score(target);
    const Var fake_score = disc.score(detach(pred));
    out.disc_loss = add(hinge_relu_mean(add_scalar(scale(real_score, -1.0f), 1.0f)),
                        hinge_relu_mean(add_scalar(fake_score, 1.0f)));
    return out;
}

Var perceptual_loss(const Var& pred, const Var& target, const FeatureExtractor& extractor) {
    check_same_shape(pred.value(), target.value(), "perceptual_loss");
    const auto fp = extractor.features(pred);
    const auto ft = extractor.features(target);
    Var total;
    for (size_t l = 0; l < fp.size(); ++l) {
        const Var term = mean_all(abs_op(sub(fp[l], ft[l])));
        total = total.defined() ? add(total, term) : term;
    }
    return total;
}

Var style_loss(const Var& pred, const Var& target, const FeatureExtractor& extractor) {
    check_same_shape(pred.value(), target.value(), "style_loss");
    const auto fp = extractor.features(pred);
    const auto ft = extractor.features(target);
    Var total;
    for (size_t l = 0; l < fp.size(); ++l) {
        const Var term = mean_all(abs_op(sub(gram_matrix(fp[l]), gram_matrix(ft[l]))));
        total = total.defined() ? add(total, term) : term;
    }
    return total;
}

Var LossBreakdown::total(const LossWeights& w) const {
    Var out = scale(l1, w.l1);
    if (gan.defined()) out = add(out, scale(gan, w.gan));
    if (perceptual.defined()) out = add(out, scale(perceptual, w.perceptual));
    if (style.defined()) out = add(out, scale(style, w.style));
    return out;
}

LossBreakdown complement_loss_terms(const Var& pred, const Var& target, const LossWeights& w,
                                    const PatchDiscriminator& disc,
                                    const FeatureExtractor& extractor) {
    w.validate();
    LossBreakdown b;
    b.l1 = l1_loss(pred, target);
    if (w.gan > 0.0f) b.gan = adversarial_losses(pred, target, disc).gen_loss;
    if (w.perceptual > 0.0f) b.perceptual = perceptual_loss(pred, target, extractor);
    if (w.style > 0.0f) b.style = style_loss(pred, target, extractor);
    return b;
}

Var complement_loss(const Var& pred, const Var& target, const LossWeights& w,
                    const PatchDiscriminator& disc, const FeatureExtractor& extractor) {
    return complement_loss_terms(pred, target, w, disc, extractor).total(w);
}

Tensor confidence_target(const Tensor& gt, const Tensor& complemented, float rho) {
    check_same_shape(gt, complemented, "confidence_target");
    check_rank3(gt, "confidence_target");
    if (rho <= 0.0f) throw std::invalid_argument("confidence_target: rho must be positive");
    const int ch = gt.channels();
    const int hw = gt.height() * gt.width();
    Tensor out({1, gt.height(), gt.width()});
    for (int i = 0; i < hw; ++i) {
        double resid = 0.0;
        for (int c = 0; c < ch; ++c)
            resid += std::fabs(gt.data[c * hw + i] - complemented.data[c * hw + i]);
        resid /= ch;
        out.data[i] = 1.0f - std::min(1.0f, std::max(0.0f, static_cast<float>(resid / rho)));
    }
    return out;
}

Var confidence_loss(const Var& confidence_pred, const Tensor& target, const LossWeights& w,
                    const PatchDiscriminator& disc, const FeatureExtractor& extractor) {
    check_same_shape(confidence_pred.value(), target, "confidence_loss");
    const Var pred3 = repeat_channels(confidence_pred, 3);
    const Var target3 = repeat_channels(Var(target), 3);
    return complement_loss(pred3, target3, w, disc, extractor);
}

Var confidence_disc_loss(const Tensor& confidence_pred, const Tensor& target,
                         const PatchDiscriminator& disc) {
    check_same_shape(confidence_pred, target, "confidence_disc_loss");
    const Var pred3 = repeat_channels(Var(confidence_pred), 3);
    const Var target3 = repeat_channels(Var(target), 3);
    return adversarial_losses(pred3, target3, disc).disc_loss;
}

}  // namespace tamp
