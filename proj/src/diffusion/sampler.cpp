#include "diffusion/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "complement/complement.hpp"

namespace tamp {

SamplerMode sampler_mode_from_string(const std::string& s) {
    if (s == "ddnm") return SamplerMode::kDdnm;
    if (s == "ddnm-interact") return SamplerMode::kDdnmInteract;
    if (s == "indite-ddnm") return SamplerMode::kInditeDdnm;
    if (s == "indite-diff") return SamplerMode::kInditeDiff;
    throw std::invalid_argument("unknown sampler mode: " + s);
}

std::string to_string(SamplerMode m) {
    switch (m) {
        case SamplerMode::kDdnm: return "ddnm";
        case SamplerMode::kDdnmInteract: return "ddnm-interact";
        case SamplerMode::kInditeDdnm: return "indite-ddnm";
        case SamplerMode::kInditeDiff: return "indite-diff";
    }
    return "?";
}

bool mode_uses_complement(SamplerMode m) {
    return m == SamplerMode::kInditeDdnm || m == SamplerMode::kInditeDiff;
}

bool mode_uses_guidance(SamplerMode m) {
    return m == SamplerMode::kDdnmInteract || m == SamplerMode::kInditeDiff;
}

void SamplerConfig::validate() const {
    if (guidance_weight < 0.0f) throw std::invalid_argument("SamplerConfig: omega must be >= 0");
    if (lowpass_scale < 1) throw std::invalid_argument("SamplerConfig: lowpass scale must be >= 1");
    if (steps < 1) throw std::invalid_argument("SamplerConfig: steps must be >= 1");
}

Var estimate_x0(const Var& x_t, int t, const NoisePredictor& denoiser,
                const NoiseSchedule& schedule) {
    if (t < 1 || t > schedule.steps)
        throw std::invalid_argument("estimate_x0: timestep out of range");
    const double abar = schedule.alpha_bar[t];
    const float inv_sqrt_abar = static_cast<float>(1.0 / std::sqrt(abar));
    const float sqrt_one_minus = static_cast<float>(std::sqrt(1.0 - abar));
    const Var eps = denoiser.predict(x_t, t, schedule);
    check_same_shape(eps.value(), x_t.value(), "estimate_x0: denoiser output");
    const Var x0 = scale(sub(x_t, scale(eps, sqrt_one_minus)), inv_sqrt_abar);
    return clamp_op(x0, -1.0f, 1.0f);
}

Var ddnm_project(const Var& x0_estimate, const Tensor& observed, const Tensor& keep_mask) {
    check_rank3(x0_estimate.value(), "ddnm_project");
    check_same_shape(x0_estimate.value(), observed, "ddnm_project");
    validate_mask(keep_mask, "ddnm_project.keep_mask");
    if (keep_mask.height() != observed.height() || keep_mask.width() != observed.width())
        throw std::invalid_argument("ddnm_project: mask/image spatial mismatch");
    // observed*keep + estimate*(1-keep); masking is idempotent and self-adjoint,
    // so the pseudo-inverse is the mask itself.
    const Tensor observed_part = apply_confidence(observed, keep_mask);
    const Tensor hole = invert_mask(keep_mask);
    return add(mul(x0_estimate, Var(hole)), Var(observed_part));
}

Tensor ddnm_project(const Tensor& x0_estimate, const Tensor& observed, const Tensor& keep_mask) {
    return ddnm_project(Var(x0_estimate), observed, keep_mask).value();
}

PosteriorCoefficients posterior_coefficients(int t, const NoiseSchedule& schedule) {
    if (t < 1 || t > schedule.steps)
        throw std::invalid_argument("posterior_coefficients: timestep out of range");
    const double abar_t = schedule.alpha_bar[t];
    const double abar_prev = schedule.alpha_bar[t - 1];
    const double denom = 1.0 - abar_t;
    return PosteriorCoefficients{std::sqrt(abar_prev) * schedule.beta[t] / denom,
                                 std::sqrt(schedule.alpha[t]) * (1.0 - abar_prev) / denom,
                                 schedule.sigma[t]};
}

Tensor posterior_step(const Tensor& x0_hat, const Tensor& x_t, int t, const NoiseSchedule& schedule,
                      const Tensor& noise) {
    check_same_shape(x0_hat, x_t, "posterior_step");
    check_same_shape(x0_hat, noise, "posterior_step.noise");
    const PosteriorCoefficients k = posterior_coefficients(t, schedule);

    Tensor out = Tensor::zeros_like(x0_hat);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<float>(k.coef_x0 * x0_hat.data[i] + k.coef_xt * x_t.data[i] +
                                         k.sigma * noise.data[i]);
    return out;
}

Var low_pass(const Var& img, int factor) {
    if (factor == 1) return img;
    return block_replicate_upsample(block_avg_downsample(img, factor), factor);
}

Tensor low_pass(const Tensor& img, int factor) { return low_pass(Var(img), factor).value(); }

Tensor cross_reference_correct(const Tensor& x_prev, const Var& x0_hat_i, const Var& x_t_leaf,
                               const Tensor& observed_j_masked, const Tensor& keep_j, float omega,
                               int lowpass_factor, SampleTrace* trace) {
    if (omega < 0.0f) throw std::invalid_argument("cross_reference_correct: omega must be >= 0");
    check_same_shape(x0_hat_i.value(), observed_j_masked, "cross_reference_correct");
    check_same_shape(x_prev, observed_j_masked, "cross_reference_correct");
    validate_mask(keep_j, "cross_reference_correct.keep_j");

    const Var masked_est = mul(x0_hat_i, Var(keep_j));
    const Var residual = sub(Var(low_pass(observed_j_masked, lowpass_factor)),
                             low_pass(masked_est, lowpass_factor));
    if (trace) trace->mean_abs_residual = residual.value().mean_abs();

    if (omega == 0.0f) {
        if (trace) trace->guidance_grad_norm = 0.0;
        return x_prev;
    }

    const Var loss = scale(sum_all(square(residual)), 0.5f);
    backward(loss);
    if (!x_t_leaf.node()->has_grad) {
        // residual did not depend on x_t (e.g. fully observed branch)
        if (trace) trace->guidance_grad_norm = 0.0;
        return x_prev;
    }
    const Tensor& g = x_t_leaf.grad();
    if (trace) {
        double sq = 0.0;
        for (float v : g.data) sq += static_cast<double>(v) * v;
        trace->guidance_grad_norm = std::sqrt(sq);
    }
    Tensor out = x_prev;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= omega * g.data[i];
    return out;
}

namespace {

Tensor gaussian_like(const Tensor& t, Rng& rng) {
    Tensor n = Tensor::zeros_like(t);
    for (auto& v : n.data) v = rng.normalf();
    return n;
}

struct BranchState {
    Tensor x;          // current state x_t
    Var x_leaf;        // leaf Var for the in-flight step (guidance only)
    Var x0_projected;  // projected clean estimate for the in-flight step
};

}  // namespace

std::pair<Tensor, Tensor> sample_duo(const BranchInput& branch_1, const BranchInput& branch_2,
                                     const NoisePredictor& denoiser, const NoiseSchedule& schedule,
                                     const SamplerConfig& cfg, TraceSink trace) {
    cfg.validate();
    check_same_shape(branch_1.observed, branch_2.observed, "sample_duo");
    validate_mask(branch_1.keep_mask, "sample_duo.keep_1");
    validate_mask(branch_2.keep_mask, "sample_duo.keep_2");
    if (schedule.steps != cfg.steps)
        throw std::invalid_argument("sample_duo: schedule/config step mismatch");

    const bool guided = mode_uses_guidance(cfg.mode) && cfg.guidance_weight >= 0.0f;
    const BranchInput* inputs[2] = {&branch_1, &branch_2};
    Rng noise_rng[2] = {Rng(cfg.seed ^ 0x5EED0001ULL), Rng(cfg.seed ^ 0x5EED0002ULL)};

    // x_T: forward-diffuse the observed input to the terminal noise level
    const int T = schedule.steps;
    BranchState st[2];
    const double abar_T = schedule.alpha_bar[T];
    for (int b = 0; b < 2; ++b) {
        Tensor x = inputs[b]->observed;
        const Tensor eps = gaussian_like(x, noise_rng[b]);
        for (size_t i = 0; i < x.data.size(); ++i)
            x.data[i] = static_cast<float>(std::sqrt(abar_T) * x.data[i] +
                                           std::sqrt(1.0 - abar_T) * eps.data[i]);
        st[b].x = std::move(x);
    }

    for (int t = T; t >= 1; --t) {
        // advance both branches before either correction so each cross-reference
        // reads the counterpart's estimate from this timestep
        Tensor x_prev[2];
        for (int b = 0; b < 2; ++b) {
            const bool needs_graph = guided && cfg.guidance_weight > 0.0f && t > 1;
            st[b].x_leaf = Var(st[b].x, needs_graph);
            const Var x0 = estimate_x0(st[b].x_leaf, t, denoiser, schedule);
            st[b].x0_projected = ddnm_project(x0, inputs[b]->observed, inputs[b]->keep_mask);
            const Tensor noise = t > 1 ? gaussian_like(st[b].x, noise_rng[b])
                                       : Tensor::zeros_like(st[b].x);
            x_prev[b] = posterior_step(st[b].x0_projected.value(), st[b].x, t, schedule, noise);
        }

        if (guided && t > 1) {
            for (int b = 0; b < 2; ++b) {
                if (b == 1 && !cfg.guide_both_branches) break;
                const int other = 1 - b;
                const Tensor obs_j = inputs[other]->observed;
                const Tensor& keep_j = inputs[other]->keep_mask;
                SampleTrace tr;
                tr.t = t;
                tr.branch = b + 1;
                x_prev[b] = cross_reference_correct(x_prev[b], st[b].x0_projected, st[b].x_leaf,
                                                    obs_j, keep_j, cfg.guidance_weight,
                                                    cfg.lowpass_scale, trace ? &tr : nullptr);
                if (trace) trace(tr);
            }
        }

        for (int b = 0; b < 2; ++b) {
            if (!x_prev[b].all_finite())
                throw std::runtime_error("sample_duo: non-finite state at t=" + std::to_string(t) +
                                         " branch " + std::to_string(b + 1));
            st[b].x = std::move(x_prev[b]);
            st[b].x_leaf = Var();
            st[b].x0_projected = Var();
        }
    }

    for (int b = 0; b < 2; ++b)
        for (auto& v : st[b].x.data) v = std::min(1.0f, std::max(-1.0f, v));
    return {std::move(st[0].x), std::move(st[1].x)};
}

}  // namespace tamp
