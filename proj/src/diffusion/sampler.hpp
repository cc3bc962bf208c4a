#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "core/rng.hpp"
#include "diffusion/denoiser.hpp"
#include "diffusion/schedule.hpp"

namespace tamp {

enum class SamplerMode {
    kDdnm,          // projection with raw damaged images/masks, no cross-reference
    kDdnmInteract,  // + low-pass cross-reference against the counterpart's raw observation
    kInditeDdnm,    // projection on complemented observations, no cross-reference
    kInditeDiff,    // complemented observations + cross-reference
};

SamplerMode sampler_mode_from_string(const std::string& s);
std::string to_string(SamplerMode m);
bool mode_uses_complement(SamplerMode m);
bool mode_uses_guidance(SamplerMode m);

struct SamplerConfig {
    SamplerMode mode = SamplerMode::kInditeDiff;
    float guidance_weight = 0.5f;  // omega
    int lowpass_scale = 4;         // D
    int steps = 100;
    uint64_t seed = 0;
    bool guide_both_branches = true;

    void validate() const;
};

// Per-step trace record (see sample_duo's trace sink).
struct SampleTrace {
    int t = 0;
    int branch = 0;
    double mean_abs_residual = 0.0;
    double guidance_grad_norm = 0.0;
};
using TraceSink = std::function<void(const SampleTrace&)>;

// x_{0|t} = (x_t - sqrt(1-abar_t) * eps_hat) / sqrt(abar_t), clamped to [-1,1].
Var estimate_x0(const Var& x_t, int t, const NoisePredictor& denoiser,
                const NoiseSchedule& schedule);

// Range/null-space split for elementwise masking: keep observed values where
// the keep mask is 1, the estimate elsewhere. observed must already be masked.
Var ddnm_project(const Var& x0_estimate, const Tensor& observed, const Tensor& keep_mask);
Tensor ddnm_project(const Tensor& x0_estimate, const Tensor& observed, const Tensor& keep_mask);

// Reverse-transition coefficients, kept in double so the closed-form identities
// hold to 1e-10: x_{t-1} = coef_x0 * x0_hat + coef_xt * x_t + sigma * noise.
struct PosteriorCoefficients {
    double coef_x0, coef_xt, sigma;
};
PosteriorCoefficients posterior_coefficients(int t, const NoiseSchedule& schedule);

// Reverse-transition mean plus sigma_t * noise. Pass a zero tensor as noise for
// the deterministic variant.
Tensor posterior_step(const Tensor& x0_hat, const Tensor& x_t, int t, const NoiseSchedule& schedule,
                      const Tensor& noise);

// Block-average downsample by factor, then block-replicate back up: keeps block
// means exactly, is idempotent, and has a trivial adjoint for the guidance
// gradient.
Var low_pass(const Var& img, int factor);
Tensor low_pass(const Tensor& img, int factor);

// One guidance correction: subtracts omega * d/dx_t of ||phi_D(observed_j) -
// phi_D(x0_hat_i * keep_j)||^2 / 2. x0_hat_i must be graph-connected to the
// x_t_leaf. Returns the corrected x_{t-1}; trace reports the residual size and
// gradient norm.
Tensor cross_reference_correct(const Tensor& x_prev, const Var& x0_hat_i, const Var& x_t_leaf,
                               const Tensor& observed_j_masked, const Tensor& keep_j, float omega,
                               int lowpass_factor, SampleTrace* trace = nullptr);

struct BranchInput {
    Tensor observed;   // already masked: values outside keep are zero
    Tensor keep_mask;  // (1,H,W) binary
};

// Full two-branch sampling loop. Both branches advance one timestep per
// iteration; the cross-reference for each branch reads the counterpart's
// current clean-image estimate. The correction is skipped at t=1 so the final
// projection lands unmodified.
std::pair<Tensor, Tensor> sample_duo(const BranchInput& branch_1, const BranchInput& branch_2,
                                     const NoisePredictor& denoiser, const NoiseSchedule& schedule,
                                     const SamplerConfig& cfg, TraceSink trace = nullptr);

}  // namespace tamp
