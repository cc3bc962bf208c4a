#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "core/nn.hpp"
#include "diffusion/schedule.hpp"

namespace tamp {

// Noise estimator interface for the reverse process. Implementations return an
// autograd Var so the sampler's cross-reference correction can differentiate
// through the estimate.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual Var predict(const Var& x_t, int t, const NoiseSchedule& schedule) const = 0;
};

// Test denoiser: returns a fixed noise tensor regardless of (x_t, t). Feeding
// it the exact noise used to construct x_t makes x_0 recovery an identity.
class OracleNoisePredictor : public NoisePredictor {
public:
    explicit OracleNoisePredictor(Tensor noise) : noise_(std::move(noise)) {}
    Var predict(const Var& x_t, int, const NoiseSchedule&) const override;

private:
    Tensor noise_;
};

// Small trainable U-Net epsilon-predictor with a sinusoidal timestep embedding
// injected at the bottleneck. Desk-scale prior for the sampling loop.
class TinyUnetDenoiser : public NoisePredictor {
public:
    explicit TinyUnetDenoiser(uint64_t seed, int base_channels = 24);

    Var predict(const Var& x_t, int t, const NoiseSchedule& schedule) const override;
    void register_params(nn::ParamRegistry& reg, const std::string& prefix = "denoiser");
    std::vector<Var*> parameters();
    int base_channels() const { return base_channels_; }

private:
    Var time_embedding(int t, int steps) const;

    int base_channels_;
    nn::Conv2d stem_, down_, mid_, up_conv_, out_conv_;
    nn::Conv2d time_proj_;  // 1x1 conv as a linear layer on the embedding
};

}  // namespace tamp
