#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/nn.hpp"

namespace tamp {

// Patch-level convolutional critic with spectral weight normalization. Maps a
// (3,H,W) image to a single-channel score map; used by the hinge adversarial
// losses. The scoring surface is an interface so other critics can be swapped
// in behind it.
class PatchDiscriminator {
public:
    PatchDiscriminator() = default;
    PatchDiscriminator(uint64_t seed, int base_channels = 48);

    // Score map for an image; graph-connected to both input and weights.
    Var score(const Var& img) const;

    void register_params(nn::ParamRegistry& reg, const std::string& prefix = "disc");
    std::vector<Var*> parameters();

private:
    // weight scaled by 1/sigma; sigma estimated by a fixed-start power
    // iteration so score() is a pure function of (weights, input)
    Var normalized(const nn::Conv2d& conv, size_t idx) const;

    std::vector<nn::Conv2d> convs_;
    std::vector<std::vector<float>> power_u0_;  // per-conv fixed start vector
};

}  // namespace tamp
