#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "core/nn.hpp"

namespace tamp {

// Pluggable multi-level feature function for perceptual/style terms. The
// default desk-scale implementation is a small frozen conv pyramid with
// seed-fixed random weights; a pretrained classifier can be swapped in behind
// the same interface when available.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    // img: (3,H,W); returns one feature map per level, coarsest last
    virtual std::vector<Var> features(const Var& img) const = 0;
};

class RandomPyramidExtractor : public FeatureExtractor {
public:
    explicit RandomPyramidExtractor(uint64_t seed, int levels = 3, int base_channels = 16);
    std::vector<Var> features(const Var& img) const override;

private:
    std::vector<nn::Conv2d> convs_;
};

std::shared_ptr<FeatureExtractor> make_default_extractor(uint64_t seed = 0x7A5CF00DULL);

}  // namespace tamp
