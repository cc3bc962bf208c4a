#pragma once

#include <cstdint>
#include <vector>

#include "complement/complement.hpp"
#include "core/nn.hpp"

namespace tamp {

struct BackboneConfig {
    int base_channels = 32;
    int depth = 4;           // number of down/up levels
    int kernel_size = 3;     // N: per-pixel filtering kernels are N x N
    int input_resolution = 256;

    void validate() const;
};

// Network outputs for one scene pair. confidence_mask_i is conf_raw_i binarized
// at tau with originally-known pixels forced to 1.
struct ComplementResult {
    Tensor complemented_1, complemented_2;      // (3,H,W) in [-1,1]
    Tensor confidence_raw_1, confidence_raw_2;  // (1,H,W) in [0,1]
    Tensor confidence_mask_1, confidence_mask_2;
};

// Strict threshold (raw > tau), then forced to 1 wherever known_mask = 1 so
// trusted ground-truth pixels can never be discarded downstream.
Tensor binarize_confidence(const Tensor& confidence_raw, float tau, const Tensor& known_mask);

// Per-pixel kernel prediction: 1x1 conv stack + channelwise softmax, so every
// spatial kernel sums to 1 and constant feature maps give constant kernels.
class KernelPredictor {
public:
    KernelPredictor() = default;
    KernelPredictor(int in_ch, int kernel_n, Rng& rng);
    Var operator()(const Var& features) const;
    void register_params(nn::ParamRegistry& reg, const std::string& prefix);

private:
    nn::Conv2d reduce_, expand_;
};

// Siamese complementation network: one parameter set runs both branches, the
// two feature streams are merged crosswise, filtered with kernels predicted
// from the counterpart branch, decoded with skip connections, and finished by
// the complement (image) and confidence heads.
class InditeNet {
public:
    InditeNet(const BackboneConfig& cfg, uint64_t seed);

    struct EncodeResult {
        Var features;            // bottleneck, pre-merge
        std::vector<Var> skips;  // per level, index 0 = full resolution
    };
    struct ForwardVars {
        Var complemented_1, complemented_2;
        Var confidence_1, confidence_2;
    };

    EncodeResult encode(const Var& input_stack) const;  // (4,H,W): image + mask
    std::pair<EncodeResult, EncodeResult> encode_pair(const Tensor& damaged_1, const Tensor& mask_1,
                                                      const Tensor& damaged_2,
                                                      const Tensor& mask_2) const;
    // Asymmetric merge: own branch first, counterpart second. Concatenation
    // followed by a learned fusion conv back to the input width; elementwise
    // addition would be the parameter-free alternative but loses the order
    // sensitivity the cross-indexed kernels rely on.
    Var merge_features(const Var& f_own, const Var& f_other) const;
    Var predict_kernels_backbone(const Var& merged) const { return kpred_backbone_(merged); }
    Var predict_kernels_complement(const Var& decoded) const { return kpred_complement_(decoded); }
    Var predict_kernels_confidence(const Var& decoded) const { return kpred_confidence_(decoded); }
    Var decode(const Var& merged_filtered, const std::vector<Var>& skips) const;
    Var complement_head(const Var& decoded_own, const Var& kernels_from_other) const;
    Var confidence_head(const Var& decoded_own, const Var& kernels_from_other) const;

    // Full differentiable pass over both branches.
    ForwardVars forward_graph(const Tensor& damaged_1, const Tensor& mask_1,
                              const Tensor& damaged_2, const Tensor& mask_2) const;

    ComplementResult forward(const ScenePair& pair, float tau) const;
    ComplementResult forward(const Tensor& damaged_1, const Tensor& mask_1, const Tensor& damaged_2,
                             const Tensor& mask_2, float tau) const;

    void register_params(nn::ParamRegistry& reg, const std::string& prefix = "net");
    const BackboneConfig& config() const { return cfg_; }

private:
    void validate_input(const Tensor& img, const Tensor& mask) const;

    BackboneConfig cfg_;
    std::vector<int> level_channels_;  // channels at resolution /2^l, l = 0..depth
    nn::Conv2d stem_;
    std::vector<nn::Conv2d> enc_down_, enc_conv_;
    nn::Conv2d fuse_;
    KernelPredictor kpred_backbone_, kpred_complement_, kpred_confidence_;
    std::vector<nn::Conv2d> dec_a_, dec_b_;
    nn::Conv2d proj_complement_, proj_confidence_;
};

}  // namespace tamp
