#include "net/indite.hpp"

#include <stdexcept>

namespace tamp {

namespace {
constexpr float kLeakySlope = 0.2f;
}

void BackboneConfig::validate() const {
    if (base_channels <= 0) throw std::invalid_argument("BackboneConfig: base_channels must be positive");
    if (depth <= 0) throw std::invalid_argument("BackboneConfig: depth must be positive");
    if (kernel_size <= 0 || kernel_size % 2 == 0)
        throw std::invalid_argument("BackboneConfig: kernel_size must be odd and positive");
    if (input_resolution <= 0 || input_resolution % (1 << depth) != 0)
        throw std::invalid_argument("BackboneConfig: input_resolution must be divisible by 2^depth");
}

Tensor binarize_confidence(const Tensor& confidence_raw, float tau, const Tensor& known_mask) {
    if (tau <= 0.0f || tau >= 1.0f)
        throw std::invalid_argument("binarize_confidence: tau must lie in (0,1)");
    check_rank3(confidence_raw, "binarize_confidence");
    validate_mask(known_mask, "binarize_confidence.known_mask");
    check_same_shape(confidence_raw, known_mask, "binarize_confidence");
    Tensor out = Tensor::zeros_like(confidence_raw);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (confidence_raw.data[i] > tau || known_mask.data[i] == 1.0f) ? 1.0f : 0.0f;
    return out;
}

KernelPredictor::KernelPredictor(int in_ch, int kernel_n, Rng& rng)
    : reduce_(in_ch, in_ch, 1, 1, 0, rng), expand_(in_ch, kernel_n * kernel_n, 1, 1, 0, rng) {}

Var KernelPredictor::operator()(const Var& features) const {
    return softmax_channels(expand_(leaky_relu(reduce_(features), kLeakySlope)));
}

void KernelPredictor::register_params(nn::ParamRegistry& reg, const std::string& prefix) {
    reduce_.register_params(reg, prefix + ".reduce");
    expand_.register_params(reg, prefix + ".expand");
}

InditeNet::InditeNet(const BackboneConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);

    level_channels_.resize(cfg_.depth + 1);
    level_channels_[0] = cfg_.base_channels;
    for (int l = 1; l <= cfg_.depth; ++l)
        level_channels_[l] = std::min(level_channels_[l - 1] * 2, cfg_.base_channels * 8);

    stem_ = nn::Conv2d(4, level_channels_[0], 3, 1, 1, rng);
    for (int l = 0; l < cfg_.depth; ++l) {
        enc_down_.emplace_back(level_channels_[l], level_channels_[l + 1], 3, 2, 1, rng);
        enc_conv_.emplace_back(level_channels_[l + 1], level_channels_[l + 1], 3, 1, 1, rng);
    }
    const int bottleneck = level_channels_[cfg_.depth];
    fuse_ = nn::Conv2d(2 * bottleneck, bottleneck, 3, 1, 1, rng);
    kpred_backbone_ = KernelPredictor(bottleneck, cfg_.kernel_size, rng);
    for (int l = cfg_.depth - 1; l >= 0; --l) {
        dec_a_.emplace_back(level_channels_[l + 1] + level_channels_[l], level_channels_[l], 3, 1, 1, rng);
        dec_b_.emplace_back(level_channels_[l], level_channels_[l], 3, 1, 1, rng);
    }
    kpred_complement_ = KernelPredictor(level_channels_[0], cfg_.kernel_size, rng);
    kpred_confidence_ = KernelPredictor(level_channels_[0], cfg_.kernel_size, rng);
    proj_complement_ = nn::Conv2d(level_channels_[0], 3, 1, 1, 0, rng);
    proj_confidence_ = nn::Conv2d(level_channels_[0], 1, 1, 1, 0, rng);
}

void InditeNet::validate_input(const Tensor& img, const Tensor& mask) const {
    check_rank3(img, "InditeNet input");
    if (img.channels() != 3) throw std::invalid_argument("InditeNet: image must have 3 channels");
    validate_mask(mask, "InditeNet input mask");
    if (mask.height() != img.height() || mask.width() != img.width())
        throw std::invalid_argument("InditeNet: mask/image spatial mismatch");
    if (img.height() % (1 << cfg_.depth) != 0 || img.width() % (1 << cfg_.depth) != 0)
        throw std::invalid_argument("InditeNet: resolution not divisible by 2^depth");
}

InditeNet::EncodeResult InditeNet::encode(const Var& input_stack) const {
    EncodeResult r;
    Var x = leaky_relu(stem_(input_stack), kLeakySlope);
    for (int l = 0; l < cfg_.depth; ++l) {
        r.skips.push_back(x);
        x = leaky_relu(enc_down_[l](x), kLeakySlope);
        x = leaky_relu(enc_conv_[l](x), kLeakySlope);
    }
    r.features = x;
    return r;
}

std::pair<InditeNet::EncodeResult, InditeNet::EncodeResult> InditeNet::encode_pair(
    const Tensor& damaged_1, const Tensor& mask_1, const Tensor& damaged_2,
    const Tensor& mask_2) const {
    validate_input(damaged_1, mask_1);
    validate_input(damaged_2, mask_2);
    const Var x1 = concat_channels(Var(damaged_1), Var(mask_1));
    const Var x2 = concat_channels(Var(damaged_2), Var(mask_2));
    return {encode(x1), encode(x2)};
}

Var InditeNet::merge_features(const Var& f_own, const Var& f_other) const {
    check_same_shape(f_own.value(), f_other.value(), "merge_features");
    return leaky_relu(fuse_(concat_channels(f_own, f_other)), kLeakySlope);
}

Var InditeNet::decode(const Var& merged_filtered, const std::vector<Var>& skips) const {
    if (static_cast<int>(skips.size()) != cfg_.depth)
        throw std::invalid_argument("decode: skip stack depth mismatch");
    Var x = merged_filtered;
    for (int i = 0; i < cfg_.depth; ++i) {
        const Var& skip = skips[cfg_.depth - 1 - i];
        x = upsample_nearest2(x);
        if (x.value().height() != skip.value().height() ||
            x.value().width() != skip.value().width())
            throw std::invalid_argument("decode: skip spatial mismatch");
        x = concat_channels(x, skip);
        x = leaky_relu(dec_a_[i](x), kLeakySlope);
        x = leaky_relu(dec_b_[i](x), kLeakySlope);
    }
    return x;
}

Var InditeNet::complement_head(const Var& decoded_own, const Var& kernels_from_other) const {
    return tanh_op(proj_complement_(spf_filter(decoded_own, kernels_from_other)));
}

Var InditeNet::confidence_head(const Var& decoded_own, const Var& kernels_from_other) const {
    return sigmoid(proj_confidence_(spf_filter(decoded_own, kernels_from_other)));
}

InditeNet::ForwardVars InditeNet::forward_graph(const Tensor& damaged_1, const Tensor& mask_1,
                                                const Tensor& damaged_2,
                                                const Tensor& mask_2) const {
    auto [e1, e2] = encode_pair(damaged_1, mask_1, damaged_2, mask_2);

    const Var merged_1 = merge_features(e1.features, e2.features);
    const Var merged_2 = merge_features(e2.features, e1.features);

    const Var k1 = kpred_backbone_(merged_1);
    const Var k2 = kpred_backbone_(merged_2);
    const Var filtered_1 = spf_filter(merged_1, k2);
    const Var filtered_2 = spf_filter(merged_2, k1);

    const Var dec_1 = decode(filtered_1, e1.skips);
    const Var dec_2 = decode(filtered_2, e2.skips);

    const Var km_1 = kpred_complement_(dec_1);
    const Var km_2 = kpred_complement_(dec_2);
    const Var kn_1 = kpred_confidence_(dec_1);
    const Var kn_2 = kpred_confidence_(dec_2);

    ForwardVars out;
    out.complemented_1 = complement_head(dec_1, km_2);
    out.complemented_2 = complement_head(dec_2, km_1);
    out.confidence_1 = confidence_head(dec_1, kn_2);
    out.confidence_2 = confidence_head(dec_2, kn_1);
    return out;
}

ComplementResult InditeNet::forward(const Tensor& damaged_1, const Tensor& mask_1,
                                    const Tensor& damaged_2, const Tensor& mask_2,
                                    float tau) const {
    const ForwardVars v = forward_graph(damaged_1, mask_1, damaged_2, mask_2);
    ComplementResult r;
    r.complemented_1 = v.complemented_1.value();
    r.complemented_2 = v.complemented_2.value();
    r.confidence_raw_1 = v.confidence_1.value();
    r.confidence_raw_2 = v.confidence_2.value();
    r.confidence_mask_1 = binarize_confidence(r.confidence_raw_1, tau, mask_1);
    r.confidence_mask_2 = binarize_confidence(r.confidence_raw_2, tau, mask_2);
    return r;
}

ComplementResult InditeNet::forward(const ScenePair& pair, float tau) const {
    return forward(pair.damaged_1, pair.mask_1, pair.damaged_2, pair.mask_2, tau);
}

void InditeNet::register_params(nn::ParamRegistry& reg, const std::string& prefix) {
    stem_.register_params(reg, prefix + ".stem");
    for (size_t l = 0; l < enc_down_.size(); ++l) {
        enc_down_[l].register_params(reg, prefix + ".enc" + std::to_string(l) + ".down");
        enc_conv_[l].register_params(reg, prefix + ".enc" + std::to_string(l) + ".conv");
    }
    fuse_.register_params(reg, prefix + ".fuse");
    kpred_backbone_.register_params(reg, prefix + ".kpred");
    for (size_t i = 0; i < dec_a_.size(); ++i) {
        dec_a_[i].register_params(reg, prefix + ".dec" + std::to_string(i) + ".a");
        dec_b_[i].register_params(reg, prefix + ".dec" + std::to_string(i) + ".b");
    }
    kpred_complement_.register_params(reg, prefix + ".kpred_m");
    kpred_confidence_.register_params(reg, prefix + ".kpred_n");
    proj_complement_.register_params(reg, prefix + ".proj_m");
    proj_confidence_.register_params(reg, prefix + ".proj_n");
}

}  // namespace tamp
