#include "diffusion/denoiser.hpp"

#include <cmath>
#include <stdexcept>

namespace tamp {

Var OracleNoisePredictor::predict(const Var& x_t, int, const NoiseSchedule&) const {
    check_same_shape(x_t.value(), noise_, "OracleNoisePredictor");
    return Var(noise_);
}

namespace {
constexpr int kTimeEmbedDim = 16;
}

TinyUnetDenoiser::TinyUnetDenoiser(uint64_t seed, int base_channels)
    : base_channels_(base_channels) {
    Rng rng(seed);
    const int c = base_channels;
    stem_ = nn::Conv2d(3, c, 3, 1, 1, rng);
    down_ = nn::Conv2d(c, c * 2, 3, 2, 1, rng);
    mid_ = nn::Conv2d(c * 2, c * 2, 3, 1, 1, rng);
    up_conv_ = nn::Conv2d(c * 2 + c, c, 3, 1, 1, rng);
    out_conv_ = nn::Conv2d(c, 3, 3, 1, 1, rng);
    time_proj_ = nn::Conv2d(kTimeEmbedDim, c * 2, 1, 1, 0, rng);
}

Var TinyUnetDenoiser::time_embedding(int t, int steps) const {
    Tensor emb({kTimeEmbedDim, 1, 1});
    const double pos = static_cast<double>(t) / std::max(1, steps);
    for (int i = 0; i < kTimeEmbedDim / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * i / kTimeEmbedDim);
        emb.data[2 * i] = static_cast<float>(std::sin(pos * 1000.0 * freq));
        emb.data[2 * i + 1] = static_cast<float>(std::cos(pos * 1000.0 * freq));
    }
    return Var(emb);
}

Var TinyUnetDenoiser::predict(const Var& x_t, int t, const NoiseSchedule& schedule) const {
    const Tensor& xv = x_t.value();
    check_rank3(xv, "TinyUnetDenoiser");
    if (xv.channels() != 3) throw std::invalid_argument("TinyUnetDenoiser: expected 3 channels");
    if (xv.height() % 2 != 0 || xv.width() % 2 != 0)
        throw std::invalid_argument("TinyUnetDenoiser: spatial dims must be even");
    if (t < 1 || t > schedule.steps)
        throw std::invalid_argument("TinyUnetDenoiser: timestep out of range");

    const Var s = leaky_relu(stem_(x_t), 0.2f);
    Var x = leaky_relu(down_(s), 0.2f);

    // timestep conditioning as a per-channel bias at the bottleneck
    const Var temb = time_proj_(time_embedding(t, schedule.steps));
    x = add_channel_bias(x, temb);
    x = leaky_relu(mid_(x), 0.2f);
    x = upsample_nearest2(x);
    x = concat_channels(x, s);
    x = leaky_relu(up_conv_(x), 0.2f);
    return out_conv_(x);
}

void TinyUnetDenoiser::register_params(nn::ParamRegistry& reg, const std::string& prefix) {
    stem_.register_params(reg, prefix + ".stem");
    down_.register_params(reg, prefix + ".down");
    mid_.register_params(reg, prefix + ".mid");
    up_conv_.register_params(reg, prefix + ".up");
    out_conv_.register_params(reg, prefix + ".out");
    time_proj_.register_params(reg, prefix + ".time");
}

std::vector<Var*> TinyUnetDenoiser::parameters() {
    nn::ParamRegistry reg;
    register_params(reg);
    return reg.vars();
}

}  // namespace tamp
