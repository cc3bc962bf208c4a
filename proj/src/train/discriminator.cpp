#include "train/discriminator.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace tamp {

PatchDiscriminator::PatchDiscriminator(uint64_t seed, int base_channels) {
    Rng rng(seed);
    const int c = base_channels;
    convs_.emplace_back(3, c, 3, 2, 1, rng);
    convs_.emplace_back(c, c * 2, 3, 2, 1, rng);
    convs_.emplace_back(c * 2, c * 4, 3, 2, 1, rng);
    convs_.emplace_back(c * 4, 1, 3, 1, 1, rng);
    power_u0_.resize(convs_.size());
    for (size_t i = 0; i < convs_.size(); ++i) {
        const int rows = convs_[i].w.value().shape[0];
        power_u0_[i].resize(rows);
        Rng urng(seed ^ (0xD15C0000ULL + i));
        for (auto& v : power_u0_[i]) v = urng.normalf();
    }
}

Var PatchDiscriminator::normalized(const nn::Conv2d& conv, size_t idx) const {
    using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Tensor& wt = conv.w.value();
    const int rows = wt.shape[0];
    const int cols = wt.numel() / rows;
    Eigen::Map<const RowMat> wm(wt.data.data(), rows, cols);
    Eigen::Map<const Eigen::VectorXf> u0(power_u0_[idx].data(), rows);

    Eigen::VectorXf u = u0;
    Eigen::VectorXf v;
    for (int iter = 0; iter < 5; ++iter) {
        v = wm.transpose() * u;
        const float vn = v.norm();
        if (vn > 0.0f) v /= vn;
        u = wm * v;
        const float un = u.norm();
        if (un > 0.0f) u /= un;
    }
    const float sigma = u.dot(wm * v);

    const float inv = sigma > 1e-12f ? 1.0f / sigma : 1.0f;
    return scale(conv.w, inv);
}

Var PatchDiscriminator::score(const Var& img) const {
    Var x = img;
    for (size_t i = 0; i < convs_.size(); ++i) {
        const Var w_sn = normalized(convs_[i], i);
        const int stride = (i + 1 < convs_.size()) ? 2 : 1;
        x = conv2d(x, w_sn, convs_[i].b, stride, 1);
        if (i + 1 < convs_.size()) x = leaky_relu(x, 0.2f);
    }
    return x;
}

void PatchDiscriminator::register_params(nn::ParamRegistry& reg, const std::string& prefix) {
    for (size_t i = 0; i < convs_.size(); ++i)
        convs_[i].register_params(reg, prefix + ".conv" + std::to_string(i));
}

std::vector<Var*> PatchDiscriminator::parameters() {
    nn::ParamRegistry reg;
    register_params(reg);
    return reg.vars();
}

}  // namespace tamp
