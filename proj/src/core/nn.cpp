#include "core/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace tamp::nn {

Tensor kaiming_conv_weight(int out_ch, int in_ch, int k, Rng& rng, float neg_slope) {
    Tensor w({out_ch, in_ch, k, k});
    const float fan_in = static_cast<float>(in_ch * k * k);
    const float gain = std::sqrt(2.0f / (1.0f + neg_slope * neg_slope));
    const float bound = gain * std::sqrt(3.0f / fan_in);
    for (auto& v : w.data) v = rng.uniformf(-bound, bound);
    return w;
}

Conv2d::Conv2d(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng, bool trainable)
    : stride_(stride), pad_(pad) {
    w = Var(kaiming_conv_weight(out_ch, in_ch, k, rng), trainable);
    b = Var(Tensor({out_ch}, 0.0f), trainable);
}

void Conv2d::register_params(ParamRegistry& reg, const std::string& prefix) {
    reg.add(prefix + ".w", &w);
    reg.add(prefix + ".b", &b);
}

void zero_grads(const std::vector<Var*>& params) {
    for (Var* p : params) p->zero_grad();
}

double clip_grad_norm(const std::vector<Var*>& params, double max_norm) {
    double sq = 0.0;
    for (Var* p : params) {
        if (!p->node()->has_grad) continue;
        for (float g : p->node()->grad.data) sq += static_cast<double>(g) * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const float s = static_cast<float>(max_norm / norm);
        for (Var* p : params) {
            if (!p->node()->has_grad) continue;
            for (float& g : p->node()->grad.data) g *= s;
        }
    }
    return norm;
}

void Adam::step(const std::vector<Var*>& params) {
    if (slots_.empty()) {
        slots_.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            slots_[i].m = Tensor::zeros_like(params[i]->value());
            slots_[i].v = Tensor::zeros_like(params[i]->value());
        }
    }
    if (slots_.size() != params.size())
        throw std::invalid_argument("Adam::step: parameter set changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(beta1_), static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(static_cast<double>(beta2_), static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        Var* p = params[i];
        if (!p->node()->has_grad) continue;
        auto& m = slots_[i].m.data;
        auto& v = slots_[i].v.data;
        auto& x = p->value().data;
        const auto& g = p->node()->grad.data;
        for (size_t j = 0; j < x.size(); ++j) {
            m[j] = beta1_ * m[j] + (1.0f - beta1_) * g[j];
            v[j] = beta2_ * v[j] + (1.0f - beta2_) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            x[j] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

}  // namespace tamp::nn
