#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/autograd.hpp"
#include "core/rng.hpp"

namespace tamp::nn {

// Named parameter registry; the checkpoint container serializes it by name.
class ParamRegistry {
public:
    void add(const std::string& name, Var* p) { items_.emplace_back(name, p); }
    const std::vector<std::pair<std::string, Var*>>& items() const { return items_; }
    std::vector<Var*> vars() const {
        std::vector<Var*> out;
        out.reserve(items_.size());
        for (auto& [n, p] : items_) out.push_back(p);
        return out;
    }

private:
    std::vector<std::pair<std::string, Var*>> items_;
};

// Kaiming-uniform init for a conv weight (OC,IC,k,k), gain tuned for leaky relu.
Tensor kaiming_conv_weight(int out_ch, int in_ch, int k, Rng& rng, float neg_slope = 0.2f);

class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng, bool trainable = true);

    Var operator()(const Var& x) const { return conv2d(x, w, b, stride_, pad_); }
    void register_params(ParamRegistry& reg, const std::string& prefix);

    Var w, b;

private:
    int stride_ = 1, pad_ = 0;
};

void zero_grads(const std::vector<Var*>& params);

// Global-norm gradient clipping; returns the pre-clip norm.
double clip_grad_norm(const std::vector<Var*>& params, double max_norm);

class Adam {
public:
    Adam(float lr, float beta1, float beta2, float eps = 1e-8f)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Var*>& params);

    // moment access for checkpoint round-trips
    struct Slot {
        Tensor m, v;
    };
    std::vector<Slot>& slots() { return slots_; }
    long step_count() const { return t_; }
    void set_step_count(long t) { t_ = t; }

private:
    float lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Slot> slots_;
};

}  // namespace tamp::nn
