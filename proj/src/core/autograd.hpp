#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "core/tensor.hpp"

namespace tamp {

// Reverse-mode autodiff over Tensor. Ops build a DAG of VarNodes; backward()
// walks it in reverse topological order. Gradients accumulate, so weight
// sharing (the same parameter used by several ops) works out of the box.
struct VarNode {
    Tensor value;
    Tensor grad;  // allocated lazily on first accumulation
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<std::shared_ptr<VarNode>> parents;
    std::function<void(VarNode&)> backprop;  // reads value/grad, accumulates into parents
};

class Var {
public:
    Var() = default;
    explicit Var(Tensor v, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Tensor& value() const { return node_->value; }
    Tensor& value() { return node_->value; }
    const Tensor& grad() const;
    bool requires_grad() const { return node_ && node_->requires_grad; }
    void zero_grad();

    std::shared_ptr<VarNode> node() const { return node_; }
    static Var from_node(std::shared_ptr<VarNode> n);

private:
    std::shared_ptr<VarNode> node_;
};

// Backpropagate from a scalar (shape {1}) root.
void backward(const Var& root);

// ---- arithmetic / elementwise ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
// elementwise; also supports b with shape (1,H,W) broadcast across a's channels
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float s);
Var add_scalar(const Var& a, float s);
Var abs_op(const Var& a);
Var square(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, float slope);
Var tanh_op(const Var& a);
Var sigmoid(const Var& a);
Var clamp_op(const Var& a, float lo, float hi);
Var detach(const Var& a);

// ---- structure ----
Var concat_channels(const Var& a, const Var& b);
Var repeat_channels(const Var& a, int times);
Var mean_channels(const Var& a);  // (C,H,W) -> (1,H,W)

// ---- reductions (scalar results, double accumulation) ----
Var sum_all(const Var& a);
Var mean_all(const Var& a);

// ---- spatial ----
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var add_channel_bias(const Var& x, const Var& bias);  // bias shape {C}
Var upsample_nearest2(const Var& x);
Var softmax_channels(const Var& x);
// Per-pixel predicted-kernel filtering: features (C,H,W), kernels (N*N,H,W),
// zero padding outside the image. Kernel entry k=(dy+r)*N+(dx+r) weights the
// neighbor at offset (dy,dx).
Var spf_filter(const Var& features, const Var& kernels);
Var block_avg_downsample(const Var& x, int factor);
Var block_replicate_upsample(const Var& x, int factor);
Var gram_matrix(const Var& x);  // (C,H,W) -> (C,C), normalized by C*H*W

}  // namespace tamp
