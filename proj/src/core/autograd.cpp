#include "core/autograd.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace tamp {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXf;

void ensure_grad(VarNode& n) {
    if (!n.has_grad) {
        n.grad = Tensor::zeros_like(n.value);
        n.has_grad = true;
    }
}

void accumulate(VarNode& n, const Tensor& g) {
    ensure_grad(n);
    float* dst = n.grad.data.data();
    const float* src = g.data.data();
    const size_t count = g.data.size();
    for (size_t i = 0; i < count; ++i) dst[i] += src[i];
}

std::shared_ptr<VarNode> make_result(Tensor value, std::vector<std::shared_ptr<VarNode>> parents,
                                     std::function<void(VarNode&)> backprop) {
    auto n = std::make_shared<VarNode>();
    n->value = std::move(value);
    bool rg = false;
    for (const auto& p : parents) rg = rg || (p && p->requires_grad);
    n->requires_grad = rg;
    if (rg) {
        n->parents = std::move(parents);
        n->backprop = std::move(backprop);
    }
    return n;
}

}  // namespace

Var::Var(Tensor v, bool requires_grad) {
    node_ = std::make_shared<VarNode>();
    node_->value = std::move(v);
    node_->requires_grad = requires_grad;
}

const Tensor& Var::grad() const {
    if (!node_ || !node_->has_grad) throw std::runtime_error("Var::grad: no gradient computed");
    return node_->grad;
}

void Var::zero_grad() {
    if (!node_) return;
    node_->has_grad = false;
    node_->grad = Tensor();
}

Var Var::from_node(std::shared_ptr<VarNode> n) {
    Var v;
    v.node_ = std::move(n);
    return v;
}

void backward(const Var& root) {
    if (!root.defined()) throw std::invalid_argument("backward: undefined root");
    if (root.value().numel() != 1) throw std::invalid_argument("backward: root must be scalar");
    auto root_node = root.node();
    if (!root_node->requires_grad) return;

    // reverse post-order DFS = consumers before producers
    std::vector<VarNode*> order;
    std::unordered_set<VarNode*> visited;
    std::vector<std::pair<VarNode*, size_t>> stack;
    stack.emplace_back(root_node.get(), 0);
    visited.insert(root_node.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            VarNode* p = node->parents[idx++].get();
            if (p && p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    ensure_grad(*root_node);
    root_node->grad.data[0] = 1.0f;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        VarNode* n = *it;
        if (n->backprop && n->has_grad) n->backprop(*n);
    }
}

// ---------------------------------------------------------------------------
// arithmetic
// ---------------------------------------------------------------------------

Var add(const Var& a, const Var& b) {
    check_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    const auto& bv = b.value().data;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv[i];
    auto pa = a.node(), pb = b.node();
    return Var::from_node(make_result(std::move(out), {pa, pb}, [pa, pb](VarNode& self) {
        if (pa->requires_grad) accumulate(*pa, self.grad);
        if (pb->requires_grad) accumulate(*pb, self.grad);
    }));
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    const auto& bv = b.value().data;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= bv[i];
    auto pa = a.node(), pb = b.node();
    return Var::from_node(make_result(std::move(out), {pa, pb}, [pa, pb](VarNode& self) {
        if (pa->requires_grad) accumulate(*pa, self.grad);
        if (pb->requires_grad) {
            ensure_grad(*pb);
            for (size_t i = 0; i < self.grad.data.size(); ++i) pb->grad.data[i] -= self.grad.data[i];
        }
    }));
}

Var mul(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const bool broadcast = av.rank() == 3 && bv.rank() == 3 && bv.channels() == 1 &&
                           av.channels() != 1 && av.height() == bv.height() &&
                           av.width() == bv.width();
    if (!broadcast) check_same_shape(av, bv, "mul");

    Tensor out = av;
    const int hw = broadcast ? av.height() * av.width() : 0;
    if (broadcast) {
        for (int c = 0; c < av.channels(); ++c)
            for (int i = 0; i < hw; ++i) out.data[c * hw + i] *= bv.data[i];
    } else {
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bv.data[i];
    }
    auto pa = a.node(), pb = b.node();
    return Var::from_node(
        make_result(std::move(out), {pa, pb}, [pa, pb, broadcast, hw](VarNode& self) {
            const auto& g = self.grad.data;
            if (pa->requires_grad) {
                ensure_grad(*pa);
                const auto& bd = pb->value.data;
                if (broadcast) {
                    const int ch = pa->value.channels();
                    for (int c = 0; c < ch; ++c)
                        for (int i = 0; i < hw; ++i) pa->grad.data[c * hw + i] += g[c * hw + i] * bd[i];
                } else {
                    for (size_t i = 0; i < g.size(); ++i) pa->grad.data[i] += g[i] * bd[i];
                }
            }
            if (pb->requires_grad) {
                ensure_grad(*pb);
                const auto& ad = pa->value.data;
                if (broadcast) {
                    const int ch = pa->value.channels();
                    for (int c = 0; c < ch; ++c)
                        for (int i = 0; i < hw; ++i) pb->grad.data[i] += g[c * hw + i] * ad[c * hw + i];
                } else {
                    for (size_t i = 0; i < g.size(); ++i) pb->grad.data[i] += g[i] * ad[i];
                }
            }
        }));
}

Var scale(const Var& a, float s) {
    Tensor out = a.value();
    for (auto& v : out.data) v *= s;
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa, s](VarNode& self) {
        ensure_grad(*pa);
        for (size_t i = 0; i < self.grad.data.size(); ++i) pa->grad.data[i] += s * self.grad.data[i];
    }));
}

Var add_scalar(const Var& a, float s) {
    Tensor out = a.value();
    for (auto& v : out.data) v += s;
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa},
                                      [pa](VarNode& self) { accumulate(*pa, self.grad); }));
}

Var abs_op(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::fabs(v);
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa](VarNode& self) {
        ensure_grad(*pa);
        const auto& x = pa->value.data;
        for (size_t i = 0; i < x.size(); ++i) {
            const float sign = x[i] > 0.0f ? 1.0f : (x[i] < 0.0f ? -1.0f : 0.0f);
            pa->grad.data[i] += sign * self.grad.data[i];
        }
    }));
}

Var square(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v *= v;
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa](VarNode& self) {
        ensure_grad(*pa);
        const auto& x = pa->value.data;
        for (size_t i = 0; i < x.size(); ++i) pa->grad.data[i] += 2.0f * x[i] * self.grad.data[i];
    }));
}

Var relu(const Var& a) { return leaky_relu(a, 0.0f); }

Var leaky_relu(const Var& a, float slope) {
    Tensor out = a.value();
    for (auto& v : out.data) v = v > 0.0f ? v : slope * v;
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa, slope](VarNode& self) {
        ensure_grad(*pa);
        const auto& x = pa->value.data;
        for (size_t i = 0; i < x.size(); ++i)
            pa->grad.data[i] += (x[i] > 0.0f ? 1.0f : slope) * self.grad.data[i];
    }));
}

Var tanh_op(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::tanh(v);
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa](VarNode& self) {
        ensure_grad(*pa);
        const auto& y = self.value.data;
        for (size_t i = 0; i < y.size(); ++i)
            pa->grad.data[i] += (1.0f - y[i] * y[i]) * self.grad.data[i];
    }));
}

Var sigmoid(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = 1.0f / (1.0f + std::exp(-v));
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa](VarNode& self) {
        ensure_grad(*pa);
        const auto& y = self.value.data;
        for (size_t i = 0; i < y.size(); ++i)
            pa->grad.data[i] += y[i] * (1.0f - y[i]) * self.grad.data[i];
    }));
}

Var clamp_op(const Var& a, float lo, float hi) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::min(hi, std::max(lo, v));
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa, lo, hi](VarNode& self) {
        ensure_grad(*pa);
        const auto& x = pa->value.data;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i] > lo && x[i] < hi) pa->grad.data[i] += self.grad.data[i];
    }));
}

Var detach(const Var& a) { return Var(a.value(), false); }

// ---------------------------------------------------------------------------
// structure
// ---------------------------------------------------------------------------

Var concat_channels(const Var& a, const Var& b) {
    check_rank3(a.value(), "concat_channels");
    check_rank3(b.value(), "concat_channels");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.height() != bv.height() || av.width() != bv.width())
        throw std::invalid_argument("concat_channels: spatial mismatch " + av.shape_str() + " vs " +
                                    bv.shape_str());
    Tensor out({av.channels() + bv.channels(), av.height(), av.width()});
    std::copy(av.data.begin(), av.data.end(), out.data.begin());
    std::copy(bv.data.begin(), bv.data.end(), out.data.begin() + av.data.size());
    auto pa = a.node(), pb = b.node();
    const size_t na = av.data.size();
    return Var::from_node(make_result(std::move(out), {pa, pb}, [pa, pb, na](VarNode& self) {
        const auto& g = self.grad.data;
        if (pa->requires_grad) {
            ensure_grad(*pa);
            for (size_t i = 0; i < na; ++i) pa->grad.data[i] += g[i];
        }
        if (pb->requires_grad) {
            ensure_grad(*pb);
            for (size_t i = na; i < g.size(); ++i) pb->grad.data[i - na] += g[i];
        }
    }));
}

Var repeat_channels(const Var& a, int times) {
    check_rank3(a.value(), "repeat_channels");
    if (times < 1) throw std::invalid_argument("repeat_channels: times must be >= 1");
    const Tensor& av = a.value();
    Tensor out({av.channels() * times, av.height(), av.width()});
    const size_t n = av.data.size();
    for (int r = 0; r < times; ++r)
        std::copy(av.data.begin(), av.data.end(), out.data.begin() + r * n);
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa, times, n](VarNode& self) {
        ensure_grad(*pa);
        for (int r = 0; r < times; ++r)
            for (size_t i = 0; i < n; ++i) pa->grad.data[i] += self.grad.data[r * n + i];
    }));
}

Var mean_channels(const Var& a) {
    check_rank3(a.value(), "mean_channels");
    const Tensor& av = a.value();
    const int ch = av.channels();
    const int hw = av.height() * av.width();
    Tensor out({1, av.height(), av.width()});
    for (int i = 0; i < hw; ++i) {
        double s = 0.0;
        for (int c = 0; c < ch; ++c) s += av.data[c * hw + i];
        out.data[i] = static_cast<float>(s / ch);
    }
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa, ch, hw](VarNode& self) {
        ensure_grad(*pa);
        const float inv = 1.0f / static_cast<float>(ch);
        for (int c = 0; c < ch; ++c)
            for (int i = 0; i < hw; ++i) pa->grad.data[c * hw + i] += inv * self.grad.data[i];
    }));
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

Var sum_all(const Var& a) {
    Tensor out = Tensor::scalar(static_cast<float>(a.value().sum()));
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa](VarNode& self) {
        ensure_grad(*pa);
        const float g = self.grad.data[0];
        for (auto& v : pa->grad.data) v += g;
    }));
}

Var mean_all(const Var& a) {
    const int n = a.value().numel();
    Tensor out = Tensor::scalar(static_cast<float>(a.value().sum() / n));
    auto pa = a.node();
    return Var::from_node(make_result(std::move(out), {pa}, [pa, n](VarNode& self) {
        ensure_grad(*pa);
        const float g = self.grad.data[0] / static_cast<float>(n);
        for (auto& v : pa->grad.data) v += g;
    }));
}

// ---------------------------------------------------------------------------
// conv2d (im2col + GEMM)
// ---------------------------------------------------------------------------

namespace {

struct ConvDims {
    int in_ch, in_h, in_w;
    int out_ch, k, stride, pad;
    int out_h, out_w;
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, int stride, int pad) {
    check_rank3(x, "conv2d");
    if (w.rank() != 4) throw std::invalid_argument("conv2d: weight must be rank-4 (OC,IC,k,k)");
    if (w.shape[1] != x.channels())
        throw std::invalid_argument("conv2d: channel mismatch, input " + x.shape_str() +
                                    " weight " + w.shape_str());
    if (w.shape[2] != w.shape[3]) throw std::invalid_argument("conv2d: kernel must be square");
    ConvDims d;
    d.in_ch = x.channels();
    d.in_h = x.height();
    d.in_w = x.width();
    d.out_ch = w.shape[0];
    d.k = w.shape[2];
    d.stride = stride;
    d.pad = pad;
    d.out_h = (d.in_h + 2 * pad - d.k) / stride + 1;
    d.out_w = (d.in_w + 2 * pad - d.k) / stride + 1;
    if (d.out_h <= 0 || d.out_w <= 0)
        throw std::invalid_argument("conv2d: input smaller than kernel");
    return d;
}

// cols: (IC*k*k) x (out_h*out_w), column-major so each output pixel's patch is contiguous
void im2col(const Tensor& x, const ConvDims& d, ColMat& cols) {
    cols.setZero(d.in_ch * d.k * d.k, d.out_h * d.out_w);
    for (int oy = 0; oy < d.out_h; ++oy) {
        for (int ox = 0; ox < d.out_w; ++ox) {
            float* col = cols.col(oy * d.out_w + ox).data();
            int row = 0;
            for (int c = 0; c < d.in_ch; ++c) {
                const float* plane = x.data.data() + static_cast<size_t>(c) * d.in_h * d.in_w;
                for (int ky = 0; ky < d.k; ++ky) {
                    const int iy = oy * d.stride - d.pad + ky;
                    for (int kx = 0; kx < d.k; ++kx, ++row) {
                        const int ix = ox * d.stride - d.pad + kx;
                        if (iy >= 0 && iy < d.in_h && ix >= 0 && ix < d.in_w)
                            col[row] = plane[iy * d.in_w + ix];
                    }
                }
            }
        }
    }
}

void col2im_accumulate(const ColMat& dcols, const ConvDims& d, Tensor& dx) {
    for (int oy = 0; oy < d.out_h; ++oy) {
        for (int ox = 0; ox < d.out_w; ++ox) {
            const float* col = dcols.col(oy * d.out_w + ox).data();
            int row = 0;
            for (int c = 0; c < d.in_ch; ++c) {
                float* plane = dx.data.data() + static_cast<size_t>(c) * d.in_h * d.in_w;
                for (int ky = 0; ky < d.k; ++ky) {
                    const int iy = oy * d.stride - d.pad + ky;
                    for (int kx = 0; kx < d.k; ++kx, ++row) {
                        const int ix = ox * d.stride - d.pad + kx;
                        if (iy >= 0 && iy < d.in_h && ix >= 0 && ix < d.in_w)
                            plane[iy * d.in_w + ix] += col[row];
                    }
                }
            }
        }
    }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const ConvDims d = conv_dims(xv, wv, stride, pad);
    if (b.value().numel() != d.out_ch)
        throw std::invalid_argument("conv2d: bias size mismatch");

    auto cols = std::make_shared<ColMat>();
    im2col(xv, d, *cols);

    Tensor out({d.out_ch, d.out_h, d.out_w});
    if (d.k == 1 && d.stride == 1) {
        // per-pixel matvec: identical instruction path for every pixel, so a
        // constant input yields a bitwise-constant output
        Eigen::Map<const RowMat> wmat(wv.data.data(), d.out_ch, d.in_ch);
        Eigen::Map<RowMat> omat(out.data.data(), d.out_ch, d.out_h * d.out_w);
        for (int p = 0; p < d.out_h * d.out_w; ++p)
            omat.col(p).noalias() = wmat * cols->col(p);
        for (int oc = 0; oc < d.out_ch; ++oc) omat.row(oc).array() += b.value().data[oc];
    } else {
        Eigen::Map<const RowMat> wmat(wv.data.data(), d.out_ch, d.in_ch * d.k * d.k);
        Eigen::Map<RowMat> omat(out.data.data(), d.out_ch, d.out_h * d.out_w);
        omat.noalias() = wmat * (*cols);
        for (int oc = 0; oc < d.out_ch; ++oc) omat.row(oc).array() += b.value().data[oc];
    }

    auto px = x.node(), pw = w.node(), pb = b.node();
    return Var::from_node(make_result(std::move(out), {px, pw, pb}, [px, pw, pb, d, cols](VarNode& self) {
        Eigen::Map<const RowMat> gmat(self.grad.data.data(), d.out_ch, d.out_h * d.out_w);
        if (pw->requires_grad) {
            ensure_grad(*pw);
            Eigen::Map<RowMat> dwmat(pw->grad.data.data(), d.out_ch, d.in_ch * d.k * d.k);
            dwmat.noalias() += gmat * cols->transpose();
        }
        if (pb->requires_grad) {
            ensure_grad(*pb);
            const int ohw = d.out_h * d.out_w;
            for (int oc = 0; oc < d.out_ch; ++oc) {
                const float* row = self.grad.data.data() + static_cast<size_t>(oc) * ohw;
                double s = 0.0;
                for (int i = 0; i < ohw; ++i) s += row[i];
                pb->grad.data[oc] += static_cast<float>(s);
            }
        }
        if (px->requires_grad) {
            ensure_grad(*px);
            Eigen::Map<const RowMat> wmat(pw->value.data.data(), d.out_ch, d.in_ch * d.k * d.k);
            ColMat dcols = wmat.transpose() * gmat;
            col2im_accumulate(dcols, d, px->grad);
        }
    }));
}

Var add_channel_bias(const Var& x, const Var& bias) {
    check_rank3(x.value(), "add_channel_bias");
    const Tensor& xv = x.value();
    // bias may be {C} or {C,1,1}
    if (bias.value().numel() != xv.channels())
        throw std::invalid_argument("add_channel_bias: bias/channel mismatch");
    const int hw = xv.height() * xv.width();
    Tensor out = xv;
    for (int c = 0; c < xv.channels(); ++c) {
        const float bv = bias.value().data[c];
        for (int i = 0; i < hw; ++i) out.data[c * hw + i] += bv;
    }
    auto px = x.node(), pb = bias.node();
    const int ch = xv.channels();
    return Var::from_node(make_result(std::move(out), {px, pb}, [px, pb, ch, hw](VarNode& self) {
        if (px->requires_grad) accumulate(*px, self.grad);
        if (pb->requires_grad) {
            ensure_grad(*pb);
            for (int c = 0; c < ch; ++c) {
                double s = 0.0;
                for (int i = 0; i < hw; ++i) s += self.grad.data[c * hw + i];
                pb->grad.data[c] += static_cast<float>(s);
            }
        }
    }));
}

Var upsample_nearest2(const Var& x) {
    check_rank3(x.value(), "upsample_nearest2");
    const Tensor& xv = x.value();
    const int ch = xv.channels(), h = xv.height(), w = xv.width();
    Tensor out({ch, h * 2, w * 2});
    for (int c = 0; c < ch; ++c)
        for (int y = 0; y < h * 2; ++y)
            for (int xx = 0; xx < w * 2; ++xx)
                out.at(c, y, xx) = xv.at(c, y / 2, xx / 2);
    auto px = x.node();
    return Var::from_node(make_result(std::move(out), {px}, [px, ch, h, w](VarNode& self) {
        ensure_grad(*px);
        for (int c = 0; c < ch; ++c)
            for (int y = 0; y < h * 2; ++y)
                for (int xx = 0; xx < w * 2; ++xx)
                    px->grad.at(c, y / 2, xx / 2) += self.grad.at(c, y, xx);
    }));
}

Var softmax_channels(const Var& x) {
    check_rank3(x.value(), "softmax_channels");
    const Tensor& xv = x.value();
    const int ch = xv.channels();
    const int hw = xv.height() * xv.width();
    Tensor out = xv;
    for (int i = 0; i < hw; ++i) {
        float mx = -1e30f;
        for (int c = 0; c < ch; ++c) mx = std::max(mx, xv.data[c * hw + i]);
        double denom = 0.0;
        for (int c = 0; c < ch; ++c) {
            const float e = std::exp(xv.data[c * hw + i] - mx);
            out.data[c * hw + i] = e;
            denom += e;
        }
        const float inv = static_cast<float>(1.0 / denom);
        for (int c = 0; c < ch; ++c) out.data[c * hw + i] *= inv;
    }
    auto px = x.node();
    return Var::from_node(make_result(std::move(out), {px}, [px, ch, hw](VarNode& self) {
        ensure_grad(*px);
        const auto& y = self.value.data;
        const auto& g = self.grad.data;
        for (int i = 0; i < hw; ++i) {
            double dot = 0.0;
            for (int c = 0; c < ch; ++c) dot += g[c * hw + i] * y[c * hw + i];
            for (int c = 0; c < ch; ++c)
                px->grad.data[c * hw + i] +=
                    y[c * hw + i] * (g[c * hw + i] - static_cast<float>(dot));
        }
    }));
}

Var spf_filter(const Var& features, const Var& kernels) {
    check_rank3(features.value(), "spf_filter");
    check_rank3(kernels.value(), "spf_filter");
    const Tensor& fv = features.value();
    const Tensor& kv = kernels.value();
    const int n2 = kv.channels();
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n2))));
    if (n * n != n2) throw std::invalid_argument("spf_filter: kernel channels must be N*N");
    if (n % 2 == 0) throw std::invalid_argument("spf_filter: N must be odd");
    if (fv.height() != kv.height() || fv.width() != kv.width())
        throw std::invalid_argument("spf_filter: spatial mismatch " + fv.shape_str() + " vs " +
                                    kv.shape_str());
    const int ch = fv.channels(), h = fv.height(), w = fv.width(), r = n / 2;

    Tensor out({ch, h, w});
    for (int c = 0; c < ch; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    const int sy = y + dy;
                    if (sy < 0 || sy >= h) continue;
                    for (int dx = -r; dx <= r; ++dx) {
                        const int sx = x + dx;
                        if (sx < 0 || sx >= w) continue;
                        const int ki = (dy + r) * n + (dx + r);
                        acc += static_cast<double>(kv.at(ki, y, x)) * fv.at(c, sy, sx);
                    }
                }
                out.at(c, y, x) = static_cast<float>(acc);
            }
        }
    }

    auto pf = features.node(), pk = kernels.node();
    return Var::from_node(make_result(std::move(out), {pf, pk}, [pf, pk, ch, h, w, n, r](VarNode& self) {
        const Tensor& g = self.grad;
        const Tensor& fv2 = pf->value;
        const Tensor& kv2 = pk->value;
        if (pf->requires_grad) {
            ensure_grad(*pf);
            for (int c = 0; c < ch; ++c)
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const float gv = g.at(c, y, x);
                        if (gv == 0.0f) continue;
                        for (int dy = -r; dy <= r; ++dy) {
                            const int sy = y + dy;
                            if (sy < 0 || sy >= h) continue;
                            for (int dx = -r; dx <= r; ++dx) {
                                const int sx = x + dx;
                                if (sx < 0 || sx >= w) continue;
                                const int ki = (dy + r) * n + (dx + r);
                                pf->grad.at(c, sy, sx) += kv2.at(ki, y, x) * gv;
                            }
                        }
                    }
        }
        if (pk->requires_grad) {
            ensure_grad(*pk);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    for (int dy = -r; dy <= r; ++dy) {
                        const int sy = y + dy;
                        if (sy < 0 || sy >= h) continue;
                        for (int dx = -r; dx <= r; ++dx) {
                            const int sx = x + dx;
                            if (sx < 0 || sx >= w) continue;
                            const int ki = (dy + r) * n + (dx + r);
                            double acc = 0.0;
                            for (int c = 0; c < ch; ++c)
                                acc += static_cast<double>(g.at(c, y, x)) * fv2.at(c, sy, sx);
                            pk->grad.at(ki, y, x) += static_cast<float>(acc);
                        }
                    }
        }
    }));
}

Var block_avg_downsample(const Var& x, int factor) {
    check_rank3(x.value(), "block_avg_downsample");
    if (factor < 1) throw std::invalid_argument("block_avg_downsample: factor must be >= 1");
    const Tensor& xv = x.value();
    if (xv.height() % factor != 0 || xv.width() % factor != 0)
        throw std::invalid_argument("block_avg_downsample: dims not divisible by factor");
    if (factor == 1) return scale(x, 1.0f);
    const int ch = xv.channels(), oh = xv.height() / factor, ow = xv.width() / factor;
    Tensor out({ch, oh, ow});
    const double inv = 1.0 / (factor * factor);
    for (int c = 0; c < ch; ++c)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double s = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        s += xv.at(c, oy * factor + dy, ox * factor + dx);
                out.at(c, oy, ox) = static_cast<float>(s * inv);
            }
    auto px = x.node();
    return Var::from_node(make_result(std::move(out), {px}, [px, ch, oh, ow, factor](VarNode& self) {
        ensure_grad(*px);
        const float inv = 1.0f / static_cast<float>(factor * factor);
        for (int c = 0; c < ch; ++c)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const float g = self.grad.at(c, oy, ox) * inv;
                    for (int dy = 0; dy < factor; ++dy)
                        for (int dx = 0; dx < factor; ++dx)
                            px->grad.at(c, oy * factor + dy, ox * factor + dx) += g;
                }
    }));
}

Var block_replicate_upsample(const Var& x, int factor) {
    check_rank3(x.value(), "block_replicate_upsample");
    if (factor < 1) throw std::invalid_argument("block_replicate_upsample: factor must be >= 1");
    if (factor == 1) return scale(x, 1.0f);
    const Tensor& xv = x.value();
    const int ch = xv.channels(), h = xv.height(), w = xv.width();
    Tensor out({ch, h * factor, w * factor});
    for (int c = 0; c < ch; ++c)
        for (int y = 0; y < h * factor; ++y)
            for (int xx = 0; xx < w * factor; ++xx)
                out.at(c, y, xx) = xv.at(c, y / factor, xx / factor);
    auto px = x.node();
    return Var::from_node(make_result(std::move(out), {px}, [px, ch, h, w, factor](VarNode& self) {
        ensure_grad(*px);
        for (int c = 0; c < ch; ++c)
            for (int y = 0; y < h * factor; ++y)
                for (int xx = 0; xx < w * factor; ++xx)
                    px->grad.at(c, y / factor, xx / factor) += self.grad.at(c, y, xx);
    }));
}

Var gram_matrix(const Var& x) {
    check_rank3(x.value(), "gram_matrix");
    const Tensor& xv = x.value();
    const int ch = xv.channels();
    const int hw = xv.height() * xv.width();
    const float norm = 1.0f / static_cast<float>(ch) / static_cast<float>(hw);
    Tensor out({ch, ch});
    {
        Eigen::Map<const RowMat> xm(xv.data.data(), ch, hw);
        Eigen::Map<RowMat> om(out.data.data(), ch, ch);
        om.noalias() = xm * xm.transpose() * norm;
    }
    auto px = x.node();
    return Var::from_node(make_result(std::move(out), {px}, [px, ch, hw, norm](VarNode& self) {
        ensure_grad(*px);
        Eigen::Map<const RowMat> gm(self.grad.data.data(), ch, ch);
        Eigen::Map<const RowMat> xm(px->value.data.data(), ch, hw);
        Eigen::Map<RowMat> dxm(px->grad.data.data(), ch, hw);
        dxm.noalias() += (gm + gm.transpose()) * xm * norm;
    }));
}

}  // namespace tamp
