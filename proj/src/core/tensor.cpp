#include "core/tensor.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tamp {

namespace {
size_t product(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
        n *= static_cast<size_t>(d);
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape_in, float fill) : shape(std::move(shape_in)) {
    data.assign(product(shape), fill);
}

Tensor Tensor::full(std::vector<int> shape_in, float v) { return Tensor(std::move(shape_in), v); }

Tensor Tensor::zeros_like(const Tensor& o) { return Tensor(o.shape, 0.0f); }

Tensor Tensor::scalar(float v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
}

int Tensor::numel() const { return static_cast<int>(data.size()); }

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

float Tensor::min_value() const {
    float m = std::numeric_limits<float>::infinity();
    for (float v : data) m = std::min(m, v);
    return m;
}

float Tensor::max_value() const {
    float m = -std::numeric_limits<float>::infinity();
    for (float v : data) m = std::max(m, v);
    return m;
}

double Tensor::sum() const {
    double s = 0.0;
    for (float v : data) s += v;
    return s;
}

double Tensor::mean_abs() const {
    if (data.empty()) return 0.0;
    double s = 0.0;
    for (float v : data) s += std::fabs(v);
    return s / static_cast<double>(data.size());
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
}

void check_rank3(const Tensor& t, const char* op) {
    if (t.rank() != 3) {
        throw std::invalid_argument(std::string(op) + ": expected rank-3 tensor, got " + t.shape_str());
    }
}

}  // namespace tamp
