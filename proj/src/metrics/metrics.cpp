#include "metrics/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "train/losses.hpp"

namespace tamp {

double psnr(const Tensor& pred, const Tensor& target, double value_range) {
    check_same_shape(pred, target, "psnr");
    double mse = 0.0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - target.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(pred.data.size());
    if (mse < 1e-12) return 100.0;
    return std::min(100.0, 10.0 * std::log10(value_range * value_range / mse));
}

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(size);
    const int half = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - half;
        w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// separable Gaussian blur of one channel plane (reflect-free: valid region only
// is consumed by the caller via the same window everywhere, borders clamp)
void blur_plane(const std::vector<double>& src, int h, int w, const std::vector<double>& win,
                std::vector<double>& tmp, std::vector<double>& dst) {
    const int half = static_cast<int>(win.size()) / 2;
    tmp.assign(src.size(), 0.0);
    dst.assign(src.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) {
                const int xx = std::min(w - 1, std::max(0, x + k));
                acc += win[k + half] * src[y * w + xx];
            }
            tmp[y * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) {
                const int yy = std::min(h - 1, std::max(0, y + k));
                acc += win[k + half] * tmp[yy * w + x];
            }
            dst[y * w + x] = acc;
        }
}

}  // namespace

double ssim(const Tensor& pred, const Tensor& target, int window, double k1, double k2) {
    check_same_shape(pred, target, "ssim");
    check_rank3(pred, "ssim");
    if (pred.height() < window || pred.width() < window)
        throw std::invalid_argument("ssim: image smaller than window");

    const int h = pred.height(), w = pred.width(), ch = pred.channels();
    const auto win = gaussian_window(window, 1.5);
    const double c1 = (k1 * 1.0) * (k1 * 1.0);  // dynamic range 1 after mapping
    const double c2 = (k2 * 1.0) * (k2 * 1.0);

    std::vector<double> a(h * w), b(h * w), aa(h * w), bb(h * w), ab(h * w);
    std::vector<double> mu_a, mu_b, m_aa, m_bb, m_ab, tmp;
    double total = 0.0;
    for (int c = 0; c < ch; ++c) {
        for (int i = 0; i < h * w; ++i) {
            a[i] = (pred.data[c * h * w + i] + 1.0) * 0.5;
            b[i] = (target.data[c * h * w + i] + 1.0) * 0.5;
            aa[i] = a[i] * a[i];
            bb[i] = b[i] * b[i];
            ab[i] = a[i] * b[i];
        }
        blur_plane(a, h, w, win, tmp, mu_a);
        blur_plane(b, h, w, win, tmp, mu_b);
        blur_plane(aa, h, w, win, tmp, m_aa);
        blur_plane(bb, h, w, win, tmp, m_bb);
        blur_plane(ab, h, w, win, tmp, m_ab);
        double acc = 0.0;
        for (int i = 0; i < h * w; ++i) {
            const double va = m_aa[i] - mu_a[i] * mu_a[i];
            const double vb = m_bb[i] - mu_b[i] * mu_b[i];
            const double cov = m_ab[i] - mu_a[i] * mu_b[i];
            const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
            const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
            acc += num / den;
        }
        total += acc / (h * w);
    }
    return total / ch;
}

double l1_metric(const Tensor& pred, const Tensor& target) {
    return l1_loss(Var(pred), Var(target)).value().data[0];
}

double perceptual_distance(const Tensor& pred, const Tensor& target,
                           const FeatureExtractor& extractor) {
    return perceptual_loss(Var(pred), Var(target), extractor).value().data[0];
}

}  // namespace tamp
