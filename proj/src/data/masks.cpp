#include "data/masks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "complement/complement.hpp"
#include "io/imageio.hpp"

namespace fs = std::filesystem;

namespace tamp {

std::string RatioBin::label() const {
    return std::to_string(lo_percent) + "-" + std::to_string(hi_percent);
}

bool RatioBin::contains(double ratio) const {
    return ratio >= lo_percent / 100.0 && ratio < hi_percent / 100.0;
}

const std::vector<RatioBin>& standard_bins() {
    static const std::vector<RatioBin> bins = {{20, 30}, {30, 40}, {40, 50}, {50, 60}};
    return bins;
}

int bin_index_for_ratio(double ratio) {
    const auto& bins = standard_bins();
    for (size_t i = 0; i < bins.size(); ++i)
        if (bins[i].contains(ratio)) return static_cast<int>(i);
    return -1;
}

namespace {

void stamp_disk(Tensor& mask, double cy, double cx, double radius) {
    const int h = mask.height(), w = mask.width();
    const int r = static_cast<int>(std::ceil(radius));
    const int y0 = std::max(0, static_cast<int>(cy) - r), y1 = std::min(h - 1, static_cast<int>(cy) + r);
    const int x0 = std::max(0, static_cast<int>(cx) - r), x1 = std::min(w - 1, static_cast<int>(cx) + r);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dy = y - cy, dx = x - cx;
            if (dy * dy + dx * dx <= radius * radius) mask.at(0, y, x) = 0.0f;
        }
}

double missing_fraction(const Tensor& mask) {
    size_t zeros = 0;
    for (float v : mask.data)
        if (v == 0.0f) ++zeros;
    return static_cast<double>(zeros) / mask.data.size();
}

// One meandering thick stroke; erases (sets to 0) along a momentum walk.
void draw_stroke(Tensor& mask, Rng& rng) {
    const int h = mask.height(), w = mask.width();
    double y = rng.uniform() * h;
    double x = rng.uniform() * w;
    double angle = rng.uniform() * 2.0 * M_PI;
    const double radius = std::max(1.5, (0.02 + 0.05 * rng.uniform()) * std::min(h, w));
    const int steps = 4 + rng.uniform_int(12);
    const double step_len = radius * 1.2;
    for (int s = 0; s < steps; ++s) {
        stamp_disk(mask, y, x, radius);
        angle += (rng.uniform() - 0.5) * 1.6;
        y += std::sin(angle) * step_len;
        x += std::cos(angle) * step_len;
        if (y < 0 || y >= h || x < 0 || x >= w) {
            y = rng.uniform() * h;
            x = rng.uniform() * w;
        }
    }
}

}  // namespace

Tensor generate_irregular_mask(int resolution, double ratio_lo, double ratio_hi, Rng& rng) {
    if (resolution < 8) throw std::invalid_argument("generate_irregular_mask: resolution too small");
    if (!(ratio_lo >= 0.0 && ratio_lo < ratio_hi && ratio_hi <= 1.0))
        throw std::invalid_argument("generate_irregular_mask: bad ratio range");
    for (int attempt = 0; attempt < 64; ++attempt) {
        Tensor mask({1, resolution, resolution}, 1.0f);
        // strokes accumulate; ratio grows until it enters (or overshoots) the bin
        for (int guard = 0; guard < 4096; ++guard) {
            draw_stroke(mask, rng);
            const double r = missing_fraction(mask);
            if (r >= ratio_hi) break;  // overshot, retry from scratch
            if (r >= ratio_lo) return mask;
        }
    }
    throw std::runtime_error("generate_irregular_mask: failed to hit ratio range");
}

BinnedMasks bin_masks(const std::string& mask_dir, const std::string& mask_polarity) {
    if (!fs::is_directory(mask_dir))
        throw std::runtime_error("bin_masks: not a directory: " + mask_dir);
    const bool known_white = mask_polarity == "known-white";
    if (!known_white && mask_polarity != "missing-white")
        throw std::invalid_argument("bin_masks: polarity must be known-white or missing-white");

    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(fs::absolute(mask_dir)))
        if (e.is_regular_file()) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("bin_masks: no mask files in " + mask_dir);

    BinnedMasks out;
    out.per_bin.resize(standard_bins().size());
    for (const auto& path : files) {
        Tensor gray = read_image_gray(path);
        // binarize at 0.5, normalize to 1 = known
        for (auto& v : gray.data) {
            const bool white = v > 0.5f;
            v = (white == known_white) ? 1.0f : 0.0f;
        }
        const double ratio = mask_ratio(gray);
        const int bin = bin_index_for_ratio(ratio);
        if (bin < 0) {
            ++out.excluded;
            continue;
        }
        out.per_bin[bin].push_back(MaskRecord{path, ratio, bin});
    }
    return out;
}

std::vector<MaskPair> pair_masks_for_bin(const std::vector<MaskRecord>& pool, int bin, int count,
                                         Rng& rng) {
    if (pool.empty()) throw std::runtime_error("pair_masks_for_bin: empty bin " +
                                               standard_bins()[bin].label());
    if (count < 0) throw std::invalid_argument("pair_masks_for_bin: negative count");
    std::vector<MaskPair> pairs;
    pairs.reserve(count);
    for (int i = 0; i < count; ++i) {
        const int a = rng.uniform_int(static_cast<int>(pool.size()));
        int b = rng.uniform_int(static_cast<int>(pool.size()));
        if (pool.size() > 1 && b == a) b = (b + 1) % static_cast<int>(pool.size());
        pairs.push_back(MaskPair{pool[a], pool[b], bin});
    }
    return pairs;
}

}  // namespace tamp
