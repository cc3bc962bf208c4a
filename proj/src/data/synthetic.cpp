#include "data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "data/masks.hpp"
#include "io/imageio.hpp"

namespace fs = std::filesystem;

namespace tamp {

DatasetCounts scaled_counts(double subset) {
    if (!(subset > 0.0 && subset <= 1.0))
        throw std::invalid_argument("scaled_counts: subset must be in (0,1]");
    DatasetCounts full;
    if (subset == 1.0) return full;
    auto sc = [subset](int n) { return std::max(1, static_cast<int>(std::lround(n * subset))); };
    DatasetCounts c;
    c.train_images = sc(full.train_images);
    c.val_images = sc(full.val_images);
    c.test_images = sc(full.test_images);
    c.train_pairs_per_bin = sc(full.train_pairs_per_bin);
    c.val_pairs_per_bin = sc(full.val_pairs_per_bin);
    c.test_pairs_per_bin = sc(full.test_pairs_per_bin);
    return c;
}

namespace {

struct Wave {
    double fy, fx, phase, amp;
};

float eval_waves(const std::vector<Wave>& waves, double y, double x) {
    double v = 0.0;
    for (const auto& w : waves) v += w.amp * std::cos(w.fy * y + w.fx * x + w.phase);
    return static_cast<float>(v);
}

void add_disk(Tensor& img, double cy, double cx, double radius, const float color[3]) {
    const int h = img.height(), w = img.width();
    for (int y = std::max(0, (int)(cy - radius)); y <= std::min(h - 1, (int)(cy + radius)); ++y)
        for (int x = std::max(0, (int)(cx - radius)); x <= std::min(w - 1, (int)(cx + radius)); ++x) {
            const double dy = y - cy, dx = x - cx;
            if (dy * dy + dx * dx <= radius * radius)
                for (int c = 0; c < 3; ++c) img.at(c, y, x) = color[c];
        }
}

}  // namespace

std::pair<Tensor, Tensor> synth_scene_pair(int resolution, Rng& rng) {
    const int res = resolution;
    std::vector<Wave> waves(6);
    for (auto& w : waves) {
        w.fy = (rng.uniform() * 6.0 + 0.5) * 2.0 * M_PI / res;
        w.fx = (rng.uniform() * 6.0 + 0.5) * 2.0 * M_PI / res;
        w.phase = rng.uniform() * 2.0 * M_PI;
        w.amp = 0.15 + 0.2 * rng.uniform();
    }
    float tint_a[3], tint_b[3];
    for (int c = 0; c < 3; ++c) {
        tint_a[c] = rng.uniformf(-0.25f, 0.25f);
        tint_b[c] = tint_a[c] + rng.uniformf(-0.3f, 0.3f);  // appearance shift
    }
    Tensor a({3, res, res}), b({3, res, res});
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const float base = eval_waves(waves, y, x);
            for (int c = 0; c < 3; ++c) {
                a.at(c, y, x) = base * (1.0f + 0.1f * c) + tint_a[c];
                b.at(c, y, x) = base * (1.0f + 0.1f * c) + tint_b[c];
            }
        }
    // object discrepancy: a couple of disks present in only one of the images
    const int n_objects = 1 + rng.uniform_int(3);
    for (int i = 0; i < n_objects; ++i) {
        float color[3];
        for (auto& c : color) c = rng.uniformf(-0.9f, 0.9f);
        const double cy = rng.uniform() * res, cx = rng.uniform() * res;
        const double radius = res * (0.05 + 0.1 * rng.uniform());
        add_disk(rng.uniform() < 0.5 ? a : b, cy, cx, radius, color);
    }
    for (auto* img : {&a, &b})
        for (auto& v : img->data) v = std::min(1.0f, std::max(-1.0f, v));
    return {std::move(a), std::move(b)};
}

SyntheticSourcePaths generate_synthetic_sources(const SyntheticSourceSpec& spec) {
    const DatasetCounts counts = scaled_counts(spec.subset);
    const fs::path root(spec.out_root);
    const fs::path image_root = root / "images";
    const fs::path mask_dir = root / "masks";
    fs::create_directories(mask_dir);

    Rng rng(spec.seed ^ 0x5CE11E5ULL);

    const struct {
        const char* split;
        int n;
    } splits[] = {{"train", counts.train_images}, {"val", counts.val_images},
                  {"test", counts.test_images}};
    for (const auto& s : splits) {
        for (int i = 0; i < s.n; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "pair_%05d", i);
            const fs::path dir = image_root / s.split / name;
            fs::create_directories(dir);
            Rng pair_rng = rng.fork(static_cast<uint64_t>(i) * 31 + 7);
            auto [a, b] = synth_scene_pair(spec.resolution, pair_rng);
            write_ppm((dir / "t1.ppm").string(), a);
            write_ppm((dir / "t2.ppm").string(), b);
        }
    }

    const int max_pairs = std::max({counts.train_pairs_per_bin, counts.val_pairs_per_bin,
                                    counts.test_pairs_per_bin});
    const int pool_per_bin = spec.mask_pool_per_bin > 0
                                 ? spec.mask_pool_per_bin
                                 : std::max(8, std::min(350, max_pairs / 2));
    int index = 0;
    for (const auto& bin : standard_bins()) {
        for (int i = 0; i < pool_per_bin; ++i, ++index) {
            Rng mask_rng = rng.fork(0xA5000ULL + index);
            const Tensor mask = generate_irregular_mask(spec.resolution, bin.lo_percent / 100.0,
                                                        bin.hi_percent / 100.0, mask_rng);
            char name[32];
            std::snprintf(name, sizeof(name), "mask_%05d.pgm", index);
            write_pgm((mask_dir / name).string(), mask);
        }
    }

    return SyntheticSourcePaths{image_root.string(), mask_dir.string()};
}

}  // namespace tamp
