#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace tamp {

// Full-scale reference counts for the street benchmark layout.
struct DatasetCounts {
    int train_images = 816, val_images = 256, test_images = 290;
    int train_pairs_per_bin = 1400, val_pairs_per_bin = 200, test_pairs_per_bin = 400;
};

// Counts scaled by a subset fraction; per-bin balance is preserved because the
// same scaled count applies to each bin.
DatasetCounts scaled_counts(double subset);

// Deterministic synthetic scene pair: shared layered structure plus per-image
// tint/shape differences standing in for temporal change. Values in [-1,1].
std::pair<Tensor, Tensor> synth_scene_pair(int resolution, Rng& rng);

struct SyntheticSourceSpec {
    std::string out_root;
    int resolution = 64;
    double subset = 1.0;
    uint64_t seed = 0;
    int mask_pool_per_bin = 0;  // 0 -> derived from subset
};

struct SyntheticSourcePaths {
    std::string image_root;  // contains train/ val/ test/
    std::string mask_dir;    // flat pool, all bins mixed
};

// Writes scene-pair images (lossless) and an irregular-mask pool sized so each
// ratio bin is populated. Clearly synthetic stand-in data: lets the whole
// pipeline run without any external download.
SyntheticSourcePaths generate_synthetic_sources(const SyntheticSourceSpec& spec);

}  // namespace tamp
