#pragma once

#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace tamp {

// Missing-pixel ratio bins, percent, inclusive-exclusive [lo, hi).
struct RatioBin {
    int lo_percent;
    int hi_percent;
    std::string label() const;
    bool contains(double ratio) const;
};

const std::vector<RatioBin>& standard_bins();  // 20-30, 30-40, 40-50, 50-60
int bin_index_for_ratio(double ratio);         // -1 when outside [20%, 60%)

struct MaskRecord {
    std::string path;
    double ratio = 0.0;  // measured missing fraction
    int bin = -1;
};

// Irregular mask from random thick-stroke walks; strokes are added until the
// missing ratio lands inside [lo, hi). Returned mask follows the 1=known
// convention.
Tensor generate_irregular_mask(int resolution, double ratio_lo, double ratio_hi, Rng& rng);

struct BinnedMasks {
    std::vector<std::vector<MaskRecord>> per_bin;  // aligned with standard_bins()
    int excluded = 0;                              // masks outside [20%, 60%)
};

// Scans a directory of mask images, measures ratios, assigns bins. Masks whose
// ratio falls outside the binned range are excluded and counted.
BinnedMasks bin_masks(const std::string& mask_dir, const std::string& mask_polarity);

struct MaskPair {
    MaskRecord first, second;
    int bin = -1;
};

// Random within-bin pairing; deterministic under seed. Draws with replacement
// when a bin's pool is smaller than twice the request (the caller logs this).
std::vector<MaskPair> pair_masks_for_bin(const std::vector<MaskRecord>& pool, int bin, int count,
                                         Rng& rng);

}  // namespace tamp
