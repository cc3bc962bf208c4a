#pragma once

#include <string>

#include "core/tensor.hpp"

namespace tamp {

// Shared image/mask conventions:
//   images   (3,H,W), values in [-1,1]
//   masks    (1,H,W), values exactly {0,1}; 1 = pixel known, 0 = pixel missing
//   damaged  images are zero-filled where the mask is 0
struct ScenePair {
    Tensor gt_1, gt_2;            // ground truth images
    Tensor damaged_1, damaged_2;  // gt * mask (missing pixels zeroed)
    Tensor mask_1, mask_2;
    std::string time_gap_tag;
};

void validate_image(const Tensor& img, const char* what);
void validate_mask(const Tensor& m, const char* what);
void validate_scene_pair(const ScenePair& p);

// output[p] = 1 - m[p]
Tensor invert_mask(const Tensor& m);

// fraction of missing (zero) pixels
double mask_ratio(const Tensor& m);

// Copy-paste complementation: each image fills its holes from the counterpart;
// pixels missing in both stay zero.
struct NaiveComplementResult {
    Tensor complemented_1, complemented_2;
};
NaiveComplementResult naive_complement(const Tensor& damaged_1, const Tensor& mask_1,
                                       const Tensor& damaged_2, const Tensor& mask_2);

// Elementwise product; a (1,H,W) confidence broadcasts across image channels.
Tensor apply_confidence(const Tensor& img, const Tensor& confidence);

// Elementwise AND of binary masks.
Tensor mask_intersection(const Tensor& m1, const Tensor& m2);

}  // namespace tamp
