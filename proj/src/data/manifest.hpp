#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "data/masks.hpp"

namespace tamp {

struct ManifestRecord {
    std::string pair_id;
    std::string image_1, image_2;
    std::string mask_1, mask_2;
    std::string bin;
    double ratio_1 = 0.0, ratio_2 = 0.0;
};

// Split-level dataset description: every record joins one scene image pair
// with one within-bin mask pair. Serialized as versioned JSON.
struct DatasetManifest {
    int version = 1;
    std::string split;  // train | val | test
    uint64_t seed = 0;
    int resolution = 256;
    std::string mask_polarity = "known-white";
    int image_pair_count = 0;  // unique image pairs referenced
    std::vector<ManifestRecord> records;
    std::map<std::string, int> bin_counts;

    void save(const std::string& path) const;
    static DatasetManifest load(const std::string& path);
};

struct ImagePairSource {
    std::string pair_id;
    std::string image_1, image_2;
};

// Scans image_root/<split>/<pair_dir>/ for scene pairs; each pair directory
// holds two images, sorted name order giving (t1, t2).
std::vector<ImagePairSource> scan_image_pairs(const std::string& image_root,
                                              const std::string& split);

// Joins image pairs with within-bin mask pairs: image order is shuffled under
// the seed and walked cyclically so every scene is used near-equally.
DatasetManifest build_manifest(const std::vector<ImagePairSource>& images,
                               const std::vector<std::vector<MaskPair>>& pairs_per_bin,
                               const std::string& split, uint64_t seed, int resolution,
                               const std::string& mask_polarity);

}  // namespace tamp
