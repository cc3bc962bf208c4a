#include <doctest.h>

#include <filesystem>

#include "data/loader.hpp"
#include "data/synthetic.hpp"
#include "io/imageio.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace tamp;
using namespace tamp::testing;

namespace {

// mask with an exact missing fraction (zeros at the front)
Tensor mask_with_ratio(int res, double ratio) {
    Tensor m({1, res, res}, 1.0f);
    const int zeros = static_cast<int>(std::lround(ratio * res * res));
    for (int i = 0; i < zeros; ++i) m.data[i] = 0.0f;
    return m;
}

}  // namespace

TEST_CASE("bin boundaries are inclusive-exclusive") {
    CHECK(bin_index_for_ratio(0.25) == 0);
    CHECK(bin_index_for_ratio(0.30) == 1);  // boundary goes to the upper bin
    CHECK(bin_index_for_ratio(0.5999) == 3);
    CHECK(bin_index_for_ratio(0.60) == -1);
    CHECK(bin_index_for_ratio(0.15) == -1);
    CHECK(standard_bins()[0].label() == "20-30");
}

TEST_CASE("generated irregular masks are binary and land in the requested bin") {
    Rng rng(1);
    for (const auto& bin : standard_bins()) {
        for (int trial = 0; trial < 3; ++trial) {
            const Tensor m =
                generate_irregular_mask(64, bin.lo_percent / 100.0, bin.hi_percent / 100.0, rng);
            for (float v : m.data) CHECK((v == 0.0f || v == 1.0f));
            const double r = mask_ratio(m);
            CHECK(r >= bin.lo_percent / 100.0);
            CHECK(r < bin.hi_percent / 100.0);
        }
    }
}

TEST_CASE("bin_masks assigns by measured ratio and excludes out-of-range masks") {
    ScopedTempDir dir("binmask");
    // known ratios: two in 20-30, one per other bin, two out of range
    const double ratios[] = {0.22, 0.28, 0.35, 0.45, 0.55, 0.10, 0.70};
    for (size_t i = 0; i < std::size(ratios); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "m%02zu.pgm", i);
        write_pgm((dir.path() / name).string(), mask_with_ratio(32, ratios[i]));
    }
    const BinnedMasks binned = bin_masks(dir.str(), "known-white");
    CHECK(binned.per_bin[0].size() == 2);
    CHECK(binned.per_bin[1].size() == 1);
    CHECK(binned.per_bin[2].size() == 1);
    CHECK(binned.per_bin[3].size() == 1);
    CHECK(binned.excluded == 2);

    for (const auto& rec : binned.per_bin[0]) CHECK(standard_bins()[rec.bin].contains(rec.ratio));

    CHECK_THROWS_AS(bin_masks((dir.path() / "nope").string(), "known-white"), std::runtime_error);
}

TEST_CASE("bin_masks honors polarity") {
    ScopedTempDir dir("polarity");
    // stored with white = missing: 25% white pixels
    Tensor inverted = mask_with_ratio(32, 0.75);  // 75% zeros as written
    write_pgm((dir.path() / "m.pgm").string(), inverted);
    // read as missing-white: white (25%) becomes missing -> bin 20-30
    const BinnedMasks binned = bin_masks(dir.str(), "missing-white");
    CHECK(binned.per_bin[0].size() == 1);
}

TEST_CASE("pair_masks is deterministic and stays within the bin") {
    std::vector<MaskRecord> pool;
    for (int i = 0; i < 10; ++i) pool.push_back(MaskRecord{"m" + std::to_string(i), 0.25, 0});

    Rng rng_a(42), rng_b(42);
    const auto pairs_a = pair_masks_for_bin(pool, 0, 25, rng_a);
    const auto pairs_b = pair_masks_for_bin(pool, 0, 25, rng_b);
    REQUIRE(pairs_a.size() == 25);
    for (size_t i = 0; i < pairs_a.size(); ++i) {
        CHECK(pairs_a[i].first.path == pairs_b[i].first.path);
        CHECK(pairs_a[i].second.path == pairs_b[i].second.path);
        CHECK(pairs_a[i].bin == 0);
    }
    CHECK_THROWS_AS(pair_masks_for_bin({}, 0, 5, rng_a), std::runtime_error);
}

TEST_CASE("synthetic sources, manifest build, round trip, and loading") {
    ScopedTempDir dir("synth");
    SyntheticSourceSpec spec;
    spec.out_root = dir.str();
    spec.resolution = 16;
    spec.subset = 0.004;  // 3/1/1 image pairs, 6/1/2 mask pairs per bin
    spec.seed = 7;
    const auto paths = generate_synthetic_sources(spec);

    const auto images = scan_image_pairs(paths.image_root, "train");
    CHECK(images.size() == 3);

    const BinnedMasks binned = bin_masks(paths.mask_dir, "known-white");
    for (const auto& bin : binned.per_bin) CHECK(bin.size() >= 8);

    Rng rng(3);
    std::vector<std::vector<MaskPair>> per_bin;
    for (size_t b = 0; b < standard_bins().size(); ++b)
        per_bin.push_back(pair_masks_for_bin(binned.per_bin[b], static_cast<int>(b), 6, rng));

    DatasetManifest m = build_manifest(images, per_bin, "train", 99, 16, "known-white");
    CHECK(m.records.size() == 24);
    CHECK(m.image_pair_count == 3);
    for (const auto& [bin, count] : m.bin_counts) CHECK(count == 6);

    // every referenced file exists
    for (const auto& rec : m.records) {
        CHECK(fs::exists(rec.image_1));
        CHECK(fs::exists(rec.image_2));
        CHECK(fs::exists(rec.mask_1));
        CHECK(fs::exists(rec.mask_2));
        CHECK(standard_bins()[bin_index_for_ratio(rec.ratio_1)].label() == rec.bin);
        CHECK(standard_bins()[bin_index_for_ratio(rec.ratio_2)].label() == rec.bin);
    }

    // serialization round trip is lossless
    const fs::path mpath = dir.path() / "manifest.json";
    m.save(mpath.string());
    const DatasetManifest loaded = DatasetManifest::load(mpath.string());
    CHECK(loaded.records.size() == m.records.size());
    const fs::path mpath2 = dir.path() / "manifest2.json";
    loaded.save(mpath2.string());
    CHECK(read_file_bytes(mpath) == read_file_bytes(mpath2));

    // loading produces a valid preprocessed pair
    PreprocessSpec prep;
    prep.resolution = 16;
    prep.mode = TaskMode::kTvDuo;
    const ScenePair pair = load_sample(loaded.records[0], prep);
    CHECK(pair.gt_1.shape == std::vector<int>{3, 16, 16});
    CHECK(pair.mask_1.shape == std::vector<int>{1, 16, 16});
    CHECK(pair.gt_1.min_value() >= -1.0f);
    CHECK(pair.gt_1.max_value() <= 1.0f);
    // zero-fill consistency: damaged * mask == damaged
    CHECK(bitwise_equal(apply_confidence(pair.damaged_1, pair.mask_1), pair.damaged_1));

    // tvRef keeps the reference branch intact
    prep.mode = TaskMode::kTvRef;
    const ScenePair ref_pair = load_sample(loaded.records[0], prep);
    for (float v : ref_pair.mask_1.data) CHECK(v == 1.0f);
    CHECK(bitwise_equal(ref_pair.damaged_1, ref_pair.gt_1));
}

TEST_CASE("scaled counts preserve full-scale totals and per-bin balance") {
    const DatasetCounts full = scaled_counts(1.0);
    CHECK(full.train_images == 816);
    CHECK(full.val_images == 256);
    CHECK(full.test_images == 290);
    CHECK(full.train_pairs_per_bin * 4 == 5600);
    CHECK(full.val_pairs_per_bin * 4 == 800);
    CHECK(full.test_pairs_per_bin * 4 == 1600);

    const DatasetCounts tiny = scaled_counts(0.01);
    CHECK(tiny.train_images == 8);
    CHECK(tiny.test_pairs_per_bin == 4);
    CHECK_THROWS_AS(scaled_counts(0.0), std::invalid_argument);
}

TEST_CASE("image io round trip through the lossless format") {
    ScopedTempDir dir("imgio");
    Rng rng(5);
    // quantized values survive a write/read round trip exactly
    Tensor img({3, 8, 8});
    for (auto& v : img.data)
        v = static_cast<float>(rng.uniform_int(256)) / 255.0f * 2.0f - 1.0f;
    const fs::path p = dir.path() / "x.ppm";
    write_ppm(p.string(), img);
    Tensor back = read_image_rgb(p.string());
    for (auto& v : back.data) v = v * 2.0f - 1.0f;
    CHECK(max_abs_diff(back, img) < 1e-6);
}

TEST_CASE("resize keeps masks binary") {
    Rng rng(6);
    const Tensor m = random_binary_mask(32, 32, rng);
    const Tensor small = resize_nearest(m, 16, 16);
    for (float v : small.data) CHECK((v == 0.0f || v == 1.0f));
}
