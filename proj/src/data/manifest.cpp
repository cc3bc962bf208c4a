#include "data/manifest.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace tamp {

namespace {

// Paths are stored relative to the manifest file, so identical builds into
// different directories serialize byte-for-byte identically.
std::string relativize(const std::string& p, const fs::path& base) {
    const fs::path rel = fs::path(p).lexically_relative(base);
    return rel.empty() ? p : rel.generic_string();
}

std::string absolutize(const std::string& p, const fs::path& base) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
}

}  // namespace

void DatasetManifest::save(const std::string& path) const {
    const fs::path base = fs::absolute(fs::path(path)).parent_path();
    json j;
    j["version"] = version;
    j["split"] = split;
    j["seed"] = seed;
    j["resolution"] = resolution;
    j["mask_polarity"] = mask_polarity;
    j["image_pair_count"] = image_pair_count;
    j["mask_pair_count"] = records.size();
    j["bin_counts"] = bin_counts;
    json recs = json::array();
    for (const auto& r : records) {
        recs.push_back({{"pair_id", r.pair_id},
                        {"image_1", relativize(r.image_1, base)},
                        {"image_2", relativize(r.image_2, base)},
                        {"mask_1", relativize(r.mask_1, base)},
                        {"mask_2", relativize(r.mask_2, base)},
                        {"bin", r.bin},
                        {"ratio_1", r.ratio_1},
                        {"ratio_2", r.ratio_2}});
    }
    j["records"] = std::move(recs);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("failed to open manifest for write: " + path);
    f << j.dump(2) << '\n';
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    const fs::path base = fs::absolute(fs::path(path)).parent_path();
    std::ifstream f(path);
    if (!f) throw std::runtime_error("failed to open manifest: " + path);
    json j;
    f >> j;
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    if (m.version != 1)
        throw std::runtime_error("unsupported manifest version " + std::to_string(m.version));
    m.split = j.at("split").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    m.resolution = j.at("resolution").get<int>();
    m.mask_polarity = j.at("mask_polarity").get<std::string>();
    m.image_pair_count = j.at("image_pair_count").get<int>();
    m.bin_counts = j.at("bin_counts").get<std::map<std::string, int>>();
    for (const auto& r : j.at("records")) {
        ManifestRecord rec;
        rec.pair_id = r.at("pair_id").get<std::string>();
        rec.image_1 = absolutize(r.at("image_1").get<std::string>(), base);
        rec.image_2 = absolutize(r.at("image_2").get<std::string>(), base);
        rec.mask_1 = absolutize(r.at("mask_1").get<std::string>(), base);
        rec.mask_2 = absolutize(r.at("mask_2").get<std::string>(), base);
        rec.bin = r.at("bin").get<std::string>();
        rec.ratio_1 = r.at("ratio_1").get<double>();
        rec.ratio_2 = r.at("ratio_2").get<double>();
        m.records.push_back(std::move(rec));
    }
    return m;
}

std::vector<ImagePairSource> scan_image_pairs(const std::string& image_root,
                                              const std::string& split) {
    const fs::path dir = fs::absolute(fs::path(image_root) / split);
    if (!fs::is_directory(dir))
        throw std::runtime_error("scan_image_pairs: missing split directory " + dir.string());
    std::vector<std::string> pair_dirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) pair_dirs.push_back(e.path().string());
    std::sort(pair_dirs.begin(), pair_dirs.end());
    if (pair_dirs.empty())
        throw std::runtime_error("scan_image_pairs: no pair directories under " + dir.string());

    std::vector<ImagePairSource> out;
    for (const auto& pd : pair_dirs) {
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(pd))
            if (e.is_regular_file()) files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        if (files.size() < 2)
            throw std::runtime_error("scan_image_pairs: pair directory needs two images: " + pd);
        out.push_back(ImagePairSource{fs::path(pd).filename().string(), files[0], files[1]});
    }
    return out;
}

DatasetManifest build_manifest(const std::vector<ImagePairSource>& images,
                               const std::vector<std::vector<MaskPair>>& pairs_per_bin,
                               const std::string& split, uint64_t seed, int resolution,
                               const std::string& mask_polarity) {
    if (images.empty()) throw std::invalid_argument("build_manifest: no image pairs");
    if (pairs_per_bin.size() != standard_bins().size())
        throw std::invalid_argument("build_manifest: expected one mask-pair list per bin");
    for (const auto& img : images)
        if (!fs::exists(img.image_1) || !fs::exists(img.image_2))
            throw std::runtime_error("build_manifest: missing image file for " + img.pair_id);

    DatasetManifest m;
    m.split = split;
    m.seed = seed;
    m.resolution = resolution;
    m.mask_polarity = mask_polarity;
    m.image_pair_count = static_cast<int>(images.size());

    std::vector<int> order(images.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(seed ^ 0xBD1FE57ULL);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(i + 1)]);

    size_t cursor = 0;
    for (size_t b = 0; b < pairs_per_bin.size(); ++b) {
        const std::string label = standard_bins()[b].label();
        for (const auto& mp : pairs_per_bin[b]) {
            const ImagePairSource& img = images[order[cursor % order.size()]];
            ++cursor;
            ManifestRecord rec;
            rec.pair_id = img.pair_id;
            rec.image_1 = img.image_1;
            rec.image_2 = img.image_2;
            rec.mask_1 = mp.first.path;
            rec.mask_2 = mp.second.path;
            rec.bin = label;
            rec.ratio_1 = mp.first.ratio;
            rec.ratio_2 = mp.second.ratio;
            m.records.push_back(std::move(rec));
            m.bin_counts[label]++;
        }
    }
    return m;
}

}  // namespace tamp
