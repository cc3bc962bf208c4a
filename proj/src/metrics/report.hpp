#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "data/loader.hpp"
#include "metrics/metrics.hpp"

namespace tamp {

struct MetricAccumulator {
    double psnr_sum = 0.0, ssim_sum = 0.0, l1_sum = 0.0, pct_sum = 0.0;
    int count = 0;

    void add(double p, double s, double l, double d) {
        psnr_sum += p;
        ssim_sum += s;
        l1_sum += l;
        pct_sum += d;
        ++count;
    }
    double psnr_mean() const { return count ? psnr_sum / count : 0.0; }
    double ssim_mean() const { return count ? ssim_sum / count : 0.0; }
    double l1_mean() const { return count ? l1_sum / count : 0.0; }
    double pct_mean() const { return count ? pct_sum / count : 0.0; }
};

// Per-bin, per-branch means over a test split. tvDuo reports both branches
// separately; tvRef reports the damaged target branch only.
struct MetricReport {
    TaskMode mode = TaskMode::kTvDuo;
    // cells[bin][branch]; branch 0/1 = image 1/2
    std::vector<std::array<MetricAccumulator, 2>> cells;

    std::vector<int> branches_reported() const;
    std::string table_text() const;
    void save(const std::string& text_path, const std::string& json_path) const;
};

// Filename contract between the sampling and evaluation commands.
std::string output_image_name(size_t record_index, int branch);

// Computes the report from manifest records and the corresponding lossless
// output files in outputs_dir.
MetricReport evaluate_suite(const DatasetManifest& manifest, const std::string& outputs_dir,
                            const PreprocessSpec& spec, const FeatureExtractor& extractor);

}  // namespace tamp
