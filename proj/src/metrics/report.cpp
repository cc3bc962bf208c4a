#include "metrics/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "io/imageio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tamp {

std::vector<int> MetricReport::branches_reported() const {
    return mode == TaskMode::kTvDuo ? std::vector<int>{0, 1} : std::vector<int>{1};
}

std::string MetricReport::table_text() const {
    const auto& bins = standard_bins();
    std::ostringstream os;
    os << "mode: " << to_string(mode) << "\n";
    auto row = [&](const char* name, auto getter) {
        os << name << '\n';
        for (int b : branches_reported()) {
            os << "  image_" << (b + 1) << " |";
            for (size_t i = 0; i < bins.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), " %10.4f", getter(cells[i][b]));
                os << buf;
            }
            os << '\n';
        }
    };
    os << "bins:      ";
    for (const auto& b : bins) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %9s%%", b.label().c_str());
        os << buf;
    }
    os << '\n';
    row("PSNR", [](const MetricAccumulator& c) { return c.psnr_mean(); });
    row("SSIM", [](const MetricAccumulator& c) { return c.ssim_mean(); });
    row("L1", [](const MetricAccumulator& c) { return c.l1_mean(); });
    row("PCT", [](const MetricAccumulator& c) { return c.pct_mean(); });
    return os.str();
}

void MetricReport::save(const std::string& text_path, const std::string& json_path) const {
    {
        std::ofstream f(text_path);
        if (!f) throw std::runtime_error("failed to write report: " + text_path);
        f << table_text();
    }
    json j;
    j["mode"] = to_string(mode);
    json bins_j = json::array();
    const auto& bins = standard_bins();
    for (size_t i = 0; i < bins.size(); ++i) {
        json bj;
        bj["bin"] = bins[i].label();
        for (int b : branches_reported()) {
            json cj;
            const auto& c = cells[i][b];
            cj["psnr"] = c.psnr_mean();
            cj["ssim"] = c.ssim_mean();
            cj["l1"] = c.l1_mean();
            cj["pct"] = c.pct_mean();
            cj["count"] = c.count;
            bj["image_" + std::to_string(b + 1)] = cj;
        }
        bins_j.push_back(bj);
    }
    j["bins"] = bins_j;
    std::ofstream f(json_path);
    if (!f) throw std::runtime_error("failed to write report: " + json_path);
    f << j.dump(2) << '\n';
}

std::string output_image_name(size_t record_index, int branch) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "rec_%05zu_b%d.ppm", record_index, branch + 1);
    return buf;
}

MetricReport evaluate_suite(const DatasetManifest& manifest, const std::string& outputs_dir,
                            const PreprocessSpec& spec, const FeatureExtractor& extractor) {
    MetricReport report;
    report.mode = spec.mode;
    report.cells.resize(standard_bins().size());

    for (size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& rec = manifest.records[i];
        int bin = -1;
        for (size_t b = 0; b < standard_bins().size(); ++b)
            if (standard_bins()[b].label() == rec.bin) bin = static_cast<int>(b);
        if (bin < 0) throw std::runtime_error("evaluate_suite: unknown bin " + rec.bin);

        const ScenePair pair = load_sample(rec, spec);
        const Tensor* gts[2] = {&pair.gt_1, &pair.gt_2};
        for (int b : report.branches_reported()) {
            const fs::path pred_path = fs::path(outputs_dir) / output_image_name(i, b);
            if (!fs::exists(pred_path))
                throw std::runtime_error("evaluate_suite: missing output " + pred_path.string());
            Tensor pred = read_image_rgb(pred_path.string());
            for (auto& v : pred.data) v = v * 2.0f - 1.0f;
            if (!pred.same_shape(*gts[b]))
                throw std::runtime_error("evaluate_suite: output shape mismatch at " +
                                         pred_path.string());
            report.cells[bin][b].add(psnr(pred, *gts[b]), ssim(pred, *gts[b]),
                                     l1_metric(pred, *gts[b]),
                                     perceptual_distance(pred, *gts[b], extractor));
        }
    }
    return report;
}

}  // namespace tamp
