#include "data/loader.hpp"

#include <stdexcept>

#include "io/imageio.hpp"

namespace tamp {

TaskMode task_mode_from_string(const std::string& s) {
    if (s == "tvDuo" || s == "tvduo") return TaskMode::kTvDuo;
    if (s == "tvRef" || s == "tvref") return TaskMode::kTvRef;
    throw std::invalid_argument("unknown task mode: " + s);
}

std::string to_string(TaskMode m) { return m == TaskMode::kTvDuo ? "tvDuo" : "tvRef"; }

namespace {

Tensor load_image_norm(const std::string& path, int res) {
    Tensor img = read_image_rgb(path);
    if (img.height() != res || img.width() != res) img = resize_bilinear(img, res, res);
    for (auto& v : img.data) v = std::min(1.0f, std::max(-1.0f, v * 2.0f - 1.0f));
    return img;
}

Tensor load_mask_norm(const std::string& path, const PreprocessSpec& spec) {
    Tensor m = read_image_gray(path);
    if (m.height() != spec.resolution || m.width() != spec.resolution)
        m = resize_nearest(m, spec.resolution, spec.resolution);
    const bool known_white = spec.mask_polarity == "known-white";
    if (!known_white && spec.mask_polarity != "missing-white")
        throw std::invalid_argument("load_sample: bad mask polarity " + spec.mask_polarity);
    for (auto& v : m.data) {
        const bool white = v > spec.mask_threshold;
        v = (white == known_white) ? 1.0f : 0.0f;
    }
    return m;
}

}  // namespace

ScenePair load_sample(const ManifestRecord& record, const PreprocessSpec& spec) {
    ScenePair p;
    p.gt_1 = load_image_norm(record.image_1, spec.resolution);
    p.gt_2 = load_image_norm(record.image_2, spec.resolution);
    p.mask_1 = spec.mode == TaskMode::kTvRef
                   ? Tensor({1, spec.resolution, spec.resolution}, 1.0f)
                   : load_mask_norm(record.mask_1, spec);
    p.mask_2 = load_mask_norm(record.mask_2, spec);
    p.damaged_1 = apply_confidence(p.gt_1, p.mask_1);
    p.damaged_2 = apply_confidence(p.gt_2, p.mask_2);
    p.time_gap_tag = record.pair_id;
    validate_scene_pair(p);
    return p;
}

}  // namespace tamp
