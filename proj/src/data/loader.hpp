#pragma once

#include <string>

#include "complement/complement.hpp"
#include "data/manifest.hpp"

namespace tamp {

enum class TaskMode { kTvDuo, kTvRef };

TaskMode task_mode_from_string(const std::string& s);
std::string to_string(TaskMode m);

struct PreprocessSpec {
    int resolution = 256;
    TaskMode mode = TaskMode::kTvDuo;
    std::string mask_polarity = "known-white";
    float mask_threshold = 0.5f;
};

// Reads, resizes (bilinear images / nearest masks), normalizes to [-1,1],
// binarizes masks, zero-fills holes. tvRef keeps the reference branch (branch
// 1) intact by forcing its mask to all-ones.
ScenePair load_sample(const ManifestRecord& record, const PreprocessSpec& spec);

}  // namespace tamp
