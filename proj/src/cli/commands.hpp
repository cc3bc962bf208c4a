#pragma once

#include <cstdint>
#include <string>

namespace tamp::cli {

// Commands are library entry points so tests can drive them in-process; the
// binary in tools/ is a thin argument parser over these. Each command
// archives its fully resolved configuration beside its outputs and is
// deterministic under (options, seed). On failure they print one line
// "error: [<class>] <message>" and return a nonzero exit code.

struct BuildDatasetOptions {
    std::string out_dir;
    bool synthetic = false;
    std::string image_root;  // external sources; env TAMP_DATA_ROOT supplies a default
    std::string mask_root;
    double subset = 1.0;
    int resolution = 256;
    uint64_t seed = 0;
    std::string mask_polarity = "known-white";
};
int cmd_build_dataset(const BuildDatasetOptions& opts);

struct TrainOptions {
    std::string train_manifest;
    std::string val_manifest;
    std::string out_dir;
    std::string resume;  // last.ckpt to continue from
    float learning_rate = 1e-4f;
    float adam_beta1 = 0.0f;
    float adam_beta2 = 0.9f;
    int epochs = 200;
    int eval_every = 5;
    int batch_size = 1;
    int resolution = 256;
    int base_channels = 32;
    int depth = 4;
    int kernel_size = 3;
    float tau = 0.5f;
    float lambda_l1 = 1.0f;
    float lambda_gan = 0.1f;
    float lambda_perceptual = 0.1f;
    float lambda_style = 250.0f;
    uint64_t seed = 0;
    int steps = 0;            // optional hard cap on optimization steps
    bool overfit_one = false; // single-record smoke mode
};
int cmd_train(const TrainOptions& opts);

struct SampleOptions {
    std::string manifest;
    std::string out_dir;
    std::string mode = "indite-diff";  // ddnm | ddnm-interact | indite-ddnm | indite-diff
    std::string task = "tvDuo";        // tvDuo | tvRef
    std::string checkpoint;            // required for indite-* modes
    std::string denoiser_checkpoint;   // optional; seed-initialized prior otherwise
    int steps = 100;
    float omega = 0.5f;
    int lowpass_scale = 4;
    float tau = 0.5f;
    uint64_t seed = 0;
    int limit = 0;  // 0 = all records
    bool trace = false;
};
int cmd_sample(const SampleOptions& opts);

struct EvaluateOptions {
    std::string manifest;
    std::string outputs_dir;
    std::string report_dir;
    std::string task = "tvDuo";
};
int cmd_evaluate(const EvaluateOptions& opts);

struct AblateOptions {
    std::string manifest;
    std::string checkpoint;
    std::string out_dir;
    std::string denoiser_checkpoint;
    int steps = 50;
    float omega = 0.5f;
    int lowpass_scale = 4;
    float tau = 0.5f;
    uint64_t seed = 0;
    int limit = 4;
};
int cmd_ablate(const AblateOptions& opts);

}  // namespace tamp::cli
