#pragma once

#include <memory>
#include <string>
#include <vector>

#include "data/loader.hpp"
#include "net/indite.hpp"
#include "train/losses.hpp"

namespace tamp {

struct TrainConfig {
    float learning_rate = 1e-4f;
    float adam_beta1 = 0.0f;
    float adam_beta2 = 0.9f;
    int epochs = 200;
    int eval_every = 5;  // epochs between validation passes; must divide epochs
    uint64_t seed = 0;
    int batch_size = 1;
    int resolution = 256;
    float tau = 0.5f;
    float grad_clip = 1.0f;
    int max_steps = 0;        // 0 = no cap
    bool overfit_one = false; // restrict to the first record (smoke runs)
    LossWeights weights;
    BackboneConfig backbone;

    void validate() const;
};

// Index of the evaluation to keep: argmax validation PSNR, first wins ties.
// Returns -1 on an empty history.
int best_checkpoint_index(const std::vector<double>& val_psnrs);

struct TrainResult {
    int best_epoch = -1;
    double best_psnr = 0.0;
    double first_l1 = 0.0;  // L1 term of the first optimization step
    double last_l1 = 0.0;   // L1 term of the final optimization step
    long steps_run = 0;
    std::string best_checkpoint_path;
    std::string last_checkpoint_path;
};

// Joint two-branch optimization of the complement and confidence heads with
// the four-term objective, alternating critic updates, periodic validation
// PSNR, and best-checkpoint selection. Deterministic under (config, seed).
class Trainer {
public:
    Trainer(const TrainConfig& cfg, DatasetManifest train_manifest, DatasetManifest val_manifest,
            const std::string& out_dir);

    // resume_path: empty = fresh run, otherwise a last.ckpt to continue from
    TrainResult run(const std::string& resume_path = "");

    InditeNet& net() { return *net_; }

private:
    double validate_psnr();
    void save_checkpoint(const std::string& path, int epoch, double val_psnr,
                         bool with_optimizer_state);
    int load_checkpoint(const std::string& path);  // returns completed epochs

    TrainConfig cfg_;
    DatasetManifest train_manifest_, val_manifest_;
    PreprocessSpec prep_;
    std::string out_dir_;
    std::unique_ptr<InditeNet> net_;
    std::unique_ptr<PatchDiscriminator> disc_;
    std::shared_ptr<FeatureExtractor> extractor_;
    std::unique_ptr<nn::Adam> opt_gen_, opt_disc_;
    nn::ParamRegistry gen_params_, disc_params_;
    Rng rng_;
    std::vector<double> eval_history_;
};

}  // namespace tamp
