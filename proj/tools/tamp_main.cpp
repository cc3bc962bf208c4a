// tamp: time-variant image pair inpainting toolkit.
//
// Subcommands: build-dataset, train, sample, evaluate, ablate. Every option
// can also come from a JSON config file (--config); explicit flags win over
// the file, the file wins over defaults. Each run archives its resolved
// configuration as run_config.json beside its outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "cli/commands.hpp"

using nlohmann::json;

namespace {

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream f(path);
    if (!f) {
        std::cerr << "error: [config] cannot open config file " << path << '\n';
        std::exit(2);
    }
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        std::cerr << "error: [config] bad JSON in " << path << ": " << e.what() << '\n';
        std::exit(2);
    }
    return j;
}

// apply config-file value unless the flag was given explicitly
template <typename T>
void merge(const CLI::App& app, const std::string& flag, const json& cfg, const char* key, T& out) {
    if (app.count(flag) > 0) return;
    if (cfg.contains(key)) out = cfg.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tamp: time-variant image pair inpainting toolkit"};
    app.require_subcommand(1);

    std::string config_path;

    // ---- build-dataset ----
    tamp::cli::BuildDatasetOptions bd;
    auto* cmd_bd = app.add_subcommand("build-dataset", "assemble split manifests");
    cmd_bd->add_option("--config", config_path, "JSON config file");
    cmd_bd->add_option("--out", bd.out_dir, "output directory for manifests");
    cmd_bd->add_flag("--synthetic", bd.synthetic, "generate synthetic stand-in sources");
    cmd_bd->add_option("--image-root", bd.image_root, "scene-pair root (train/ val/ test/)");
    cmd_bd->add_option("--mask-root", bd.mask_root, "irregular mask directory");
    cmd_bd->add_option("--subset", bd.subset, "fraction of full-scale counts (0,1]");
    cmd_bd->add_option("--res", bd.resolution, "target resolution");
    cmd_bd->add_option("--seed", bd.seed, "seed");
    cmd_bd->add_option("--mask-polarity", bd.mask_polarity, "known-white | missing-white");

    // ---- train ----
    tamp::cli::TrainOptions tr;
    auto* cmd_tr = app.add_subcommand("train", "train the complementation network");
    cmd_tr->add_option("--config", config_path, "JSON config file");
    cmd_tr->add_option("--manifest", tr.train_manifest, "train manifest");
    cmd_tr->add_option("--val-manifest", tr.val_manifest, "validation manifest");
    cmd_tr->add_option("--out", tr.out_dir, "run directory (checkpoints, log)");
    cmd_tr->add_option("--resume", tr.resume, "continue from a last.ckpt");
    cmd_tr->add_option("--lr", tr.learning_rate, "learning rate");
    cmd_tr->add_option("--beta1", tr.adam_beta1, "Adam beta1");
    cmd_tr->add_option("--beta2", tr.adam_beta2, "Adam beta2");
    cmd_tr->add_option("--epochs", tr.epochs, "epochs");
    cmd_tr->add_option("--eval-every", tr.eval_every, "validation interval (epochs)");
    cmd_tr->add_option("--batch", tr.batch_size, "batch size");
    cmd_tr->add_option("--res", tr.resolution, "training resolution");
    cmd_tr->add_option("--base-ch", tr.base_channels, "backbone base channels");
    cmd_tr->add_option("--depth", tr.depth, "backbone depth");
    cmd_tr->add_option("--kernel", tr.kernel_size, "filtering kernel size N (odd)");
    cmd_tr->add_option("--tau", tr.tau, "confidence binarization threshold");
    cmd_tr->add_option("--lambda-l1", tr.lambda_l1, "L1 weight");
    cmd_tr->add_option("--lambda-gan", tr.lambda_gan, "adversarial weight");
    cmd_tr->add_option("--lambda-pct", tr.lambda_perceptual, "perceptual weight");
    cmd_tr->add_option("--lambda-style", tr.lambda_style, "style weight");
    cmd_tr->add_option("--seed", tr.seed, "seed");
    cmd_tr->add_option("--steps", tr.steps, "hard step cap (0 = none)");
    cmd_tr->add_flag("--overfit-one", tr.overfit_one, "single-record smoke mode");

    // ---- sample ----
    tamp::cli::SampleOptions sp;
    auto* cmd_sp = app.add_subcommand("sample", "run the inpainting sampler");
    cmd_sp->add_option("--config", config_path, "JSON config file");
    cmd_sp->add_option("--manifest", sp.manifest, "manifest to sample from");
    cmd_sp->add_option("--out", sp.out_dir, "output directory");
    cmd_sp->add_option("--mode", sp.mode, "ddnm | ddnm-interact | indite-ddnm | indite-diff");
    cmd_sp->add_option("--task", sp.task, "tvDuo | tvRef");
    cmd_sp->add_option("--checkpoint", sp.checkpoint, "complementation network checkpoint");
    cmd_sp->add_option("--denoiser", sp.denoiser_checkpoint, "denoiser checkpoint (optional)");
    cmd_sp->add_option("--steps", sp.steps, "diffusion steps");
    cmd_sp->add_option("--omega", sp.omega, "cross-reference guidance weight");
    cmd_sp->add_option("--lowpass-scale", sp.lowpass_scale, "low-pass factor D");
    cmd_sp->add_option("--tau", sp.tau, "confidence binarization threshold");
    cmd_sp->add_option("--seed", sp.seed, "seed");
    cmd_sp->add_option("--limit", sp.limit, "max records (0 = all)");
    cmd_sp->add_flag("--trace", sp.trace, "write per-step trace.jsonl");

    // ---- evaluate ----
    tamp::cli::EvaluateOptions ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "compute the metric report");
    cmd_ev->add_option("--config", config_path, "JSON config file");
    cmd_ev->add_option("--manifest", ev.manifest, "manifest");
    cmd_ev->add_option("--outputs", ev.outputs_dir, "directory of sampled outputs");
    cmd_ev->add_option("--report-out", ev.report_dir, "report directory");
    cmd_ev->add_option("--task", ev.task, "tvDuo | tvRef");

    // ---- ablate ----
    tamp::cli::AblateOptions ab;
    auto* cmd_ab = app.add_subcommand("ablate", "compare sampler variants on one subset");
    cmd_ab->add_option("--config", config_path, "JSON config file");
    cmd_ab->add_option("--manifest", ab.manifest, "manifest");
    cmd_ab->add_option("--checkpoint", ab.checkpoint, "complementation network checkpoint");
    cmd_ab->add_option("--out", ab.out_dir, "output directory");
    cmd_ab->add_option("--denoiser", ab.denoiser_checkpoint, "denoiser checkpoint (optional)");
    cmd_ab->add_option("--steps", ab.steps, "diffusion steps");
    cmd_ab->add_option("--omega", ab.omega, "cross-reference guidance weight");
    cmd_ab->add_option("--lowpass-scale", ab.lowpass_scale, "low-pass factor D");
    cmd_ab->add_option("--tau", ab.tau, "confidence binarization threshold");
    cmd_ab->add_option("--seed", ab.seed, "seed");
    cmd_ab->add_option("--limit", ab.limit, "records per variant");

    CLI11_PARSE(app, argc, argv);

    if (cmd_bd->parsed()) {
        const json cfg = load_config_file(config_path);
        merge(*cmd_bd, "--out", cfg, "out_dir", bd.out_dir);
        merge(*cmd_bd, "--synthetic", cfg, "synthetic", bd.synthetic);
        merge(*cmd_bd, "--image-root", cfg, "image_root", bd.image_root);
        merge(*cmd_bd, "--mask-root", cfg, "mask_root", bd.mask_root);
        merge(*cmd_bd, "--subset", cfg, "subset", bd.subset);
        merge(*cmd_bd, "--res", cfg, "resolution", bd.resolution);
        merge(*cmd_bd, "--seed", cfg, "seed", bd.seed);
        merge(*cmd_bd, "--mask-polarity", cfg, "mask_polarity", bd.mask_polarity);
        return tamp::cli::cmd_build_dataset(bd);
    }
    if (cmd_tr->parsed()) {
        const json cfg = load_config_file(config_path);
        merge(*cmd_tr, "--manifest", cfg, "train_manifest", tr.train_manifest);
        merge(*cmd_tr, "--val-manifest", cfg, "val_manifest", tr.val_manifest);
        merge(*cmd_tr, "--out", cfg, "out_dir", tr.out_dir);
        merge(*cmd_tr, "--resume", cfg, "resume", tr.resume);
        merge(*cmd_tr, "--lr", cfg, "learning_rate", tr.learning_rate);
        merge(*cmd_tr, "--beta1", cfg, "adam_beta1", tr.adam_beta1);
        merge(*cmd_tr, "--beta2", cfg, "adam_beta2", tr.adam_beta2);
        merge(*cmd_tr, "--epochs", cfg, "epochs", tr.epochs);
        merge(*cmd_tr, "--eval-every", cfg, "eval_every", tr.eval_every);
        merge(*cmd_tr, "--batch", cfg, "batch_size", tr.batch_size);
        merge(*cmd_tr, "--res", cfg, "resolution", tr.resolution);
        merge(*cmd_tr, "--base-ch", cfg, "base_channels", tr.base_channels);
        merge(*cmd_tr, "--depth", cfg, "depth", tr.depth);
        merge(*cmd_tr, "--kernel", cfg, "kernel_size", tr.kernel_size);
        merge(*cmd_tr, "--tau", cfg, "tau", tr.tau);
        merge(*cmd_tr, "--lambda-l1", cfg, "lambda_l1", tr.lambda_l1);
        merge(*cmd_tr, "--lambda-gan", cfg, "lambda_gan", tr.lambda_gan);
        merge(*cmd_tr, "--lambda-pct", cfg, "lambda_perceptual", tr.lambda_perceptual);
        merge(*cmd_tr, "--lambda-style", cfg, "lambda_style", tr.lambda_style);
        merge(*cmd_tr, "--seed", cfg, "seed", tr.seed);
        merge(*cmd_tr, "--steps", cfg, "steps", tr.steps);
        merge(*cmd_tr, "--overfit-one", cfg, "overfit_one", tr.overfit_one);
        if (tr.lambda_l1 < 0 || tr.lambda_gan < 0 || tr.lambda_perceptual < 0 ||
            tr.lambda_style < 0) {
            std::cerr << "error: [config] train: loss weights must be nonnegative\n";
            return 2;
        }
        return tamp::cli::cmd_train(tr);
    }
    if (cmd_sp->parsed()) {
        const json cfg = load_config_file(config_path);
        merge(*cmd_sp, "--manifest", cfg, "manifest", sp.manifest);
        merge(*cmd_sp, "--out", cfg, "out_dir", sp.out_dir);
        merge(*cmd_sp, "--mode", cfg, "mode", sp.mode);
        merge(*cmd_sp, "--task", cfg, "task", sp.task);
        merge(*cmd_sp, "--checkpoint", cfg, "checkpoint", sp.checkpoint);
        merge(*cmd_sp, "--denoiser", cfg, "denoiser_checkpoint", sp.denoiser_checkpoint);
        merge(*cmd_sp, "--steps", cfg, "steps", sp.steps);
        merge(*cmd_sp, "--omega", cfg, "omega", sp.omega);
        merge(*cmd_sp, "--lowpass-scale", cfg, "lowpass_scale", sp.lowpass_scale);
        merge(*cmd_sp, "--tau", cfg, "tau", sp.tau);
        merge(*cmd_sp, "--seed", cfg, "seed", sp.seed);
        merge(*cmd_sp, "--limit", cfg, "limit", sp.limit);
        merge(*cmd_sp, "--trace", cfg, "trace", sp.trace);
        return tamp::cli::cmd_sample(sp);
    }
    if (cmd_ev->parsed()) {
        const json cfg = load_config_file(config_path);
        merge(*cmd_ev, "--manifest", cfg, "manifest", ev.manifest);
        merge(*cmd_ev, "--outputs", cfg, "outputs_dir", ev.outputs_dir);
        merge(*cmd_ev, "--report-out", cfg, "report_dir", ev.report_dir);
        merge(*cmd_ev, "--task", cfg, "task", ev.task);
        return tamp::cli::cmd_evaluate(ev);
    }
    if (cmd_ab->parsed()) {
        const json cfg = load_config_file(config_path);
        merge(*cmd_ab, "--manifest", cfg, "manifest", ab.manifest);
        merge(*cmd_ab, "--checkpoint", cfg, "checkpoint", ab.checkpoint);
        merge(*cmd_ab, "--out", cfg, "out_dir", ab.out_dir);
        merge(*cmd_ab, "--denoiser", cfg, "denoiser_checkpoint", ab.denoiser_checkpoint);
        merge(*cmd_ab, "--steps", cfg, "steps", ab.steps);
        merge(*cmd_ab, "--omega", cfg, "omega", ab.omega);
        merge(*cmd_ab, "--lowpass-scale", cfg, "lowpass_scale", ab.lowpass_scale);
        merge(*cmd_ab, "--tau", cfg, "tau", ab.tau);
        merge(*cmd_ab, "--seed", cfg, "seed", ab.seed);
        merge(*cmd_ab, "--limit", cfg, "limit", ab.limit);
        return tamp::cli::cmd_ablate(ab);
    }
    return 0;
}
