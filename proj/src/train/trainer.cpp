#include "train/trainer.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "io/checkpoint.hpp"
#include "metrics/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tamp {

int best_checkpoint_index(const std::vector<double>& val_psnrs) {
    int best = -1;
    for (size_t i = 0; i < val_psnrs.size(); ++i)
        if (best < 0 || val_psnrs[i] > val_psnrs[best]) best = static_cast<int>(i);
    return best;
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0f) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    if (epochs <= 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
    if (eval_every <= 0 || epochs % eval_every != 0)
        throw std::invalid_argument("TrainConfig: eval_every must divide epochs");
    if (batch_size <= 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (resolution <= 0) throw std::invalid_argument("TrainConfig: resolution must be positive");
    if (tau <= 0.0f || tau >= 1.0f) throw std::invalid_argument("TrainConfig: tau must be in (0,1)");
    weights.validate();
    BackboneConfig bb = backbone;
    bb.input_resolution = resolution;
    bb.validate();
}

Trainer::Trainer(const TrainConfig& cfg, DatasetManifest train_manifest,
                 DatasetManifest val_manifest, const std::string& out_dir)
    : cfg_(cfg),
      train_manifest_(std::move(train_manifest)),
      val_manifest_(std::move(val_manifest)),
      out_dir_(out_dir),
      rng_(cfg.seed ^ 0x7124175ULL) {
    cfg_.validate();
    if (train_manifest_.records.empty()) throw std::invalid_argument("Trainer: empty train split");
    if (val_manifest_.records.empty()) throw std::invalid_argument("Trainer: empty val split");
    fs::create_directories(out_dir_);

    prep_.resolution = cfg_.resolution;
    prep_.mode = TaskMode::kTvDuo;
    prep_.mask_polarity = train_manifest_.mask_polarity;

    BackboneConfig bb = cfg_.backbone;
    bb.input_resolution = cfg_.resolution;
    net_ = std::make_unique<InditeNet>(bb, cfg_.seed ^ 0x11D17E00ULL);
    disc_ = std::make_unique<PatchDiscriminator>(cfg_.seed ^ 0xD15C0000ULL);
    extractor_ = make_default_extractor();

    net_->register_params(gen_params_);
    disc_->register_params(disc_params_);
    opt_gen_ = std::make_unique<nn::Adam>(cfg_.learning_rate, cfg_.adam_beta1, cfg_.adam_beta2);
    opt_disc_ = std::make_unique<nn::Adam>(cfg_.learning_rate, cfg_.adam_beta1, cfg_.adam_beta2);
}

double Trainer::validate_psnr() {
    double total = 0.0;
    int count = 0;
    for (const auto& rec : val_manifest_.records) {
        const ScenePair pair = load_sample(rec, prep_);
        const ComplementResult r = net_->forward(pair, cfg_.tau);
        total += psnr(r.complemented_1, pair.gt_1) + psnr(r.complemented_2, pair.gt_2);
        count += 2;
        if (cfg_.overfit_one) break;
    }
    return total / count;
}

void Trainer::save_checkpoint(const std::string& path, int epoch, double val_psnr,
                              bool with_optimizer_state) {
    Checkpoint ckpt;
    ckpt.meta["epoch"] = epoch;
    ckpt.meta["val_psnr"] = val_psnr;
    ckpt.meta["eval_history"] = eval_history_;
    ckpt.meta["rng_state"] = rng_.state_string();
    ckpt.meta["gen_steps"] = opt_gen_->step_count();
    ckpt.meta["disc_steps"] = opt_disc_->step_count();
    json cfg_json;
    cfg_json["learning_rate"] = cfg_.learning_rate;
    cfg_json["adam_beta1"] = cfg_.adam_beta1;
    cfg_json["adam_beta2"] = cfg_.adam_beta2;
    cfg_json["epochs"] = cfg_.epochs;
    cfg_json["eval_every"] = cfg_.eval_every;
    cfg_json["seed"] = cfg_.seed;
    cfg_json["batch_size"] = cfg_.batch_size;
    cfg_json["resolution"] = cfg_.resolution;
    cfg_json["tau"] = cfg_.tau;
    cfg_json["base_channels"] = cfg_.backbone.base_channels;
    cfg_json["depth"] = cfg_.backbone.depth;
    cfg_json["kernel_size"] = cfg_.backbone.kernel_size;
    cfg_json["lambda"] = {cfg_.weights.l1, cfg_.weights.gan, cfg_.weights.perceptual,
                          cfg_.weights.style};
    ckpt.meta["config"] = cfg_json;

    ckpt.put_params(gen_params_);
    ckpt.put_params(disc_params_);
    if (with_optimizer_state) {
        auto put_slots = [&](nn::Adam& opt, const nn::ParamRegistry& reg, const std::string& ns) {
            auto& slots = opt.slots();
            if (slots.size() != reg.items().size()) return;  // optimizer not yet stepped
            for (size_t i = 0; i < slots.size(); ++i) {
                ckpt.tensors["adam." + ns + reg.items()[i].first + ".m"] = slots[i].m;
                ckpt.tensors["adam." + ns + reg.items()[i].first + ".v"] = slots[i].v;
            }
        };
        put_slots(*opt_gen_, gen_params_, "");
        put_slots(*opt_disc_, disc_params_, "");
    }
    ckpt.save(path);
}

int Trainer::load_checkpoint(const std::string& path) {
    const Checkpoint ckpt = Checkpoint::load(path);
    ckpt.get_params(gen_params_);
    ckpt.get_params(disc_params_);
    rng_.set_state(ckpt.meta.at("rng_state").get<std::string>());
    auto get_slots = [&](nn::Adam& opt, const nn::ParamRegistry& reg, long steps) {
        auto& slots = opt.slots();
        slots.clear();
        bool any = false;
        for (const auto& [name, p] : reg.items()) {
            const auto mi = ckpt.tensors.find("adam." + name + ".m");
            const auto vi = ckpt.tensors.find("adam." + name + ".v");
            nn::Adam::Slot s;
            if (mi != ckpt.tensors.end() && vi != ckpt.tensors.end()) {
                s.m = mi->second;
                s.v = vi->second;
                any = true;
            } else {
                s.m = Tensor::zeros_like(p->value());
                s.v = Tensor::zeros_like(p->value());
            }
            slots.push_back(std::move(s));
        }
        if (!any) slots.clear();
        opt.set_step_count(steps);
    };
    get_slots(*opt_gen_, gen_params_, ckpt.meta.value("gen_steps", 0L));
    get_slots(*opt_disc_, disc_params_, ckpt.meta.value("disc_steps", 0L));
    eval_history_ = ckpt.meta.value("eval_history", std::vector<double>{});
    return ckpt.meta.at("epoch").get<int>();
}

TrainResult Trainer::run(const std::string& resume_path) {
    TrainResult result;
    int start_epoch = 0;
    if (!resume_path.empty()) start_epoch = load_checkpoint(resume_path);
    if (const int prev_best = best_checkpoint_index(eval_history_); prev_best >= 0) {
        result.best_psnr = eval_history_[prev_best];
        result.best_epoch = (prev_best + 1) * cfg_.eval_every;
    }

    const fs::path log_path = fs::path(out_dir_) / "train_log.jsonl";
    std::ofstream log(log_path, start_epoch > 0 ? std::ios::app : std::ios::trunc);
    if (!log) throw std::runtime_error("Trainer: cannot open log " + log_path.string());

    const fs::path best_path = fs::path(out_dir_) / "best.ckpt";
    const fs::path last_path = fs::path(out_dir_) / "last.ckpt";

    const size_t n_train = cfg_.overfit_one ? 1 : train_manifest_.records.size();
    long step = static_cast<long>(start_epoch) * static_cast<long>((n_train + cfg_.batch_size - 1) / cfg_.batch_size);
    bool first_recorded = step > 0;
    bool stop = false;

    for (int epoch = start_epoch; epoch < cfg_.epochs && !stop; ++epoch) {
        // deterministic per-epoch order
        std::vector<size_t> order(n_train);
        for (size_t i = 0; i < n_train; ++i) order[i] = i;
        Rng order_rng(cfg_.seed ^ (0xE60C0000ULL + static_cast<uint64_t>(epoch)));
        for (size_t i = n_train; i > 1; --i)
            std::swap(order[i - 1], order[order_rng.uniform_int(static_cast<int>(i))]);

        for (size_t pos = 0; pos < n_train && !stop; pos += cfg_.batch_size) {
            const size_t batch_end = std::min(n_train, pos + cfg_.batch_size);
            const float inv_batch = 1.0f / static_cast<float>(batch_end - pos);

            // one forward per sample; graphs kept until both updates are done
            struct SampleGraph {
                ScenePair pair;
                InditeNet::ForwardVars fwd;
                Tensor conf_target_1, conf_target_2;
            };
            std::vector<SampleGraph> batch;
            for (size_t k = pos; k < batch_end; ++k) {
                SampleGraph sg;
                sg.pair = load_sample(train_manifest_.records[order[k]], prep_);
                sg.fwd = net_->forward_graph(sg.pair.damaged_1, sg.pair.mask_1, sg.pair.damaged_2,
                                             sg.pair.mask_2);
                sg.conf_target_1 = confidence_target(sg.pair.gt_1, sg.fwd.complemented_1.value());
                sg.conf_target_2 = confidence_target(sg.pair.gt_2, sg.fwd.complemented_2.value());
                batch.push_back(std::move(sg));
            }

            // critic update on detached predictions
            if (cfg_.weights.gan > 0.0f) {
                Var disc_total;
                for (const auto& sg : batch) {
                    Var term = add(
                        adversarial_losses(Var(sg.fwd.complemented_1.value()), Var(sg.pair.gt_1),
                                           *disc_).disc_loss,
                        adversarial_losses(Var(sg.fwd.complemented_2.value()), Var(sg.pair.gt_2),
                                           *disc_).disc_loss);
                    term = add(term, confidence_disc_loss(sg.fwd.confidence_1.value(),
                                                          sg.conf_target_1, *disc_));
                    term = add(term, confidence_disc_loss(sg.fwd.confidence_2.value(),
                                                          sg.conf_target_2, *disc_));
                    disc_total = disc_total.defined() ? add(disc_total, term) : term;
                }
                disc_total = scale(disc_total, inv_batch);
                nn::zero_grads(disc_params_.vars());
                backward(disc_total);
                opt_disc_->step(disc_params_.vars());
            }

            // generator update (critic already refreshed)
            Var total;
            double complement_l1 = 0.0;
            double term_sums[4] = {0.0, 0.0, 0.0, 0.0};  // l1, gan, pct, style
            for (const auto& sg : batch) {
                const LossBreakdown parts[4] = {
                    complement_loss_terms(sg.fwd.complemented_1, Var(sg.pair.gt_1), cfg_.weights,
                                          *disc_, *extractor_),
                    complement_loss_terms(sg.fwd.complemented_2, Var(sg.pair.gt_2), cfg_.weights,
                                          *disc_, *extractor_),
                    complement_loss_terms(repeat_channels(sg.fwd.confidence_1, 3),
                                          repeat_channels(Var(sg.conf_target_1), 3), cfg_.weights,
                                          *disc_, *extractor_),
                    complement_loss_terms(repeat_channels(sg.fwd.confidence_2, 3),
                                          repeat_channels(Var(sg.conf_target_2), 3), cfg_.weights,
                                          *disc_, *extractor_),
                };
                complement_l1 +=
                    0.5 * (parts[0].l1.value().data[0] + parts[1].l1.value().data[0]);
                for (const auto& p : parts) {
                    term_sums[0] += p.term_value(p.l1);
                    term_sums[1] += p.term_value(p.gan);
                    term_sums[2] += p.term_value(p.perceptual);
                    term_sums[3] += p.term_value(p.style);
                    const Var t = p.total(cfg_.weights);
                    total = total.defined() ? add(total, t) : t;
                }
            }
            total = scale(total, inv_batch);
            complement_l1 /= (batch_end - pos);
            for (auto& v : term_sums) v *= inv_batch;

            const double total_value = total.value().data[0];
            if (!std::isfinite(total_value))
                throw std::runtime_error("Trainer: non-finite loss at step " +
                                         std::to_string(step) + " (epoch " +
                                         std::to_string(epoch) + ")");

            nn::zero_grads(gen_params_.vars());
            backward(total);
            const double grad_norm = nn::clip_grad_norm(gen_params_.vars(), cfg_.grad_clip);
            opt_gen_->step(gen_params_.vars());
            ++step;

            if (!first_recorded) {
                result.first_l1 = complement_l1;
                first_recorded = true;
            }
            result.last_l1 = complement_l1;

            json line;
            line["step"] = step;
            line["epoch"] = epoch;
            line["total"] = total_value;
            line["l1"] = term_sums[0];
            line["gan"] = term_sums[1];
            line["perceptual"] = term_sums[2];
            line["style"] = term_sums[3];
            line["complement_l1"] = complement_l1;
            line["grad_norm"] = grad_norm;
            log << line.dump() << '\n';

            if (cfg_.max_steps > 0 && step >= cfg_.max_steps) stop = true;
        }

        const bool last_epoch = stop || epoch + 1 == cfg_.epochs;
        if ((epoch + 1) % cfg_.eval_every == 0 || last_epoch) {
            const double val = validate_psnr();
            json line;
            line["epoch"] = epoch + 1;
            line["val_psnr"] = val;
            log << line.dump() << '\n';
            eval_history_.push_back(val);
            if (best_checkpoint_index(eval_history_) ==
                static_cast<int>(eval_history_.size()) - 1) {
                result.best_psnr = val;
                result.best_epoch = epoch + 1;
                save_checkpoint(best_path.string(), epoch + 1, val, false);
            }
            save_checkpoint(last_path.string(), epoch + 1, val, true);
        }
    }

    result.steps_run = step;
    result.best_checkpoint_path = best_path.string();
    result.last_checkpoint_path = last_path.string();
    return result;
}

}  // namespace tamp
