/*
 * Copyright 2026 The mpdrff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rff/training/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <string>

#include "rff/common/error.hpp"
#include "rff/common/rng.hpp"
#include "rff/numerics/ops.hpp"
#include "rff/numerics/optim.hpp"
#include "rff/numerics/schedule.hpp"
#include "rff/signal/dataset.hpp"
#include "rff/training/evaluate.hpp"

namespace rff::training {
namespace {

using model::ModelConfig;
using nn::Tensor;

constexpr std::uint64_t kShuffleStream = 0x73687566;
constexpr std::uint64_t kValidationStream = 0x76616c69;
constexpr std::uint64_t kDropoutStream = 0x64726f70;

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// Stratified hold-out: the same share of every (device, SNR) cell.
void split_validation(const signal::Dataset& data, const TrainConfig& cfg, std::vector<std::size_t>& train_idx,
                      std::vector<std::size_t>& val_idx) {
    std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data[i];
        cells[{r.label, r.signal.snr_db.value_or(1000)}].push_back(i);
    }
    Rng rng(derive_seed(cfg.seed, kValidationStream));
    for (auto& [key, members] : cells) {
        shuffle(members, rng);
        const auto n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * members.size()));
        val_idx.insert(val_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
        train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
}

double validation_accuracy(const model::ModelParams& params, const ModelConfig& config, const signal::Dataset& data,
                           const std::vector<std::size_t>& idx, std::size_t batch_size) {
    std::vector<signal::Record> subset;
    subset.reserve(idx.size());
    for (const std::size_t i : idx) subset.push_back(data[i]);
    const auto pred = predict(params, config, subset, batch_size);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) correct += pred[i] == subset[i].label;
    return static_cast<double>(correct) / static_cast<double>(subset.size());
}

void dump_bad_batch(const std::filesystem::path& out, std::uint64_t step, std::size_t epoch, std::size_t batch,
                    const std::vector<std::size_t>& records) {
    std::ofstream os(out.string() + ".nan.json");
    nlohmann::json j = {{"step", step}, {"epoch", epoch}, {"batch", batch}, {"records", records}};
    os << j.dump(2) << '\n';
}

}  // namespace

void TrainConfig::validate() const {
    if (!(max_lr > 0) || !std::isfinite(max_lr)) throw ConfigError("train.max_lr must be > 0");
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (!(weight_decay >= 0)) throw ConfigError("train.weight_decay must be >= 0");
    if (!(validation_fraction >= 0 && validation_fraction < 1)) {
        throw ConfigError("train.validation_fraction must lie in [0, 1)");
    }
    if (log_every < 1) throw ConfigError("train.log_every must be >= 1");
    if (eval_batch_size < 1) throw ConfigError("train.eval_batch_size must be >= 1");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"max_lr", c.max_lr},
            {"warmup_steps", c.warmup_steps},
            {"weight_decay", c.weight_decay},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"validation_fraction", c.validation_fraction},
            {"log_every", c.log_every},
            {"eval_batch_size", c.eval_batch_size}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    if (!j.is_object()) throw ConfigError("train section must be an object");
    static const std::set<std::string> known{"max_lr",  "warmup_steps", "weight_decay",
                                             "batch_size", "epochs",    "seed",
                                             "validation_fraction", "log_every", "eval_batch_size"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown key train." + key);
    }
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            field = j.at(key).get<std::decay_t<decltype(field)>>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("train.") + key + " has the wrong type");
        }
    };
    get("max_lr", c.max_lr);
    get("warmup_steps", c.warmup_steps);
    get("weight_decay", c.weight_decay);
    get("batch_size", c.batch_size);
    get("epochs", c.epochs);
    get("seed", c.seed);
    get("validation_fraction", c.validation_fraction);
    get("log_every", c.log_every);
    get("eval_batch_size", c.eval_batch_size);
    c.validate();
    return c;
}

std::filesystem::path best_checkpoint_path(const std::filesystem::path& out) {
    return std::filesystem::path(out.string() + ".best");
}

TrainResult train(const TrainRequest& req) {
    const TrainConfig& cfg = req.train;
    cfg.validate();
    const signal::Dataset data = signal::load_dataset(req.dataset_dir, "train");
    if (data.empty()) throw ConfigError("training split of " + req.dataset_dir.string() + " is empty");

    ModelConfig config = req.model;
    config.periods = req.periods.periods();
    config.signal_length = data.manifest().window_length;
    if (req.periods.length != 0 && req.periods.length != config.signal_length) {
        throw ConfigError("period file was computed for length " + std::to_string(req.periods.length) +
                          " but the dataset windows have length " + std::to_string(config.signal_length));
    }
    if (data.manifest().n_devices != config.n_classes) {
        throw ConfigError("dataset has " + std::to_string(data.manifest().n_devices) + " devices but model.n_classes is " +
                          std::to_string(config.n_classes));
    }
    config.validate();

    std::vector<std::size_t> train_idx, val_idx;
    if (cfg.validation_fraction > 0) {
        split_validation(data, cfg, train_idx, val_idx);
    } else {
        train_idx.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) train_idx[i] = i;
    }
    if (train_idx.empty()) throw ConfigError("no training records left after the validation hold-out");

    const std::size_t batches_per_epoch = (train_idx.size() + cfg.batch_size - 1) / cfg.batch_size;
    nn::LrSchedule schedule{cfg.max_lr, cfg.warmup_steps, static_cast<std::uint64_t>(cfg.epochs * batches_per_epoch)};
    schedule.validate();
    const nn::AdamWConfig adamw{0.9, 0.999, 1e-8, cfg.weight_decay};

    model::Checkpoint ckpt;
    ckpt.config = config;
    ckpt.periods = spectrum::period_set_to_json(req.periods);
    nn::OptimizerState opt;
    Rng dropout_rng(derive_seed(cfg.seed, kDropoutStream));
    std::uint64_t step = 0;
    std::size_t epoch = 0;
    std::optional<double> best;

    if (req.resume) {
        model::Checkpoint prev = model::load_checkpoint(*req.resume);
        if (model::to_json(prev.config) != model::to_json(config)) {
            throw ConfigError("resume checkpoint " + req.resume->string() + " was trained with a different model config");
        }
        const auto& extra = prev.extra;
        if (!extra.contains("train") || train_config_from_json(extra.at("train")).seed != cfg.seed) {
            throw ConfigError("resume checkpoint " + req.resume->string() + " has a different training seed");
        }
        ckpt.params = std::move(prev.params);
        if (prev.optimizer) opt = std::move(*prev.optimizer);
        step = extra.at("step").get<std::uint64_t>();
        epoch = extra.at("epoch").get<std::size_t>();
        dropout_rng.deserialize(extra.at("rng").get<std::string>());
        if (extra.contains("best_validation_accuracy") && !extra.at("best_validation_accuracy").is_null()) {
            best = extra.at("best_validation_accuracy").get<double>();
        }
    } else {
        ckpt.params = model::init_params(config, derive_seed(cfg.seed, 0x6d6f64));
    }
    std::vector<Tensor> params = ckpt.params.tensors();

    auto save = [&](const std::filesystem::path& path, double last_loss) {
        ckpt.optimizer = opt;
        ckpt.extra = {{"train", to_json(cfg)},
                      {"step", step},
                      {"epoch", epoch},
                      {"rng", dropout_rng.serialize()},
                      {"last_epoch_loss", last_loss},
                      {"best_validation_accuracy", best ? nlohmann::json(*best) : nlohmann::json()},
                      {"train_records", train_idx.size()},
                      {"validation_records", val_idx.size()}};
        model::save_checkpoint(path, ckpt);
    };

    if (req.log && step == 0) *req.log << "step,lr,loss,acc\n";
    TrainResult result;
    result.final_checkpoint = req.out;
    result.best_checkpoint = best_checkpoint_path(req.out);
    std::size_t run_epochs = 0;
    double epoch_loss = 0;

    while (epoch < cfg.epochs) {
        if (req.stop_after_epochs > 0 && run_epochs == req.stop_after_epochs) break;
        std::vector<std::size_t> order = train_idx;
        Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream, epoch));
        shuffle(order, shuffle_rng);
        double loss_sum = 0;
        std::size_t seen = 0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
            std::vector<const signal::IQSignal*> batch;
            std::vector<int> labels;
            for (std::size_t i = lo; i < hi; ++i) {
                batch.push_back(&data[order[i]].signal);
                labels.push_back(data[order[i]].label);
            }
            const double lr = nn::lr_at(schedule, step + 1);
            const auto fwd = model::model_forward(batch, ckpt.params, config, {true, &dropout_rng});
            const Tensor loss = nn::cross_entropy(fwd.logits, labels);
            const double loss_value = loss.item();
            if (!std::isfinite(loss_value)) {
                std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                             order.begin() + static_cast<std::ptrdiff_t>(hi));
                dump_bad_batch(req.out, step, epoch, b, ids);
                throw NumericalError("non-finite loss at step " + std::to_string(step) + " (epoch " +
                                     std::to_string(epoch) + ", batch " + std::to_string(b) +
                                     "); record ids written to " + req.out.string() + ".nan.json");
            }
            for (auto& p : params) p.zero_grad();
            nn::backward(loss);
            nn::adamw_step(params, opt, lr, adamw);

            const std::size_t n_classes = config.n_classes;
            const auto logits = fwd.logits.data();
            std::size_t correct = 0;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto row = logits.subspan(i * n_classes, n_classes);
                const auto arg = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
                correct += arg == labels[i];
            }
            loss_sum += loss_value * static_cast<double>(labels.size());
            seen += labels.size();
            ++step;
            if (req.log && step % cfg.log_every == 0) {
                *req.log << step << ',' << lr << ',' << loss_value << ','
                         << static_cast<double>(correct) / static_cast<double>(labels.size()) << '\n';
            }
        }
        epoch_loss = loss_sum / static_cast<double>(seen);
        ++epoch;
        ++run_epochs;

        bool improved = false;
        std::optional<double> val;
        if (!val_idx.empty()) {
            val = validation_accuracy(ckpt.params, config, data, val_idx, cfg.eval_batch_size);
            improved = !best || *val > *best;
            if (improved) best = val;
        } else {
            improved = true;
        }
        if (req.info) {
            *req.info << "epoch " << epoch << '/' << cfg.epochs << " step " << step << " loss " << epoch_loss;
            if (val) *req.info << " val_acc " << *val;
            *req.info << '\n';
        }
        if (improved) save(result.best_checkpoint, epoch_loss);
        save(req.out, epoch_loss);
    }
    if (req.log) req.log->flush();

    result.steps = step;
    result.epochs_completed = epoch;
    result.final_loss = epoch_loss;
    result.best_validation_accuracy = best;
    return result;
}

}  // namespace rff::training
