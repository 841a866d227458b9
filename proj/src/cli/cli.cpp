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

#include "rff/cli/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rff/cli/config.hpp"
#include "rff/common/error.hpp"
#include "rff/model/checkpoint.hpp"
#include "rff/model/gradcheck_suite.hpp"
#include "rff/spectrum/analysis.hpp"
#include "rff/training/bench.hpp"
#include "rff/training/evaluate.hpp"
#include "rff/training/train.hpp"

namespace rff::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Args {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out, dataset, periods, ckpt, out_dir, resume, log, split, precision = "both";
    std::string snr, confusion_snr = "0", fixed;
    std::optional<std::size_t> k, alignment, length;
    std::size_t batch = 1, iters = 20, stop_after = 0, eval_batch = 256;
};

CliConfig config_or_default(const Args& a) {
    return a.config.empty() ? CliConfig{} : load_config(a.config);
}

void echo(std::ostream& out, const json& effective) {
    out << json{{"effective_config", effective}}.dump() << '\n';
}

signal::Snr parse_snr(const std::string& text) {
    if (text == "clean") return std::nullopt;
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("SNR must be an integer dB value or \"clean\", got '" + text + "'");
}

json snr_json(const signal::Snr& s) { return s ? json(*s) : json("clean"); }

int cmd_generate(const Args& a, std::ostream& out) {
    CliConfig c = config_or_default(a);
    c.dataset.seed = resolve_seed(a.seed, c.dataset.seed);
    echo(out, {{"dataset", to_json(c.dataset)}});
    const auto m = signal::generate_dataset(c.dataset, a.out);
    out << json{{"train_records", m.train_count}, {"test_records", m.test_count}, {"out", a.out}}.dump() << '\n';
    return kExitOk;
}

int cmd_analyze(const Args& a, std::ostream& out) {
    CliConfig c = config_or_default(a);
    SpectrumOptions s = c.spectrum;
    if (!a.snr.empty()) s.snr = parse_snr(a.snr);
    if (a.k) s.k = *a.k;
    if (a.alignment) s.alignment = *a.alignment;
    if (!a.split.empty()) s.split = a.split;
    if (s.k < 1 || s.alignment < 1) throw ConfigError("--k and --alignment must be >= 1");
    echo(out, {{"spectrum", {{"snr", snr_json(s.snr)}, {"k", s.k}, {"alignment", s.alignment}, {"split", s.split}}}});

    spectrum::PeriodSet set;
    if (!a.fixed.empty()) {
        std::vector<std::size_t> periods;
        std::stringstream ss(a.fixed);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                periods.push_back(std::stoul(item));
            } catch (const std::exception&) {
                throw ConfigError("--fixed expects comma-separated periods, got '" + a.fixed + "'");
            }
        }
        std::size_t length = a.length.value_or(0);
        if (length == 0 && !a.dataset.empty()) length = signal::read_manifest(a.dataset).window_length;
        if (length == 0) throw ConfigError("--fixed needs --length or --dataset");
        set = spectrum::period_set_from_periods(periods, length, s.alignment);
    } else {
        if (a.dataset.empty()) throw ConfigError("analyze-spectrum needs --dataset (or --fixed)");
        const auto data = signal::load_dataset(a.dataset, s.split);
        set = spectrum::analyze_records(data.records(), s.snr, s.k, s.alignment);
    }
    spectrum::write_period_file(a.out, set);
    out << spectrum::period_set_to_json(set).dump() << '\n';
    return kExitOk;
}

int cmd_train(const Args& a, std::ostream& out, std::ostream& err) {
    CliConfig c = config_or_default(a);
    c.train.seed = resolve_seed(a.seed, c.train.seed);
    training::TrainRequest req;
    req.dataset_dir = a.dataset;
    req.periods = spectrum::read_period_file(a.periods);
    req.model = c.model;
    req.model.periods = req.periods.periods();
    req.model.signal_length = signal::read_manifest(a.dataset).window_length;
    req.train = c.train;
    req.out = a.out;
    if (!a.resume.empty()) req.resume = fs::path(a.resume);
    req.stop_after_epochs = a.stop_after;
    echo(out, {{"model", model::to_json(req.model)}, {"train", training::to_json(req.train)},
               {"periods", req.periods.periods()}});

    const fs::path log_path = a.log.empty() ? fs::path(a.out + ".log.csv") : fs::path(a.log);
    std::ofstream log(log_path, req.resume ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot write training log " + log_path.string());
    req.log = &log;
    req.info = &err;
    const auto r = training::train(req);
    json summary = {{"steps", r.steps},
                    {"epochs", r.epochs_completed},
                    {"final_loss", r.final_loss},
                    {"checkpoint", r.final_checkpoint.string()},
                    {"best_checkpoint", r.best_checkpoint.string()},
                    {"log", log_path.string()}};
    summary["best_validation_accuracy"] = r.best_validation_accuracy ? json(*r.best_validation_accuracy) : json();
    out << summary.dump() << '\n';
    return kExitOk;
}

int cmd_eval(const Args& a, std::ostream& out) {
    const auto ckpt = model::load_checkpoint(a.ckpt);
    const std::string split = a.split.empty() ? "test" : a.split;
    const auto data = signal::load_dataset(a.dataset, split);
    const auto confusion_snr = parse_snr(a.confusion_snr);
    const auto m = training::evaluate(ckpt, data, confusion_snr, a.eval_batch);
    training::write_metrics(a.out_dir, m);
    json per = json::array();
    for (const auto& s : m.per_snr) {
        per.push_back({{"snr_db", snr_json(s.snr)}, {"accuracy", s.accuracy}, {"count", s.total}});
    }
    out << json{{"split", split},
                {"records", m.n_records},
                {"overall_accuracy", m.overall_accuracy},
                {"per_snr", per},
                {"confusion_snr", snr_json(m.confusion_snr)},
                {"out_dir", a.out_dir}}
               .dump()
        << '\n';
    return kExitOk;
}

int cmd_export(const Args& a, std::ostream& out) {
    const auto ckpt = model::load_checkpoint(a.ckpt);
    const std::string split = a.split.empty() ? "test" : a.split;
    const auto data = signal::load_dataset(a.dataset, split);
    training::export_embeddings(ckpt, data, a.out, a.eval_batch);
    out << json{{"records", data.size()}, {"width", ckpt.config.fused_width()}, {"out", a.out}}.dump() << '\n';
    return kExitOk;
}

int cmd_gradcheck(const Args& a, std::ostream& out) {
    CliConfig c = config_or_default(a);
    const std::uint64_t seed = resolve_seed(a.seed, c.train.seed);
    if (a.precision != "32" && a.precision != "64" && a.precision != "both") {
        throw ConfigError("--precision must be 32, 64 or both");
    }
    echo(out, {{"seed", seed}, {"precision", a.precision}});
    bool ok = true;
    auto report = [&](const char* label, const std::vector<model::GradSuiteEntry>& entries) {
        for (const auto& e : entries) {
            char line[160];
            std::snprintf(line, sizeof line, "%s %-26s rel_err=%.3e tol=%.0e probed=%zu %s", label, e.name.c_str(),
                          e.relative_error, e.tolerance, e.probed, e.passed ? "ok" : "FAIL");
            out << line << '\n';
            ok = ok && e.passed;
        }
    };
    if (a.precision != "64") report("f32", model::run_gradcheck32(seed));
    if (a.precision != "32") report("f64", model::run_gradcheck64(seed));
    out << (ok ? "gradcheck passed" : "gradcheck FAILED") << '\n';
    return ok ? kExitOk : kExitNumerical;
}

int cmd_bench(const Args& a, std::ostream& out) {
    model::ModelConfig config;
    model::ModelParams params;
    const CliConfig c = config_or_default(a);
    const std::uint64_t seed = resolve_seed(a.seed, c.train.seed);
    if (!a.ckpt.empty()) {
        auto ckpt = model::load_checkpoint(a.ckpt);
        config = ckpt.config;
        params = std::move(ckpt.params);
    } else {
        config = c.model;
        params = model::init_params(config, seed);
    }
    echo(out, {{"model", model::to_json(config)}, {"batch", a.batch}, {"iters", a.iters}, {"seed", seed}});
    const auto r = training::bench_inference(params, config, a.batch, a.iters, seed);
    const auto report = model::count_params(config, params);
    json blocks = json::array();
    for (const auto& b : report.blocks) {
        blocks.push_back({{"block", b.name}, {"params", b.count},
                          {"reference", b.reference ? json(*b.reference) : json()}});
    }
    out << json{{"batch", r.batch},
                {"iters", r.iters},
                {"mean_ms", r.mean_ms},
                {"p50_ms", r.p50_ms},
                {"p95_ms", r.p95_ms},
                {"macs_per_signal", r.macs},
                {"mflops_per_signal", r.mflops},
                {"reference_mflops", training::kReferenceMflops},
                {"params_total", r.params_total},
                {"reference_params_total", training::kReferenceParams},
                {"param_blocks", blocks}}
               .dump(2)
        << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-period transformer RF fingerprinting toolkit"};
    app.require_subcommand(1);
    Args a;
    auto add_seed = [&](CLI::App* s) { s->add_option("--seed", a.seed, "Seed (overrides RFF_SEED and the config)"); };

    auto* gen = app.add_subcommand("generate", "Synthesize a dataset");
    gen->add_option("--config", a.config, "Config file")->check(CLI::ExistingFile);
    gen->add_option("--out", a.out, "Output directory")->required();
    add_seed(gen);

    auto* ana = app.add_subcommand("analyze-spectrum", "Select the period set from spectrum offsets");
    ana->add_option("--config", a.config, "Config file")->check(CLI::ExistingFile);
    ana->add_option("--dataset", a.dataset, "Dataset directory");
    ana->add_option("--snr", a.snr, "SNR bucket to analyze (dB or clean)");
    ana->add_option("--k", a.k, "Number of periods");
    ana->add_option("--alignment", a.alignment, "Period alignment unit");
    ana->add_option("--split", a.split, "train or test");
    ana->add_option("--fixed", a.fixed, "Write these comma-separated periods instead of analyzing");
    ana->add_option("--length", a.length, "Signal length for --fixed");
    ana->add_option("--out", a.out, "Period file")->required();
    add_seed(ana);

    auto* tr = app.add_subcommand("train", "Train a model");
    tr->add_option("--config", a.config, "Config file")->check(CLI::ExistingFile);
    tr->add_option("--dataset", a.dataset, "Dataset directory")->required();
    tr->add_option("--periods", a.periods, "Period file")->required();
    tr->add_option("--out", a.out, "Checkpoint path")->required();
    tr->add_option("--resume", a.resume, "Resume from checkpoint");
    tr->add_option("--log", a.log, "Training log (default <out>.log.csv)");
    tr->add_option("--stop-after-epochs", a.stop_after, "Stop after this many epochs");
    add_seed(tr);

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
    ev->add_option("--ckpt", a.ckpt, "Checkpoint")->required();
    ev->add_option("--dataset", a.dataset, "Dataset directory")->required();
    ev->add_option("--out-dir", a.out_dir, "Directory for accuracy.csv and confusion.csv")->required();
    ev->add_option("--split", a.split, "train or test (default test)");
    ev->add_option("--confusion-snr", a.confusion_snr, "SNR bucket for the confusion matrix (default 0)");
    ev->add_option("--batch", a.eval_batch, "Batch size");
    add_seed(ev);

    auto* ex = app.add_subcommand("export-embeddings", "Write fused embeddings as CSV");
    ex->add_option("--ckpt", a.ckpt, "Checkpoint")->required();
    ex->add_option("--dataset", a.dataset, "Dataset directory")->required();
    ex->add_option("--out", a.out, "CSV path")->required();
    ex->add_option("--split", a.split, "train or test (default test)");
    ex->add_option("--batch", a.eval_batch, "Batch size");
    add_seed(ex);

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    gc->add_option("--config", a.config, "Config file")->check(CLI::ExistingFile);
    gc->add_option("--precision", a.precision, "32, 64 or both");
    add_seed(gc);

    auto* be = app.add_subcommand("bench", "Time inference");
    be->add_option("--ckpt", a.ckpt, "Checkpoint (default: freshly initialized model from --config)");
    be->add_option("--config", a.config, "Config file")->check(CLI::ExistingFile);
    be->add_option("--batch", a.batch, "Batch size");
    be->add_option("--iters", a.iters, "Timed iterations (>= 10)");
    add_seed(be);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*gen) return cmd_generate(a, out);
        if (*ana) return cmd_analyze(a, out);
        if (*tr) return cmd_train(a, out, err);
        if (*ev) return cmd_eval(a, out);
        if (*ex) return cmd_export(a, out);
        if (*gc) return cmd_gradcheck(a, out);
        if (*be) return cmd_bench(a, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON input: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace rff::cli
