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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are pinned below; the end-to-end criteria drive the rff binary.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oracles.hpp"
#include "rff/common/rng.hpp"
#include "rff/model/gradcheck_suite.hpp"
#include "rff/model/layers.hpp"
#include "rff/model/mpdformer.hpp"
#include "rff/numerics/ops.hpp"
#include "rff/signal/dataset.hpp"
#include "rff/signal/impairments.hpp"
#include "rff/spectrum/spectrum.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rff;
using model::Real;
using model::Tensor;

namespace {

// Pinned tolerances and budgets.
constexpr double kShapeBudgetS = 1.0;
constexpr std::size_t kDualPathCases = 1200;
constexpr double kDualPathTol = 1e-5;
constexpr double kDualPathBudgetS = 30.0;
constexpr std::size_t kOracleCases = 600;
constexpr double kOracleTol = 1e-5;
constexpr double kOracleBudgetS = 30.0;
constexpr double kGradBudgetS = 120.0;
constexpr double kPeriodBudgetS = 60.0;
constexpr double kDeskMinAcc20 = 0.90;
constexpr double kDeskBudgetS = 30 * 60.0;
constexpr double kAblationMargin = 0.05;
constexpr double kAwgnTolDb = 0.3;
constexpr std::size_t kAwgnDraws = 64;
constexpr double kForwardBudgetS = 1.0;
constexpr double kReferenceMflops = 54.7;
constexpr double kFlopsPerMac = 2.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct CmdResult {
    int code = -1;
    std::string out;
    json last;  // last stdout line, parsed when it is JSON
};

std::string read_text(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') q += "'\\''";
        else q += c;
    }
    return q + "'";
}

struct Context {
    fs::path cli;
    fs::path configs;
    fs::path work;
    int n_commands = 0;

    CmdResult run(const std::vector<std::string>& args, const std::string& env = "") {
        const int id = n_commands++;
        const fs::path out = work / fmt("cmd%02d.out", id), err = work / fmt("cmd%02d.err", id);
        std::string cmd = env.empty() ? "" : env + " ";
        cmd += shell_quote(cli.string());
        for (const auto& a : args) cmd += " " + shell_quote(a);
        cmd += " > " + shell_quote(out.string()) + " 2> " + shell_quote(err.string());
        const int status = std::system(cmd.c_str());
        CmdResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = read_text(out);
        std::istringstream is(r.out);
        std::string line, last;
        while (std::getline(is, line)) {
            if (!line.empty()) last = line;
        }
        r.last = json::parse(last, nullptr, false);
        if (r.code != 0) {
            std::cerr << "command failed (" << r.code << "): " << cmd << "\n" << read_text(err) << "\n";
        }
        return r;
    }

    // Desk experiment results, shared by criteria 7 and 8.
    struct Desk {
        bool ok = false;
        std::map<int, double> on, off;  // SNR dB -> test accuracy
        double on_seconds = 0;
        std::string error;
    };
    std::optional<Desk> desk;
};

std::vector<Real> randn(Rng& rng, std::size_t n) {
    std::vector<Real> v(n);
    for (auto& x : v) x = static_cast<Real>(rng.normal());
    return v;
}

signal::IQSignal random_signal(Rng& rng, std::size_t n) {
    signal::IQSignal x;
    for (std::size_t i = 0; i < n; ++i) x.samples.emplace_back(float(rng.normal()), float(rng.normal()));
    return x;
}

// 1. Shapes of the periodic embedding and the fused vector.
Outcome shapes(Context&) {
    const auto t0 = Clock::now();
    Rng rng(1);
    const auto x = random_signal(rng, 2048);
    const Tensor a = model::periodic_embed(x, 72), b = model::periodic_embed(x, 56);
    const model::ModelConfig config;
    const auto params = model::init_params(config, 1);
    const auto out = model::model_forward(x, params, config);
    const double t = seconds_since(t0);
    const bool ok = a.shape() == nn::Shape{29, 144} && b.shape() == nn::Shape{37, 112} &&
                    out.fused.shape() == nn::Shape{1, 256} && config.fused_width() == 256 && t < kShapeBudgetS;
    return {ok, fmt("p=72 -> %zux%zu, p=56 -> %zux%zu, fused %zu, %.3f s", a.dim(0), a.dim(1), b.dim(0), b.dim(1),
                    out.fused.dim(1), t)};
}

// 2. Parameter counts against the published per-block figures.
Outcome parameters(Context&) {
    const model::ModelConfig config;
    const auto report = model::count_params(config, model::init_params(config, 1));
    bool ok = true;
    std::string asserted, encoders;
    std::size_t checked = 0;
    for (const auto& block : report.blocks) {
        if (!block.reference) continue;
        if (block.name.find("encoder") != std::string::npos) {
            encoders += fmt(" %s=%zu (reference %zu, delta %+lld)", block.name.c_str(), block.count, *block.reference,
                            static_cast<long long>(block.count) - static_cast<long long>(*block.reference));
            continue;
        }
        ++checked;
        ok = ok && block.count == *block.reference;
        asserted += fmt(" %s=%zu/%zu", block.name.c_str(), block.count, *block.reference);
    }
    ok = ok && checked == 6;
    return {ok, "asserted:" + asserted + "; reported:" + encoders};
}

// 3. FFT correlation against the direct shifted dot products.
Outcome dual_path(Context&) {
    const auto t0 = Clock::now();
    Rng rng(3);
    double worst = 0;
    for (std::size_t c = 0; c < kDualPathCases; ++c) {
        const std::size_t d = 8 + rng.below(249), n = 1 + rng.below(8);
        const auto q = randn(rng, n * d), k = randn(rng, n * d);
        const Tensor tq = Tensor::from({n, d}, q), tk = Tensor::from({n, d}, k);
        const Tensor a = model::intra_period_correlation(tq, tk, model::CorrelationPath::direct);
        const Tensor f = model::intra_period_correlation(tq, tk, model::CorrelationPath::fft);
        for (std::size_t i = 0; i < d; ++i) {
            worst = std::max(worst, std::abs(double(a.data()[i]) - double(f.data()[i])));
        }
    }
    const double t = seconds_since(t0);
    return {worst <= kDualPathTol && t < kDualPathBudgetS,
            fmt("%zu cases, d in [8, 256], max |direct - fft| = %.2e (tol %.0e), %.2f s", kDualPathCases, worst,
                kDualPathTol, t)};
}

// 4. Attention blocks against scalar loop oracles.
Outcome attention_oracles(Context&) {
    const auto t0 = Clock::now();
    Rng rng(4);
    double worst_inter = 0, worst_intra = 0;
    for (std::size_t c = 0; c < kOracleCases; ++c) {
        const std::size_t n = 1 + rng.below(4), period = 2 + rng.below(7), d = 2 * period;
        const std::size_t kd = 1 + rng.below(period - 1);
        const auto q = randn(rng, n * d), k = randn(rng, n * d), v = randn(rng, n * d);
        const Tensor tq = Tensor::from({n, d}, q), tk = Tensor::from({n, d}, k), tv = Tensor::from({n, d}, v);
        const Tensor inter = model::inter_period_attention(tq, tk, tv);
        const auto ref_inter = oracle::inter_attention<Real>(q, k, v, n, d);
        const auto ref_intra = oracle::intra_attention<Real>(q, k, v, n, d, kd, period);
        for (const auto path : {model::CorrelationPath::direct, model::CorrelationPath::fft}) {
            const Tensor intra = model::intra_period_attention(tq, tk, tv, kd, period, path);
            for (std::size_t i = 0; i < n * d; ++i) {
                worst_intra = std::max(worst_intra, std::abs(double(intra.data()[i]) - ref_intra[i]));
            }
        }
        for (std::size_t i = 0; i < n * d; ++i) {
            worst_inter = std::max(worst_inter, std::abs(double(inter.data()[i]) - ref_inter[i]));
        }
    }
    const double t = seconds_since(t0);
    return {worst_inter <= kOracleTol && worst_intra <= kOracleTol && t < kOracleBudgetS,
            fmt("%zu cases (N <= 4, d <= 16): inter %.2e, intra %.2e (tol %.0e), %.2f s", kOracleCases, worst_inter,
                worst_intra, kOracleTol, t)};
}

// 5. Finite-difference gradient suite in both precisions.
Outcome gradients(Context&) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::size_t n = 0;
    std::string failures;
    double e2e32 = 0, e2e64 = 0;
    for (const auto& [label, entries] :
         {std::pair{"f32", model::run_gradcheck32(42)}, std::pair{"f64", model::run_gradcheck64(42)}}) {
        for (const auto& e : entries) {
            ++n;
            ok = ok && e.passed;
            if (!e.passed) failures += fmt(" %s/%s=%.2e", label, e.name.c_str(), e.relative_error);
            if (e.name == "model_end_to_end") (std::string(label) == "f32" ? e2e32 : e2e64) = e.relative_error;
        }
    }
    const double t = seconds_since(t0);
    ok = ok && t < kGradBudgetS && e2e32 > 0 && e2e64 > 0;
    return {ok, fmt("%zu checks, end-to-end rel err f32 %.2e (< 1e-2), f64 %.2e (< 1e-4), %.2f s", n, e2e32, e2e64,
                    t) + (failures.empty() ? "" : "; failed:" + failures)};
}

// Naive O(L^2) periodogram, independent of the FFT used by the library.
std::vector<double> naive_psd(const signal::IQSignal& x) {
    const std::size_t n = x.length();
    std::vector<double> psd(n);
    for (std::size_t f = 0; f < n; ++f) {
        std::complex<double> acc = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2 * std::numbers::pi * double((f * t) % n) / double(n);
            acc += std::complex<double>(x.samples[t]) * std::polar(1.0, ang);
        }
        psd[f] = std::norm(acc) / double(n);
    }
    return psd;
}

// Spectrum offset, exhaustive sort of bins 1..L/2, refinement: all in plain loops.
struct OraclePeriods {
    std::vector<std::size_t> top_bins;
    std::vector<std::pair<std::size_t, std::size_t>> refined;  // (f_raw, p)
};

OraclePeriods oracle_periods(const std::vector<signal::Record>& records, std::size_t k, std::size_t alignment) {
    const std::size_t n = records.front().signal.length();
    std::vector<std::vector<double>> psds;
    for (const auto& r : records) psds.push_back(naive_psd(r.signal));
    std::vector<double> v(n, 0.0);
    for (std::size_t f = 0; f < n; ++f) {
        double mu = 0;
        for (const auto& p : psds) mu += p[f];
        mu /= double(psds.size());
        double var = 0;
        for (const auto& p : psds) var += (p[f] - mu) * (p[f] - mu);
        v[f] = std::sqrt(var / double(psds.size()));
    }
    std::vector<std::size_t> bins;
    for (std::size_t f = 1; f <= n / 2; ++f) bins.push_back(f);
    std::sort(bins.begin(), bins.end(), [&](std::size_t a, std::size_t b) { return v[a] != v[b] ? v[a] > v[b] : a < b; });
    OraclePeriods out;
    out.top_bins.assign(bins.begin(), bins.begin() + static_cast<std::ptrdiff_t>(k));
    for (const std::size_t f : out.top_bins) {
        const std::size_t p_raw = (n + f - 1) / f;
        const std::size_t p = std::max(alignment, (p_raw + alignment / 2) / alignment * alignment);
        if (p > n) continue;
        bool dup = false;
        for (const auto& e : out.refined) dup = dup || e.second == p;
        if (!dup) out.refined.emplace_back(f, p);
    }
    return out;
}

// Writes a dataset directory that load_dataset accepts.
void write_corpus(const fs::path& dir, const std::vector<signal::Record>& train, const std::vector<signal::Record>& test,
                  std::size_t n_devices, std::size_t length, int snr) {
    fs::create_directories(dir);
    signal::write_shard(dir / "train-000.bin", train, length);
    signal::write_shard(dir / "test-000.bin", test, length);
    const json manifest = {{"version", signal::kManifestVersion},
                           {"kind", "RDR"},
                           {"n_devices", n_devices},
                           {"window_length", length},
                           {"snr_list", signal::snr_list_to_json({snr})},
                           {"seed", 0},
                           {"counts", {{"train", train.size()}, {"test", test.size()}}},
                           {"shards", {{"train", {"train-000.bin"}}, {"test", {"test-000.bin"}}}}};
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

// 6. Period selection on a corpus where device groups differ by tones and CFO.
Outcome period_selection(Context& ctx) {
    const auto t0 = Clock::now();
    const std::size_t length = 2048, n_devices = 8, per_device = 12;
    const double fs_hz = signal::kSampleRateHz, bin_hz = fs_hz / double(length);
    Rng rng(6);
    std::vector<signal::Record> train, test;
    for (std::size_t i = 0; i < n_devices * (per_device + 2); ++i) {
        const int dev = static_cast<int>(i % n_devices);
        signal::Record r;
        r.label = dev;
        r.signal.device_id = dev;
        r.signal.snr_db = 20;
        // Every device carries its carrier residue; the CFO puts it at bin 29
        // for devices 0-3 and at bin 37 for 4-7. Odd devices add a spur at 90.
        const double cfo = (dev < 4 ? 29 : 37) * bin_hz;
        const double phase = rng.uniform(0, 2 * std::numbers::pi);
        for (std::size_t t = 0; t < length; ++t) {
            std::complex<double> s(0.3 * rng.normal(), 0.3 * rng.normal());
            s += std::polar(1.0, 2 * std::numbers::pi * cfo * double(t) / fs_hz + phase);
            if (dev % 2) s += std::polar(0.5, 2 * std::numbers::pi * 90.0 * double(t) / double(length));
            r.signal.samples.emplace_back(float(s.real()), float(s.imag()));
        }
        (i < n_devices * per_device ? train : test).push_back(std::move(r));
    }
    const fs::path dir = ctx.work / "tone_corpus";
    write_corpus(dir, train, test, n_devices, length, 20);

    const std::size_t k = 3, alignment = 8;
    const auto oracle = oracle_periods(train, k, alignment);
    const auto r = ctx.run({"analyze-spectrum", "--dataset", dir.string(), "--snr", "20", "--k", std::to_string(k),
                            "--alignment", std::to_string(alignment), "--split", "train", "--out",
                            (ctx.work / "tone_periods.json").string()});
    bool ok = r.code == 0 && r.last.is_object();
    std::vector<std::pair<std::size_t, std::size_t>> got;
    if (ok) {
        for (const auto& e : r.last.at("entries")) got.emplace_back(e.at("f_raw").get<std::size_t>(), e.at("p").get<std::size_t>());
    }
    const std::set<std::size_t> injected{29, 37, 90};
    const std::set<std::size_t> oracle_set(oracle.top_bins.begin(), oracle.top_bins.end());
    ok = ok && got == oracle.refined && oracle_set == injected;

    // The refinement example with alignment 8.
    spectrum::PeriodSet raw;
    raw.length = 2048;
    raw.k = 2;
    raw.entries = {{1, 29, 71, 29, 71}, {1, 37, 56, 37, 56}};
    const auto refined = spectrum::refine_periods(raw, 8).periods();
    ok = ok && refined == std::vector<std::size_t>{72, 56};
    const double t = seconds_since(t0);
    ok = ok && t < kPeriodBudgetS;
    std::string got_text;
    for (const auto& [f, p] : got) got_text += fmt(" %zu->%zu", f, p);
    return {ok, fmt("oracle top-%zu bins {%zu,%zu,%zu}, CLI (f_raw->p):%s; refine 71->%zu, 56->%zu; %.1f s", k,
                    oracle.top_bins[0], oracle.top_bins[1], oracle.top_bins[2], got_text.c_str(), refined.at(0),
                    refined.at(1), t)};
}

std::map<int, double> per_snr(const json& j) {
    std::map<int, double> m;
    for (const auto& e : j.at("per_snr")) {
        if (e.at("snr_db").is_number()) m[e.at("snr_db").get<int>()] = e.at("accuracy").get<double>();
    }
    return m;
}

const Context::Desk& desk_experiment(Context& ctx) {
    if (ctx.desk) return *ctx.desk;
    Context::Desk d;
    const fs::path cfg_on = ctx.configs / "desk.json";
    json cfg = json::parse(std::ifstream(cfg_on));
    cfg["model"]["enable_inter"] = false;
    cfg["model"]["enable_intra"] = false;
    const fs::path cfg_off = ctx.work / "desk_off.json";
    std::ofstream(cfg_off) << cfg.dump(2) << '\n';
    const fs::path data = ctx.work / "desk_data", periods = ctx.work / "desk_periods.json";
    const std::size_t length = cfg["model"]["signal_length"].get<std::size_t>();

    auto fail = [&](const std::string& what) {
        d.error = what;
        ctx.desk = d;
        return std::cref(*ctx.desk);
    };
    const auto t0 = Clock::now();
    if (ctx.run({"generate", "--config", cfg_on.string(), "--out", data.string()}).code != 0) return fail("generate");
    // At L = 512 the spectrum yields a single distinct period after
    // refinement, so the desk model uses a fixed pair.
    if (ctx.run({"analyze-spectrum", "--fixed", "16,8", "--length", std::to_string(length), "--out",
                 periods.string()})
            .code != 0) {
        return fail("analyze-spectrum");
    }
    for (const auto& [tag, cfg_path] : {std::pair{"on", cfg_on}, std::pair{"off", cfg_off}}) {
        const fs::path ckpt = ctx.work / (std::string("desk_") + tag + ".ckpt");
        if (ctx.run({"train", "--config", cfg_path.string(), "--dataset", data.string(), "--periods", periods.string(),
                     "--out", ckpt.string()})
                .code != 0) {
            return fail(std::string("train ") + tag);
        }
        const auto ev = ctx.run({"eval", "--ckpt", ckpt.string(), "--dataset", data.string(), "--out-dir",
                                 (ctx.work / (std::string("desk_eval_") + tag)).string()});
        if (ev.code != 0 || !ev.last.is_object()) return fail(std::string("eval ") + tag);
        (std::string(tag) == "on" ? d.on : d.off) = per_snr(ev.last);
        if (std::string(tag) == "on") d.on_seconds = seconds_since(t0);
    }
    d.ok = true;
    ctx.desk = d;
    return *ctx.desk;
}

// 7. Synthetic end-to-end experiment.
Outcome desk_accuracy(Context& ctx) {
    const auto& d = desk_experiment(ctx);
    if (!d.ok) return {false, "pipeline failed at " + d.error};
    const double a0 = d.on.count(0) ? d.on.at(0) : -1, a10 = d.on.count(10) ? d.on.at(10) : -1,
                 a20 = d.on.count(20) ? d.on.at(20) : -1;
    const bool ok = a20 >= kDeskMinAcc20 && a20 >= a10 && a10 >= a0 && a0 >= 0 && d.on_seconds < kDeskBudgetS;
    return {ok, fmt("test accuracy 20 dB %.3f (>= %.2f), 10 dB %.3f, 0 dB %.3f (non-increasing), %.0f s", a20,
                    kDeskMinAcc20, a10, a0, d.on_seconds)};
}

// 8. Ablation: exact structure with both attention flags off, and the accuracy margin.
Outcome ablation(Context& ctx) {
    model::ModelConfig config;
    config.signal_length = 512;
    config.periods = {16, 8};
    config.n_layers = 2;
    config.n_classes = 8;
    config.enable_inter = config.enable_intra = false;
    auto params = model::init_params(config, 8);
    Rng rng(8);
    std::vector<signal::IQSignal> xs;
    for (int i = 0; i < 4; ++i) xs.push_back(random_signal(rng, 512));
    std::vector<const signal::IQSignal*> batch;
    for (const auto& x : xs) batch.push_back(&x);

    bool structure = true;
    // Gamma = X exactly when neither branch contributes.
    const Tensor x = Tensor::from({33, 32}, randn(rng, 33 * 32));
    const Tensor gamma = model::fuse_attention(x, std::nullopt, std::nullopt, config.sigma, config.varsigma);
    structure = structure && std::equal(gamma.data().begin(), gamma.data().end(), x.data().begin());
    // The encoder reduces to LN2(h + FFN(h)), h = LN1(X), bit for bit.
    const auto& layer = params.branches[0].layers[0];
    const Tensor h = nn::layer_norm(x, layer.norm1.gain, layer.norm1.bias);
    const Tensor ref =
        nn::layer_norm(nn::add(h, model::ffn_forward(h, layer.ffn_in, layer.ffn_out)), layer.norm2.gain, layer.norm2.bias);
    const Tensor enc = model::encoder_layer(x, layer, config.branches()[0], config);
    structure = structure && std::equal(enc.data().begin(), enc.data().end(), ref.data().begin());
    // Attention parameters cannot influence the output.
    const auto before = model::model_forward(batch, params, config);
    for (auto& branch : params.branches) {
        for (auto& l : branch.layers) {
            for (model::Affine* a : {&l.query, &l.key, &l.value, &l.output}) {
                for (auto& w : a->weight.mutable_data()) w = static_cast<Real>(rng.normal());
                for (auto& w : a->bias.mutable_data()) w = static_cast<Real>(rng.normal());
            }
        }
    }
    const auto after = model::model_forward(batch, params, config);
    structure = structure && std::equal(before.logits.data().begin(), before.logits.data().end(),
                                        after.logits.data().begin());

    const auto& d = desk_experiment(ctx);
    if (!d.ok) return {false, "structure " + std::string(structure ? "exact" : "BROKEN") + "; pipeline failed at " + d.error};
    const double on = d.on.count(20) ? d.on.at(20) : -1, off = d.off.count(20) ? d.off.at(20) : -1;
    const double margin = on - off;
    const bool ok = structure && margin >= kAblationMargin;
    return {ok, fmt("Lambda/Sigma contributions %s; 20 dB accuracy on %.3f vs off %.3f, margin %+.1f points (need >= "
                    "%.0f); off at 10/0 dB %.3f/%.3f",
                    structure ? "exactly zero" : "NOT zero", on, off, 100 * margin, 100 * kAblationMargin,
                    d.off.count(10) ? d.off.at(10) : -1.0, d.off.count(0) ? d.off.at(0) : -1.0)};
}

// 9. AWGN calibration over the default sweep at L = 2048.
Outcome awgn(Context&) {
    signal::DatasetSpec spec;
    const auto profile = signal::sample_device_profiles(2, 9)[0];
    double worst_mean = 0, worst_single = 0;
    std::size_t levels = 0;
    for (const auto& snr : signal::default_snr_list()) {
        ++levels;
        double ps_total = 0, pn_total = 0;
        for (std::size_t i = 0; i < kAwgnDraws; ++i) {
            const signal::IQSignal clean = signal::synthesize_clean_window(spec, profile, i);
            Rng rng(derive_seed(9, static_cast<std::uint64_t>(*snr + 100), i));
            const signal::IQSignal noisy = signal::add_awgn(clean, snr, rng);
            double ps = 0, pn = 0;
            for (std::size_t t = 0; t < clean.length(); ++t) {
                ps += std::norm(std::complex<double>(clean.samples[t]));
                pn += std::norm(std::complex<double>(noisy.samples[t]) - std::complex<double>(clean.samples[t]));
            }
            ps_total += ps;
            pn_total += pn;
            worst_single = std::max(worst_single, std::abs(10 * std::log10(ps / pn) - *snr));
        }
        worst_mean = std::max(worst_mean, std::abs(10 * std::log10(ps_total / pn_total) - *snr));
    }
    return {worst_mean <= kAwgnTolDb,
            fmt("%zu levels (-20..20 dB), L = %zu, %zu draws each: worst measured offset %.3f dB (tol %.1f); worst "
                "single draw %.3f dB",
                levels, spec.effective_window_length(), kAwgnDraws, worst_mean, kAwgnTolDb, worst_single)};
}

// 10. Bitwise determinism of generate, train and eval.
Outcome determinism(Context& ctx) {
    const std::string cfg = (ctx.configs / "tiny.json").string();
    const std::string env = "RFF_THREADS=2";
    std::vector<std::string> mismatches;
    for (const char* tag : {"a", "b"}) {
        const fs::path root = ctx.work / (std::string("det_") + tag);
        fs::create_directories(root);
        if (ctx.run({"generate", "--config", cfg, "--out", (root / "data").string()}, env).code != 0 ||
            ctx.run({"analyze-spectrum", "--config", cfg, "--dataset", (root / "data").string(), "--out",
                     (root / "periods.json").string()},
                    env)
                    .code != 0 ||
            ctx.run({"train", "--config", cfg, "--dataset", (root / "data").string(), "--periods",
                     (root / "periods.json").string(), "--out", (root / "model.ckpt").string()},
                    env)
                    .code != 0 ||
            ctx.run({"eval", "--ckpt", (root / "model.ckpt").string(), "--dataset", (root / "data").string(),
                     "--out-dir", (root / "eval").string()},
                    env)
                    .code != 0) {
            return {false, std::string("pipeline failed in run ") + tag};
        }
    }
    std::size_t compared = 0;
    const fs::path a = ctx.work / "det_a", b = ctx.work / "det_b";
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        ++compared;
        if (!fs::exists(b / rel) || read_text(entry.path()) != read_text(b / rel)) mismatches.push_back(rel.string());
    }
    std::string detail = fmt("%zu files compared across two generate/analyze/train/eval runs", compared);
    if (!mismatches.empty()) detail += "; differing: " + mismatches.front();
    return {mismatches.empty() && compared >= 8, detail};
}

// 11. Batch-1 inference time and operation count of the default model.
Outcome inference(Context&) {
    const model::ModelConfig config;
    const auto params = model::init_params(config, 11);
    Rng rng(11);
    const auto x = random_signal(rng, config.signal_length);
    nn::NoGradGuard no_grad;
    model::model_forward(x, params, config);
    std::vector<double> times;
    for (int i = 0; i < 5; ++i) {
        const auto t0 = Clock::now();
        model::model_forward(x, params, config);
        times.push_back(seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    const double median = times[2];
    const double mflops = kFlopsPerMac * double(model::estimate_macs(config)) / 1e6;
    const double ratio = mflops / kReferenceMflops;
    const bool ok = median < kForwardBudgetS && ratio >= 0.1 && ratio <= 10.0;
    return {ok, fmt("median batch-1 forward %.1f ms (< %.0f ms); %.1f MFLOPs vs reference %.1f (ratio %.2f, within 10x)",
                    1e3 * median, 1e3 * kForwardBudgetS, mflops, kReferenceMflops, ratio)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::vector<int> only;
    std::string work_dir, cli_path = RFF_CLI_PATH, config_dir = RFF_CONFIG_DIR;
    bool keep = false;
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--work-dir", work_dir, "Scratch directory (default: a fresh temporary directory)");
    app.add_option("--cli", cli_path, "Path to the rff binary");
    app.add_option("--configs", config_dir, "Directory holding desk.json and tiny.json");
    app.add_flag("--keep", keep, "Keep the scratch directory");
    CLI11_PARSE(app, argc, argv);

    Context ctx;
    ctx.cli = cli_path;
    ctx.configs = config_dir;
    const bool temp = work_dir.empty();
    ctx.work = temp ? fs::temp_directory_path() / fmt("rff_acceptance_%d", static_cast<int>(::getpid())) : fs::path(work_dir);
    fs::create_directories(ctx.work);

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
        {"shape reproduction", shapes},
        {"parameter reproduction", parameters},
        {"dual-path correlation oracle", dual_path},
        {"attention oracles", attention_oracles},
        {"gradient suite", gradients},
        {"period selection oracle", period_selection},
        {"synthetic end-to-end experiment", desk_accuracy},
        {"ablation structure and margin", ablation},
        {"AWGN calibration", awgn},
        {"determinism", determinism},
        {"inference sanity", inference},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i].second(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    if (temp && !keep) {
        std::error_code ec;
        fs::remove_all(ctx.work, ec);
    } else {
        std::cout << "scratch directory: " << ctx.work.string() << '\n';
    }
    return failed == 0 ? 0 : 1;
}
