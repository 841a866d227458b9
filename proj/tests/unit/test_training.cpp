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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "rff/common/error.hpp"
#include "rff/common/rng.hpp"
#include "rff/signal/dataset.hpp"
#include "rff/training/bench.hpp"
#include "rff/training/evaluate.hpp"
#include "rff/training/train.hpp"

#include "test_util.hpp"

using namespace rff;
using namespace rff::training;

namespace {

signal::DatasetSpec tiny_spec() {
    signal::DatasetSpec spec;
    spec.n_devices = 4;
    spec.records_per_device_per_snr = 10;
    spec.snr_list = {20, 10};
    spec.window_length = 32;
    spec.seed = 5;
    return spec;
}

TrainRequest tiny_request(const std::filesystem::path& data, const std::filesystem::path& out) {
    TrainRequest req;
    req.dataset_dir = data;
    req.model.n_layers = 1;
    req.model.k_delay = 2;
    req.model.n_classes = 4;
    req.model.fusion_hidden = 4;
    req.model.classifier_hidden = {8};
    const std::vector<std::size_t> periods{8, 4};
    req.periods = spectrum::period_set_from_periods(periods, 32);
    req.train.max_lr = 3e-3;
    req.train.warmup_steps = 4;
    req.train.batch_size = 16;
    req.train.epochs = 2;
    req.train.seed = 9;
    req.out = out;
    return req;
}

}  // namespace

TEST_CASE("metrics: perfect predictions") {
    const std::vector<int> labels{0, 1, 2, 0, 1, 2};
    const std::vector<signal::Snr> snrs{0, 0, 0, 10, 10, std::nullopt};
    const auto m = compute_metrics(labels, snrs, labels, 3, 0);
    CHECK(m.overall_accuracy == 1.0);
    REQUIRE(m.per_snr.size() == 3);
    CHECK(m.per_snr[0].snr == 0);
    CHECK(m.per_snr[1].snr == 10);
    CHECK_FALSE(m.per_snr[2].snr.has_value());
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(m.confusion_percent[i][j] == (i == j ? 100.0 : 0.0));
    }
    CHECK_THROWS(compute_metrics(labels, snrs, std::vector<int>{0}, 3, 0));
}

TEST_CASE("metrics: uniform random predictions sit near chance") {
    Rng rng(1);
    const std::size_t n = 32000, classes = 32;
    std::vector<int> labels(n), preds(n);
    std::vector<signal::Snr> snrs(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = int(rng.below(classes));
        preds[i] = int(rng.below(classes));
    }
    const auto m = compute_metrics(labels, snrs, preds, classes, 0);
    const double p = 1.0 / classes, sd = std::sqrt(p * (1 - p) / double(n));
    CHECK(std::abs(m.overall_accuracy - p) < 3 * sd);
    for (const auto& row : m.confusion_percent) {
        double total = 0;
        for (const double x : row) total += x;
        CHECK(total == doctest::Approx(100.0));
    }
}

TEST_CASE("metrics files") {
    TempDir tmp("metrics");
    const std::vector<int> labels{0, 1, 1, 0};
    const std::vector<signal::Snr> snrs{0, 0, 20, 20};
    const std::vector<int> preds{0, 0, 1, 0};
    const auto m = compute_metrics(labels, snrs, preds, 2, 0);
    write_metrics(tmp.path, m);
    CHECK(read_file(tmp.path / "accuracy.csv") == "snr_db,accuracy\n0,0.500000\n20,1.000000\n");
    CHECK(read_file(tmp.path / "confusion.csv") == "100.0000,0.0000\n100.0000,0.0000\n");
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.max_lr = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.validation_fraction = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(train_config_from_json({{"learning_rate", 1}}), ConfigError);
    const auto round = train_config_from_json(to_json(TrainConfig{}));
    CHECK(to_json(round) == to_json(TrainConfig{}));
}

TEST_CASE("tiny training run: determinism, resume, evaluation") {
    TempDir tmp("train");
    signal::generate_dataset(tiny_spec(), tmp.path / "data");

    std::ostringstream log_a, log_b;
    auto req = tiny_request(tmp.path / "data", tmp.path / "a.ckpt");
    req.log = &log_a;
    const auto a = train(req);
    CHECK(a.epochs_completed == 2);
    CHECK(a.steps > 0);
    CHECK(std::isfinite(a.final_loss));
    CHECK(a.best_validation_accuracy.has_value());
    CHECK(std::filesystem::exists(best_checkpoint_path(tmp.path / "a.ckpt")));
    CHECK(log_a.str().rfind("step,lr,loss,acc\n", 0) == 0);

    req.out = tmp.path / "b.ckpt";
    req.log = &log_b;
    train(req);
    CHECK(read_file(tmp.path / "a.ckpt") == read_file(tmp.path / "b.ckpt"));
    CHECK(log_a.str() == log_b.str());

    SUBCASE("resume matches an uninterrupted run") {
        auto first = tiny_request(tmp.path / "data", tmp.path / "c.ckpt");
        first.stop_after_epochs = 1;
        CHECK(train(first).epochs_completed == 1);
        auto second = tiny_request(tmp.path / "data", tmp.path / "c.ckpt");
        second.resume = tmp.path / "c.ckpt";
        CHECK(train(second).epochs_completed == 2);
        CHECK(read_file(tmp.path / "a.ckpt") == read_file(tmp.path / "c.ckpt"));
    }
    SUBCASE("a different seed gives different weights") {
        auto other = tiny_request(tmp.path / "data", tmp.path / "d.ckpt");
        other.train.seed = 10;
        train(other);
        CHECK(read_file(tmp.path / "a.ckpt") != read_file(tmp.path / "d.ckpt"));
    }
    SUBCASE("evaluation and embeddings") {
        const auto ckpt = model::load_checkpoint(tmp.path / "a.ckpt");
        const auto test = signal::load_dataset(tmp.path / "data", "test");
        const auto m = evaluate(ckpt, test, 20);
        CHECK(m.n_records == test.size());
        CHECK(m.per_snr.size() == 2);
        const auto again = evaluate(ckpt, test, 20, 3);
        CHECK(again.overall_accuracy == m.overall_accuracy);
        export_embeddings(ckpt, test, tmp.path / "emb.csv");
        std::istringstream is(read_file(tmp.path / "emb.csv"));
        std::string header, row;
        std::getline(is, header);
        std::getline(is, row);
        CHECK(header.rfind("label,snr,f0,", 0) == 0);
        CHECK(std::count(row.begin(), row.end(), ',') == 2 + 24 - 1);
    }
    SUBCASE("mismatched class count is rejected") {
        auto ckpt = model::load_checkpoint(tmp.path / "a.ckpt");
        ckpt.config.n_classes = 5;
        const auto test = signal::load_dataset(tmp.path / "data", "test");
        CHECK_THROWS_AS(evaluate(ckpt, test, 20), ConfigError);
    }
}

TEST_CASE("divergent training aborts with a record dump") {
    TempDir tmp("nan");
    signal::generate_dataset(tiny_spec(), tmp.path / "data");
    auto req = tiny_request(tmp.path / "data", tmp.path / "x.ckpt");
    req.train.max_lr = 1e30;
    CHECK_THROWS_AS(train(req), NumericalError);
    CHECK(std::filesystem::exists(tmp.path / "x.ckpt.nan.json"));
}

TEST_CASE("bench validates its arguments") {
    model::ModelConfig config;
    config.signal_length = 32;
    config.periods = {8, 4};
    config.n_layers = 1;
    config.n_classes = 4;
    const auto params = model::init_params(config, 1);
    CHECK_THROWS_AS(bench_inference(params, config, 1, 5, 1), ConfigError);
    const auto r = bench_inference(params, config, 2, 10, 1);
    CHECK(r.iters == 10);
    CHECK(r.mean_ms > 0);
    CHECK(r.p95_ms >= r.p50_ms);
    CHECK(r.macs == model::estimate_macs(config));
}
