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
#include <numeric>
#include <vector>

#include "rff/common/error.hpp"
#include "rff/common/rng.hpp"
#include "rff/model/gradcheck_suite.hpp"
#include "rff/numerics/kernels.hpp"
#include "rff/numerics/ops.hpp"
#include "rff/numerics/optim.hpp"
#include "rff/numerics/schedule.hpp"
#include "rff/numerics/spectral.hpp"

using namespace rff;
using nn::Real;
using nn::Tensor;

namespace {

std::vector<Real> randn(Rng& rng, std::size_t n) {
    std::vector<Real> v(n);
    for (auto& x : v) x = static_cast<Real>(rng.normal());
    return v;
}

double max_abs_diff(std::span<const Real> a, std::span<const Real> b) {
    REQUIRE(a.size() == b.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
    return m;
}

}  // namespace

TEST_CASE("tensor construction rejects bad input") {
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(Tensor::from({1}, {std::nanf("")}), NumericalError);
    CHECK_THROWS_AS(Tensor::from({1}, {INFINITY}), NumericalError);
    const Tensor z = Tensor::zeros({3, 4});
    CHECK(z.numel() == 12);
    CHECK(z.at({2, 3}) == 0);
}

TEST_CASE("rng is reproducible and uniform draws stay in range") {
    Rng a(5), b(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng c(9);
    const auto state = c.serialize();
    const double next = c.normal();
    Rng d(0);
    d.deserialize(state);
    CHECK(d.normal() == next);
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("gemm kernels match a naive triple loop") {
    Rng rng(3);
    for (const auto [m, k, n] : {std::array<std::size_t, 3>{1, 1, 1}, {3, 5, 7}, {17, 9, 33}, {64, 1, 2}}) {
        const auto a = randn(rng, m * k), b = randn(rng, k * n), bt = randn(rng, n * k), at = randn(rng, m * n);
        std::vector<Real> c(m * n, 0), ref(m * n, 0);
        nn::kernels::gemm_nn(a.data(), b.data(), c.data(), m, k, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t p = 0; p < k; ++p) ref[i * n + j] += a[i * k + p] * b[p * n + j];
        CHECK(max_abs_diff(c, ref) < 1e-4);

        std::fill(c.begin(), c.end(), 0);
        std::fill(ref.begin(), ref.end(), 0);
        nn::kernels::gemm_nt(a.data(), bt.data(), c.data(), m, k, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t p = 0; p < k; ++p) ref[i * n + j] += a[i * k + p] * bt[j * k + p];
        CHECK(max_abs_diff(c, ref) < 1e-4);

        std::vector<Real> g(k * n, 0), gref(k * n, 0);
        nn::kernels::gemm_tn(a.data(), at.data(), g.data(), m, k, n);
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < m; ++i) gref[p * n + j] += a[i * k + p] * at[i * n + j];
        CHECK(max_abs_diff(g, gref) < 1e-4);
    }
}

TEST_CASE("softmax rows sum to one") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t rows = 1 + rng.below(6), cols = 1 + rng.below(20);
        auto v = randn(rng, rows * cols);
        for (auto& x : v) x *= 10;
        const Tensor s = nn::softmax(Tensor::from({rows, cols}, v), 1);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0;
            for (std::size_t c = 0; c < cols; ++c) sum += s.at({r, c});
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("layer norm output has zero mean and unit variance per row") {
    Rng rng(6);
    const Tensor x = Tensor::from({4, 16}, randn(rng, 64));
    const Tensor y = nn::layer_norm(x, Tensor::full({16}, 1), Tensor::zeros({16}));
    for (std::size_t r = 0; r < 4; ++r) {
        double mean = 0, var = 0;
        for (std::size_t c = 0; c < 16; ++c) mean += y.at({r, c});
        mean /= 16;
        for (std::size_t c = 0; c < 16; ++c) var += (y.at({r, c}) - mean) * (y.at({r, c}) - mean);
        CHECK(mean == doctest::Approx(0).epsilon(1e-5));
        CHECK(var / 16 == doctest::Approx(1).epsilon(1e-3));
    }
}

TEST_CASE("cross entropy of uniform logits is ln C") {
    const Tensor logits = Tensor::zeros({3, 32});
    const std::vector<int> labels{0, 5, 31};
    CHECK(nn::cross_entropy(logits, labels).item() == doctest::Approx(std::log(32.0)).epsilon(1e-3));
    const std::vector<int> bad{0, 5, 32};
    CHECK_THROWS(nn::cross_entropy(logits, bad));
}

TEST_CASE("backward accumulates leaf gradients across calls") {
    Tensor w = Tensor::from({2}, {1, 2}, true);
    auto loss = [&] { return nn::sum(nn::mul(w, w)); };
    nn::backward(loss());
    CHECK(w.grad() == std::vector<Real>{2, 4});
    nn::backward(loss());
    CHECK(w.grad() == std::vector<Real>{4, 8});
    w.zero_grad();
    CHECK(w.grad() == std::vector<Real>{0, 0});
}

TEST_CASE("no-grad guard stops recording") {
    Tensor w = Tensor::from({2}, {1, 2}, true);
    {
        nn::NoGradGuard guard;
        CHECK_FALSE(nn::grad_enabled());
        CHECK(nn::scale(w, 2).impl().is_leaf());
    }
    CHECK(nn::grad_enabled());
    CHECK_FALSE(nn::scale(w, 2).impl().is_leaf());
}

TEST_CASE("dropout is identity in eval mode and keeps expectation in training") {
    Rng rng(1);
    const Tensor x = Tensor::full({10000}, 1);
    CHECK(nn::dropout(x, Real(0.3), rng, false).data()[17] == 1);
    const Tensor y = nn::dropout(x, Real(0.3), rng, true);
    double mean = 0;
    std::size_t zeros = 0;
    for (const Real v : y.data()) {
        mean += v;
        zeros += v == 0;
    }
    CHECK(mean / 10000 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(static_cast<double>(zeros) / 10000 == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("irfft inverts rfft for every length up to 256") {
    Rng rng(8);
    for (std::size_t n = 1; n <= 256; ++n) {
        const auto x = randn(rng, n);
        const auto spec = nn::rfft(x);
        CHECK(spec.size() == n / 2 + 1);
        const auto back = nn::irfft(spec, n);
        CHECK(max_abs_diff(x, back) < 1e-5);
    }
}

TEST_CASE("fft cross-correlation equals the direct sum") {
    Rng rng(10);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(128);
        const auto a = randn(rng, n), b = randn(rng, n);
        CHECK(max_abs_diff(nn::circular_xcorr_fft(a, b), nn::circular_xcorr_direct(a, b)) < 1e-4);
    }
}

TEST_CASE("adamw matches a scalar reference update") {
    Tensor p = Tensor::from({2}, {0.5f, -1.0f}, true);
    std::vector<Tensor> params{p};
    nn::OptimizerState st;
    const nn::AdamWConfig cfg{0.9, 0.999, 1e-8, 0.01};
    double ref[2] = {0.5, -1.0}, m[2] = {0, 0}, v[2] = {0, 0};
    const double lr = 0.1;
    for (int t = 1; t <= 3; ++t) {
        p.zero_grad();
        nn::backward(nn::sum(nn::mul(p, p)));
        const auto g = p.grad();
        nn::adamw_step(params, st, lr, cfg);
        for (int i = 0; i < 2; ++i) {
            const double gi = 2 * ref[i];
            CHECK(g[i] == doctest::Approx(gi).epsilon(1e-5));
            ref[i] *= 1 - lr * cfg.weight_decay;
            m[i] = 0.9 * m[i] + 0.1 * gi;
            v[i] = 0.999 * v[i] + 0.001 * gi * gi;
            const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
            ref[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
        }
        CHECK(p.data()[0] == doctest::Approx(ref[0]).epsilon(1e-5));
        CHECK(p.data()[1] == doctest::Approx(ref[1]).epsilon(1e-5));
    }
    CHECK(st.step == 3);
}

TEST_CASE("adamw with zero learning rate changes nothing") {
    Rng rng(2);
    Tensor p = Tensor::from({5}, randn(rng, 5), true);
    const std::vector<Real> before(p.data().begin(), p.data().end());
    std::vector<Tensor> params{p};
    nn::OptimizerState st;
    nn::backward(nn::sum(nn::mul(p, p)));
    nn::adamw_step(params, st, 0.0, {});
    CHECK(std::vector<Real>(p.data().begin(), p.data().end()) == before);
}

TEST_CASE("warmup-cosine schedule") {
    const nn::LrSchedule s{7e-4, 4080, 4080 * 20};
    CHECK(nn::lr_at(s, 0) == 0.0);
    CHECK(nn::lr_at(s, 4080) == doctest::Approx(7e-4));
    CHECK(nn::lr_at(s, 2040) == doctest::Approx(3.5e-4));
    CHECK(nn::lr_at(s, s.total_steps) == doctest::Approx(0).epsilon(1e-12));
    CHECK(nn::lr_at(s, s.total_steps + 100) == nn::lr_at(s, s.total_steps));
    double prev = 1;
    for (std::uint64_t t = 4080; t <= s.total_steps; t += 97) {
        const double lr = nn::lr_at(s, t);
        CHECK(lr <= prev + 1e-15);
        prev = lr;
    }
    CHECK_THROWS_AS((nn::LrSchedule{0, 1, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((nn::LrSchedule{1e-3, 5, 5}.validate()), ConfigError);
}

TEST_CASE("gradient suite passes in both precisions") {
    for (const auto& e : model::run_gradcheck32(7)) {
        INFO("f32 " << e.name << " rel_err " << e.relative_error);
        CHECK(e.passed);
        CHECK(e.tolerance == 1e-2);
    }
    for (const auto& e : model::run_gradcheck64(7)) {
        INFO("f64 " << e.name << " rel_err " << e.relative_error);
        CHECK(e.passed);
        CHECK(e.tolerance == 1e-4);
    }
}
