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

#include "rff/common/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "rff/common/error.hpp"

namespace rff::dsp {
namespace {

enum class PlanKind { forward, backward, r2c, c2r };

// FFTW planning is not thread safe; execution with the new-array interface is.
// Plans are created once per (kind, n) on scratch buffers and reused.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) {
            fftw_destroy_plan(plan);
        }
    }

    fftw_plan get(PlanKind kind, std::size_t n) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(kind, n);
        if (auto it = plans_.find(key); it != plans_.end()) {
            return it->second;
        }
        const int len = static_cast<int>(n);
        auto* cin = fftw_alloc_complex(n);
        auto* cout = fftw_alloc_complex(n);
        auto* rbuf = fftw_alloc_real(n);
        fftw_plan plan = nullptr;
        switch (kind) {
            case PlanKind::forward:
                plan = fftw_plan_dft_1d(len, cin, cout, FFTW_FORWARD, FFTW_ESTIMATE);
                break;
            case PlanKind::backward:
                plan = fftw_plan_dft_1d(len, cin, cout, FFTW_BACKWARD, FFTW_ESTIMATE);
                break;
            case PlanKind::r2c:
                plan = fftw_plan_dft_r2c_1d(len, rbuf, cout, FFTW_ESTIMATE);
                break;
            case PlanKind::c2r:
                plan = fftw_plan_dft_c2r_1d(len, cin, rbuf, FFTW_ESTIMATE);
                break;
        }
        fftw_free(cin);
        fftw_free(cout);
        fftw_free(rbuf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<PlanKind, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

// FFTW's new-array execute requires the same alignment the plan was made with.
struct ComplexBuffer {
    explicit ComplexBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {}
    ~ComplexBuffer() { fftw_free(ptr); }
    ComplexBuffer(const ComplexBuffer&) = delete;
    ComplexBuffer& operator=(const ComplexBuffer&) = delete;
    fftw_complex* ptr;
};

struct RealBuffer {
    explicit RealBuffer(std::size_t n) : ptr(fftw_alloc_real(n)) {}
    ~RealBuffer() { fftw_free(ptr); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
    double* ptr;
};

void require_nonempty(std::size_t n, const char* who) {
    if (n == 0) {
        throw DimensionError(std::string(who) + ": zero-length input");
    }
}

std::vector<cdouble> complex_transform(std::span<const cdouble> x, PlanKind kind) {
    const std::size_t n = x.size();
    ComplexBuffer in(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        in.ptr[i][0] = x[i].real();
        in.ptr[i][1] = x[i].imag();
    }
    fftw_execute_dft(cache().get(kind, n), in.ptr, out.ptr);
    std::vector<cdouble> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = {out.ptr[i][0], out.ptr[i][1]};
    }
    return y;
}

}  // namespace

std::vector<cdouble> fft(std::span<const cdouble> x) {
    require_nonempty(x.size(), "fft");
    return complex_transform(x, PlanKind::forward);
}

std::vector<cdouble> ifft(std::span<const cdouble> spectrum) {
    require_nonempty(spectrum.size(), "ifft");
    auto y = complex_transform(spectrum, PlanKind::backward);
    const double scale = 1.0 / static_cast<double>(y.size());
    for (auto& v : y) {
        v *= scale;
    }
    return y;
}

std::vector<cdouble> rfft(std::span<const double> x) {
    const std::size_t n = x.size();
    require_nonempty(n, "rfft");
    RealBuffer in(n);
    ComplexBuffer out(n / 2 + 1);
    std::copy(x.begin(), x.end(), in.ptr);
    fftw_execute_dft_r2c(cache().get(PlanKind::r2c, n), in.ptr, out.ptr);
    std::vector<cdouble> y(n / 2 + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = {out.ptr[i][0], out.ptr[i][1]};
    }
    return y;
}

std::vector<double> irfft(std::span<const cdouble> half_spectrum, std::size_t n) {
    require_nonempty(n, "irfft");
    if (half_spectrum.size() != n / 2 + 1) {
        throw DimensionError("irfft: expected " + std::to_string(n / 2 + 1) + " bins for length " +
                             std::to_string(n) + ", got " + std::to_string(half_spectrum.size()));
    }
    // c2r overwrites its input, so it always gets a scratch copy.
    ComplexBuffer in(n / 2 + 1);
    RealBuffer out(n);
    for (std::size_t i = 0; i < half_spectrum.size(); ++i) {
        in.ptr[i][0] = half_spectrum[i].real();
        in.ptr[i][1] = half_spectrum[i].imag();
    }
    fftw_execute_dft_c2r(cache().get(PlanKind::c2r, n), in.ptr, out.ptr);
    std::vector<double> y(out.ptr, out.ptr + n);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : y) {
        v *= scale;
    }
    return y;
}

}  // namespace rff::dsp
