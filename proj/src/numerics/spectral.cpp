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

#include "rff/numerics/spectral.hpp"

#include <string>

#include "rff/common/error.hpp"
#include "rff/common/fft.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

std::vector<std::complex<Real>> rfft(std::span<const Real> x) {
    if (x.empty()) {
        throw DimensionError("rfft: zero-length input");
    }
    std::vector<double> xd(x.begin(), x.end());
    const auto spec = dsp::rfft(xd);
    std::vector<std::complex<Real>> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        out[i] = {static_cast<Real>(spec[i].real()), static_cast<Real>(spec[i].imag())};
    }
    return out;
}

std::vector<Real> irfft(std::span<const std::complex<Real>> spectrum, std::size_t n) {
    std::vector<dsp::cdouble> sd(spectrum.begin(), spectrum.end());
    const auto y = dsp::irfft(sd, n);
    return std::vector<Real>(y.begin(), y.end());
}

std::vector<Real> circular_xcorr_fft(std::span<const Real> a, std::span<const Real> b) {
    if (a.size() != b.size() || a.empty()) {
        throw DimensionError("circular_xcorr: lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    }
    std::vector<double> ad(a.begin(), a.end());
    std::vector<double> bd(b.begin(), b.end());
    auto fa = dsp::rfft(ad);
    const auto fb = dsp::rfft(bd);
    for (std::size_t i = 0; i < fa.size(); ++i) {
        fa[i] *= std::conj(fb[i]);
    }
    const auto r = dsp::irfft(fa, a.size());
    return std::vector<Real>(r.begin(), r.end());
}

std::vector<Real> circular_xcorr_direct(std::span<const Real> a, std::span<const Real> b) {
    if (a.size() != b.size() || a.empty()) {
        throw DimensionError("circular_xcorr: lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    }
    const std::size_t n = a.size();
    std::vector<Real> r(n, Real{0});
    for (std::size_t tau = 0; tau < n; ++tau) {
        Real acc = 0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += a[(t + tau) % n] * b[t];
        }
        r[tau] = acc;
    }
    return r;
}

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
