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

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "rff/numerics/real.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

/// Real-input DFT (n/2+1 bins). Forward-only: no computation record.
std::vector<std::complex<Real>> rfft(std::span<const Real> x);
/// Inverse of rfft for length n, including the 1/n factor.
std::vector<Real> irfft(std::span<const std::complex<Real>> spectrum, std::size_t n);

/// Circular cross-correlation r[tau] = sum_t a[(t + tau) mod n] * b[t] via the
/// Wiener-Khinchin route IFFT(FFT(a) * conj(FFT(b))).
std::vector<Real> circular_xcorr_fft(std::span<const Real> a, std::span<const Real> b);
/// Same quantity by direct shifted dot products.
std::vector<Real> circular_xcorr_direct(std::span<const Real> a, std::span<const Real> b);

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
