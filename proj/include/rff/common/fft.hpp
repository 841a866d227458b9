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
#include <cstddef>
#include <span>
#include <vector>

namespace rff::dsp {

using cdouble = std::complex<double>;

/// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-j 2 pi k n / N).
std::vector<cdouble> fft(std::span<const cdouble> x);
/// Inverse DFT including the 1/N factor.
std::vector<cdouble> ifft(std::span<const cdouble> spectrum);

/// Real-input DFT; returns the N/2+1 non-redundant bins.
std::vector<cdouble> rfft(std::span<const double> x);
/// Inverse of rfft for a signal of length n (1/n included).
std::vector<double> irfft(std::span<const cdouble> half_spectrum, std::size_t n);

}  // namespace rff::dsp
