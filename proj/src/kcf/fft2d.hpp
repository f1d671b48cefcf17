// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <complex>
#include <vector>

namespace iatrack::kcf {

using Spectrum = std::vector<std::complex<double>>;

/// Unnormalized forward 2-D DFT of a real h x w map (row-major).
Spectrum fft2(const double* data, int h, int w);

/// Inverse 2-D DFT scaled by 1/(h*w).
Spectrum ifft2(const Spectrum& spec, int h, int w);

/// Real part of the inverse DFT.
std::vector<double> ifft2_real(const Spectrum& spec, int h, int w);

}  // namespace iatrack::kcf
