// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_FFT_HPP
#define SPECLAB_FFT_HPP

#include <complex>
#include <cstddef>

namespace speclab::fft {

/// In-place complex-to-complex 3D DFT on an n x n x n array (z fastest).
/// sign = -1 is the forward exponent convention, +1 the inverse.
/// No normalization is applied here; callers own the scaling.
void transform3d(std::complex<double>* data, int n, int sign);

/// Drops all cached FFTW plans (mainly for leak-checking in tests).
void clear_plans();

} // namespace speclab::fft

#endif
