#pragma once

#include <complex>
#include <vector>

#include "qoct/matrix.hpp"

namespace qoct {

// Thin FFTW wrappers. Plans are created with FFTW_ESTIMATE (deterministic
// plan choice) and cached per size behind a mutex; execution is thread-safe.

// Forward complex DFT, unnormalised (FFTW sign -1).
std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& in);

// Forward DFT of a real signal, full complex output of the same length.
std::vector<std::complex<double>> fft_forward_real(const std::vector<double>& in, std::size_t pad_to = 0);

// Forward 2D complex DFT of a real matrix, unnormalised, row-major output
// with optional zero padding along columns (the u axis).
std::vector<std::complex<double>> fft2_forward_real(const Matrix& in, int pad_cols = 0);

std::size_t next_pow2(std::size_t n);

} // namespace qoct
