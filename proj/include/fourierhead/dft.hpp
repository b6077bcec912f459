#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fourierhead {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);

// In-place radix-2 decimation-in-time FFT; size must be a power of two.
// inverse = true divides by n at the end.
void fft_radix2(std::vector<Complex>& data, bool inverse);

// Forward DFT of a real signal, X_k = sum_j x_j exp(-2*pi*i*j*k/n).
// Dispatches to the radix-2 kernel for power-of-two sizes and falls back to
// the direct O(n^2) sum otherwise; desk-scale signal lengths keep the direct
// path affordable.
std::vector<Complex> dft_real(std::span<const double> signal);

// |X_k|^2 for k = 0..n-1.
std::vector<double> power_spectrum(std::span<const double> signal);

}  // namespace fourierhead
