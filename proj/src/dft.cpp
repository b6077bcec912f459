#include "fourierhead/dft.hpp"

#include <cmath>

namespace fourierhead {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<Complex>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const Complex wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex u = data[i + k];
        const Complex v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

std::vector<Complex> dft_real(std::span<const double> signal) {
  const std::size_t n = signal.size();
  std::vector<Complex> out(n);
  if (n == 0) return out;
  if (is_power_of_two(n)) {
    for (std::size_t i = 0; i < n; ++i) out[i] = Complex(signal[i], 0.0);
    fft_radix2(out, false);
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    double re = 0.0;
    double im = 0.0;
    const double w = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = w * static_cast<double>(j);
      re += signal[j] * std::cos(a);
      im += signal[j] * std::sin(a);
    }
    out[k] = Complex(re, im);
  }
  return out;
}

std::vector<double> power_spectrum(std::span<const double> signal) {
  const std::vector<Complex> spec = dft_real(signal);
  std::vector<double> power(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) power[k] = std::norm(spec[k]);
  return power;
}

}  // namespace fourierhead
