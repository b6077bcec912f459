#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fourierhead/random.hpp"

namespace fourierhead {

// Gaussian filter of standard deviation sigma sampled at integer offsets
// 1-m .. m-1 and scaled so the 2m-1 weights sum to one.
struct DiscreteGaussianKernel {
  double sigma = 1.0;
  std::size_t radius = 0;        // m - 1
  std::vector<double> weights;   // 2m - 1 entries, symmetric about the center

  std::size_t signal_length() const { return radius + 1; }
};

DiscreteGaussianKernel gaussian_kernel(std::size_t m, double sigma);

// (g * y)_j = sum_k w(k) y_{(j-k) mod m}; periodic indexing keeps the
// convolution mass-preserving and shift-equivariant.
std::vector<double> circular_convolve(std::span<const double> y,
                                      const DiscreteGaussianKernel& kernel);

enum class Discrepancy { kL2, kL1 };

std::string to_string(Discrepancy d);
Discrepancy discrepancy_from_string(const std::string& s);

struct SmoothnessConfig {
  std::size_t sigma_max = 1000;  // truncation of the infinite sigma sum
  Discrepancy discrepancy = Discrepancy::kL2;
};

struct SmoothnessResult {
  double value = 0.0;
  std::size_t sigma_max = 0;
  double truncation_bound = 0.0;  // tail bound sqrt(2) * (6/pi^2) / sigma_max
  Discrepancy discrepancy = Discrepancy::kL2;
};

// s(y) = sum_{sigma=1}^{sigma_max} (6 / (pi^2 sigma^2)) * ||y - g_sigma * y||.
// The L2 discrepancy is evaluated through the DFT (circular convolutions
// diagonalize there); L1 falls back to explicit convolutions. Kernel spectra
// are cached per signal length behind a lock.
SmoothnessResult smoothness(std::span<const double> y, const SmoothnessConfig& config = {});

// Shannon entropy (bits) of the one-sided relative power spectrum,
// frequencies 0..floor(n/2). Mean-zero signals contribute nothing at DC.
double spectral_entropy(std::span<const double> signal);

// Partial sum of the odd-harmonic square-wave series over one period,
// clipped at zero and normalized to total mass one.
std::vector<double> truncated_square_wave(std::size_t num_harmonics, std::size_t num_samples);

enum class NoiseKind { kBrown, kPink, kWhite, kBlue };

std::string to_string(NoiseKind k);

// White Gaussian noise, optionally shaped in the frequency domain (power
// 1/F^2, 1/F, flat, or F), then rescaled to [0,1] and normalized to sum one.
// Length must be a power of two.
std::vector<double> colored_noise(NoiseKind kind, std::size_t length, SplitMix64& rng);

}  // namespace fourierhead
