#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fourierhead/bins.hpp"
#include "fourierhead/density.hpp"
#include "fourierhead/random.hpp"

namespace fourierhead {

struct HeadConfig {
  std::size_t input_dim = 32;        // n
  std::size_t output_dim = 50;       // m, number of bins
  std::size_t num_frequencies = 12;  // N, must satisfy N < m/2
  double regularization_gamma = 0.0;
  double init_shrink = 1000.0;

  void validate() const;
  std::size_t raw_dim() const { return 2 * (num_frequencies + 1); }
};

// The learned linear map R^n -> R^{2(N+1)}; row-major weight, one row per
// output coordinate. Outputs interleave as (re_0, im_0, ..., re_N, im_N).
struct HeadWeights {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<double> weight;  // output_dim x input_dim
  std::vector<double> bias;    // output_dim
};

// Fan-in-scaled normal weights divided by init_shrink, so initial densities
// sit near uniform (their raw coefficient scale falls under the
// normalization floor).
HeadWeights init_head_weights(const HeadConfig& config, SplitMix64& rng);

std::vector<Complex> autocorr_input_from_raw(std::span<const double> raw);

std::vector<double> apply_linear(const HeadWeights& w, std::span<const double> x);

// Unnormalized density from an input vector: linear map, complexify,
// autocorrelate.
FourierDensity head_density(const HeadWeights& w, std::span<const double> x);

// Evaluate a normalized density at the bin centers and rescale to sum one.
std::vector<double> discretize_density(const FourierDensity& normalized, const BinLayout& bins);

// The full head forward pass: x -> autocorrelation coefficients -> Fourier
// PDF -> categorical distribution over the bins.
std::vector<double> head_forward(const HeadWeights& w, std::span<const double> x,
                                 const BinLayout& bins);

}  // namespace fourierhead
