#include "fourierhead/head.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fourierhead {

void HeadConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("HeadConfig: dimensions must be >= 1");
  }
  if (2 * num_frequencies >= output_dim) {
    throw std::invalid_argument("HeadConfig: need num_frequencies < output_dim / 2");
  }
  if (regularization_gamma < 0.0) {
    throw std::invalid_argument("HeadConfig: gamma must be nonnegative");
  }
  if (!(init_shrink > 0.0)) {
    throw std::invalid_argument("HeadConfig: init_shrink must be positive");
  }
}

HeadWeights init_head_weights(const HeadConfig& config, SplitMix64& rng) {
  config.validate();
  HeadWeights w;
  w.input_dim = config.input_dim;
  w.output_dim = config.raw_dim();
  w.weight.resize(w.output_dim * w.input_dim);
  w.bias.resize(w.output_dim);
  // Fan-in-scaled uniform init divided by the shrink factor, so the raw
  // autocorrelation coefficients start far below the normalization floor.
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.input_dim));
  for (double& v : w.weight) v = rng.uniform(-bound, bound) / config.init_shrink;
  for (double& v : w.bias) v = rng.uniform(-bound, bound) / config.init_shrink;
  return w;
}

std::vector<Complex> autocorr_input_from_raw(std::span<const double> raw) {
  if (raw.size() % 2 != 0) throw std::invalid_argument("raw head output must have even length");
  std::vector<Complex> a(raw.size() / 2);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = Complex(raw[2 * k], raw[2 * k + 1]);
  return a;
}

std::vector<double> apply_linear(const HeadWeights& w, std::span<const double> x) {
  if (x.size() != w.input_dim) throw std::invalid_argument("apply_linear: dimension mismatch");
  std::vector<double> out(w.output_dim);
  for (std::size_t i = 0; i < w.output_dim; ++i) {
    double acc = w.bias[i];
    const double* row = &w.weight[i * w.input_dim];
    for (std::size_t j = 0; j < w.input_dim; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  return out;
}

FourierDensity head_density(const HeadWeights& w, std::span<const double> x) {
  const std::vector<double> raw = apply_linear(w, x);
  const std::vector<Complex> a = autocorr_input_from_raw(raw);
  return autocorrelate(a);
}

std::vector<double> discretize_density(const FourierDensity& normalized, const BinLayout& bins) {
  const std::size_t m = bins.size();
  std::vector<double> probs(m);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    // The construction keeps the density nonnegative up to rounding dust;
    // clamp so the categorical is nonnegative exactly.
    probs[k] = std::max(eval_density(normalized, bins.centers[k]), 0.0);
    total += probs[k];
  }
  if (!(total > 0.0)) throw std::runtime_error("discretize_density: density sums to zero on bins");
  for (double& p : probs) p /= total;
  return probs;
}

std::vector<double> head_forward(const HeadWeights& w, std::span<const double> x,
                                 const BinLayout& bins) {
  return discretize_density(normalize(head_density(w, x)), bins);
}

}  // namespace fourierhead
