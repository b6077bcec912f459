#include "fourierhead/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "fourierhead/dft.hpp"

namespace fourierhead {

namespace {

constexpr double kPi = 3.141592653589793238462643;

double gaussian_pdf(double x, double sigma) {
  return std::exp(-x * x / (2.0 * sigma * sigma)) / (std::sqrt(2.0 * kPi) * sigma);
}

// The 2m-1 linear kernel folded onto m circular positions: offsets k and k-m
// address the same source index mod m.
std::vector<double> folded_kernel(std::size_t m, double sigma) {
  std::vector<double> raw(m);
  double total = gaussian_pdf(0.0, sigma);
  raw[0] = gaussian_pdf(0.0, sigma);
  for (std::size_t r = 1; r < m; ++r) {
    const double g_r = gaussian_pdf(static_cast<double>(r), sigma);
    const double g_wrap = gaussian_pdf(static_cast<double>(m - r), sigma);
    raw[r] = g_r + g_wrap;
    total += 2.0 * g_r;  // linear kernel holds G(r) at both +r and -r
  }
  for (double& w : raw) w /= total;
  return raw;
}

// Rows of 1 - DFT(folded kernel) for sigma = 1..sigma_max; the kernel is
// symmetric so its DFT is real.
struct KernelSpectrumTable {
  std::size_t m = 0;
  std::vector<std::vector<double>> one_minus_spectrum;  // [sigma-1][k]
};

std::shared_ptr<const KernelSpectrumTable> kernel_spectrum_table(std::size_t m,
                                                                 std::size_t sigma_max) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<KernelSpectrumTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& entry = cache[m];
  if (!entry) {
    entry = std::make_shared<KernelSpectrumTable>();
    entry->m = m;
  }
  while (entry->one_minus_spectrum.size() < sigma_max) {
    const double sigma = static_cast<double>(entry->one_minus_spectrum.size() + 1);
    const std::vector<double> kernel = folded_kernel(m, sigma);
    const std::vector<Complex> spectrum = dft_real(kernel);
    std::vector<double> row(m);
    for (std::size_t k = 0; k < m; ++k) row[k] = 1.0 - spectrum[k].real();
    entry->one_minus_spectrum.push_back(std::move(row));
  }
  return entry;
}

}  // namespace

DiscreteGaussianKernel gaussian_kernel(std::size_t m, double sigma) {
  if (m < 2) throw std::invalid_argument("gaussian_kernel: m must be >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  DiscreteGaussianKernel kernel;
  kernel.sigma = sigma;
  kernel.radius = m - 1;
  kernel.weights.resize(2 * m - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < kernel.weights.size(); ++i) {
    const double offset = static_cast<double>(i) - static_cast<double>(kernel.radius);
    kernel.weights[i] = gaussian_pdf(offset, sigma);
    total += kernel.weights[i];
  }
  for (double& w : kernel.weights) w /= total;
  return kernel;
}

std::vector<double> circular_convolve(std::span<const double> y,
                                      const DiscreteGaussianKernel& kernel) {
  const std::size_t m = y.size();
  if (kernel.radius + 1 != m) {
    throw std::invalid_argument("circular_convolve: kernel radius must equal m - 1");
  }
  std::vector<double> out(m, 0.0);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.radius);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      const std::ptrdiff_t idx =
          ((static_cast<std::ptrdiff_t>(j) - k) % static_cast<std::ptrdiff_t>(m) +
           static_cast<std::ptrdiff_t>(m)) %
          static_cast<std::ptrdiff_t>(m);
      acc += kernel.weights[static_cast<std::size_t>(k + radius)] *
             y[static_cast<std::size_t>(idx)];
    }
    out[j] = acc;
  }
  return out;
}

std::string to_string(Discrepancy d) { return d == Discrepancy::kL2 ? "L2" : "L1"; }

Discrepancy discrepancy_from_string(const std::string& s) {
  if (s == "L2" || s == "l2") return Discrepancy::kL2;
  if (s == "L1" || s == "l1") return Discrepancy::kL1;
  throw std::invalid_argument("unknown discrepancy: " + s);
}

SmoothnessResult smoothness(std::span<const double> y, const SmoothnessConfig& config) {
  const std::size_t m = y.size();
  if (m < 2) throw std::invalid_argument("smoothness: signal too short");
  if (config.sigma_max < 1) throw std::invalid_argument("smoothness: sigma_max must be >= 1");

  const auto table = kernel_spectrum_table(m, config.sigma_max);
  SmoothnessResult result;
  result.sigma_max = config.sigma_max;
  result.discrepancy = config.discrepancy;
  result.truncation_bound =
      std::sqrt(2.0) * (6.0 / (kPi * kPi)) / static_cast<double>(config.sigma_max);

  std::vector<Complex> spectrum = dft_real(y);

  double total = 0.0;
  if (config.discrepancy == Discrepancy::kL2) {
    std::vector<double> power(m);
    for (std::size_t k = 0; k < m; ++k) power[k] = std::norm(spectrum[k]);
    for (std::size_t sigma = 1; sigma <= config.sigma_max; ++sigma) {
      const std::vector<double>& row = table->one_minus_spectrum[sigma - 1];
      double sum = 0.0;
      for (std::size_t k = 0; k < m; ++k) sum += power[k] * row[k] * row[k];
      const double dist = std::sqrt(sum / static_cast<double>(m));
      total += 6.0 / (kPi * kPi * static_cast<double>(sigma) * static_cast<double>(sigma)) * dist;
    }
  } else {
    const bool pow2 = is_power_of_two(m);
    std::vector<Complex> work(m);
    for (std::size_t sigma = 1; sigma <= config.sigma_max; ++sigma) {
      double dist = 0.0;
      if (pow2) {
        const std::vector<double>& row = table->one_minus_spectrum[sigma - 1];
        for (std::size_t k = 0; k < m; ++k) work[k] = spectrum[k] * row[k];
        fft_radix2(work, true);
        for (std::size_t j = 0; j < m; ++j) dist += std::abs(work[j].real());
      } else {
        DiscreteGaussianKernel kernel = gaussian_kernel(m, static_cast<double>(sigma));
        const std::vector<double> smoothed = circular_convolve(y, kernel);
        for (std::size_t j = 0; j < m; ++j) dist += std::abs(y[j] - smoothed[j]);
      }
      total += 6.0 / (kPi * kPi * static_cast<double>(sigma) * static_cast<double>(sigma)) * dist;
    }
  }
  result.value = total;
  return result;
}

double spectral_entropy(std::span<const double> signal) {
  if (signal.size() < 2) throw std::invalid_argument("spectral_entropy: signal too short");
  const std::vector<Complex> spectrum = dft_real(signal);
  const std::size_t half = signal.size() / 2;
  double total = 0.0;
  std::vector<double> power(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    power[k] = std::norm(spectrum[k]);
    total += power[k];
  }
  if (!(total > 0.0)) throw std::invalid_argument("spectral_entropy: zero signal");
  double entropy = 0.0;
  for (std::size_t k = 0; k <= half; ++k) {
    const double p = power[k] / total;
    if (p > 0.0) entropy -= p * std::log2(p);
  }
  return entropy;
}

std::vector<double> truncated_square_wave(std::size_t num_harmonics, std::size_t num_samples) {
  if (num_harmonics < 1) throw std::invalid_argument("truncated_square_wave: need >= 1 harmonic");
  if (num_samples < 16) throw std::invalid_argument("truncated_square_wave: need >= 16 samples");
  std::vector<double> wave(num_samples, 0.0);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const double x = 2.0 * static_cast<double>(i) / static_cast<double>(num_samples);
    double f = 0.0;
    for (std::size_t h = 0; h < num_harmonics; ++h) {
      const double n = static_cast<double>(2 * h + 1);
      f += std::sin(n * kPi * x) / n;
    }
    wave[i] = std::max(4.0 / kPi * f, 0.0);
  }
  double total = 0.0;
  for (double v : wave) total += v;
  for (double& v : wave) v /= total;
  return wave;
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kBrown: return "brown";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kBlue: return "blue";
  }
  return "?";
}

std::vector<double> colored_noise(NoiseKind kind, std::size_t length, SplitMix64& rng) {
  if (!is_power_of_two(length) || length < 4) {
    throw std::invalid_argument("colored_noise: length must be a power of two >= 4");
  }
  std::vector<double> wave(length);
  for (double& v : wave) v = rng.normal();

  if (kind != NoiseKind::kWhite) {
    // Amplitude exponents giving power 1/F^2, 1/F and F.
    double exponent = 0.0;
    switch (kind) {
      case NoiseKind::kBrown: exponent = -1.0; break;
      case NoiseKind::kPink: exponent = -0.5; break;
      case NoiseKind::kBlue: exponent = 0.5; break;
      default: break;
    }
    std::vector<Complex> spectrum(length);
    for (std::size_t i = 0; i < length; ++i) spectrum[i] = Complex(wave[i], 0.0);
    fft_radix2(spectrum, false);
    spectrum[0] = (kind == NoiseKind::kBlue) ? spectrum[0] : Complex(0.0, 0.0);
    for (std::size_t k = 1; k < length; ++k) {
      const double freq = static_cast<double>(std::min(k, length - k));
      spectrum[k] *= std::pow(freq, exponent);
    }
    fft_radix2(spectrum, true);
    for (std::size_t i = 0; i < length; ++i) wave[i] = spectrum[i].real();
  }

  const auto [mn_it, mx_it] = std::minmax_element(wave.begin(), wave.end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  if (!(mx > mn)) return std::vector<double>(length, 1.0 / static_cast<double>(length));
  double total = 0.0;
  for (double& v : wave) {
    v = (v - mn) / (mx - mn);
    total += v;
  }
  for (double& v : wave) v /= total;
  return wave;
}

}  // namespace fourierhead
