#include "fourierhead/density.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fourierhead {

namespace {
constexpr double kPi = 3.141592653589793238462643;
}

FourierDensity autocorrelate(std::span<const Complex> autocorr_input) {
  if (autocorr_input.empty()) throw std::invalid_argument("autocorrelate: empty input");
  const std::size_t n = autocorr_input.size();
  FourierDensity d;
  d.coeffs.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex c(0.0, 0.0);
    for (std::size_t l = 0; l + k < n; ++l) {
      c += autocorr_input[l] * std::conj(autocorr_input[l + k]);
    }
    d.coeffs[k] = c;
  }
  // c_0 is a sum of squared magnitudes; drop the residual imaginary dust.
  d.coeffs[0] = Complex(d.coeffs[0].real(), 0.0);
  d.normalized = false;
  return d;
}

FourierDensity normalize(const FourierDensity& d) {
  if (d.coeffs.empty()) throw std::invalid_argument("normalize: empty density");
  if (d.normalized) return d;
  const double scale = std::max(d.coeffs[0].real(), kCoefficientScaleFloor);
  FourierDensity out;
  out.coeffs.resize(d.coeffs.size());
  out.coeffs[0] = Complex(0.5, 0.0);
  for (std::size_t k = 1; k < d.coeffs.size(); ++k) out.coeffs[k] = d.coeffs[k] / scale;
  out.normalized = true;
  return out;
}

double eval_density(const FourierDensity& d, double z, bool periodic) {
  if (!d.normalized) throw std::logic_error("eval_density: density not normalized");
  if (!periodic && (z < -1.0 || z > 1.0)) {
    throw std::domain_error("eval_density: z outside [-1,1]");
  }
  double p = 0.5;
  for (std::size_t k = 1; k < d.coeffs.size(); ++k) {
    const double a = static_cast<double>(k) * kPi * z;
    p += d.coeffs[k].real() * std::cos(a) - d.coeffs[k].imag() * std::sin(a);
  }
  return p;
}

double regularization_term(const FourierDensity& d, std::size_t m, double gamma) {
  if (m == 0) throw std::invalid_argument("regularization_term: m must be positive");
  double sum = 0.0;
  for (std::size_t k = 1; k < d.coeffs.size(); ++k) {
    sum += static_cast<double>(k) * static_cast<double>(k) * std::norm(d.coeffs[k]);
  }
  return gamma * (2.0 * kPi * kPi / static_cast<double>(m)) * sum;
}

LogLikelihood log_likelihood(const FourierDensity& d, double z, double density_floor) {
  const double p = eval_density(d, z);
  if (p < density_floor) return {std::log(density_floor), true};
  return {std::log(p), false};
}

nlohmann::json density_to_json(const FourierDensity& d) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const Complex& c : d.coeffs) coeffs.push_back({c.real(), c.imag()});
  return nlohmann::json{{"N", d.num_frequencies()}, {"coeffs", coeffs}, {"normalized", d.normalized}};
}

FourierDensity density_from_json(const nlohmann::json& j) {
  FourierDensity d;
  for (const auto& pair : j.at("coeffs")) {
    if (!pair.is_array() || pair.size() != 2) {
      throw std::invalid_argument("density_from_json: coeffs entries must be [re, im]");
    }
    d.coeffs.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  if (d.coeffs.empty()) throw std::invalid_argument("density_from_json: empty coeffs");
  d.normalized = j.at("normalized").get<bool>();
  const auto n = j.at("N").get<std::size_t>();
  if (n + 1 != d.coeffs.size()) throw std::invalid_argument("density_from_json: N mismatch");
  return d;
}

}  // namespace fourierhead
