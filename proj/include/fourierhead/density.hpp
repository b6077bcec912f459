#pragma once

#include <complex>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fourierhead {

using Complex = std::complex<double>;

// Scale floor for the autocorrelation normalizer Re(c_0). Below this scale the
// coefficients are treated as vanishing and the density degrades continuously
// to the uniform one; this is what makes shrunken initial weights start out
// with p(z) ~= 1/2 and makes the all-zero input exactly uniform instead of a
// division by zero. Coefficients at unit scale are far above the floor, so
// their normalization is exact.
inline constexpr double kCoefficientScaleFloor = 0.05;

// Truncated Fourier series of a probability density on [-1, 1].
//
// Unnormalized state holds raw autocorrelation coefficients c_k. After
// normalize(), coeffs[0] = 1/2 (the constant term of any PDF on [-1,1]) and
// coeffs[k] = c_k / max(Re(c_0), floor) for k >= 1, so that
//   p(z) = 1/2 + Re( sum_{k=1}^{N} coeffs[k] * exp(i*k*pi*z) ).
// The autocorrelation construction keeps p nonnegative.
struct FourierDensity {
  std::vector<Complex> coeffs;  // N+1 entries
  bool normalized = false;

  std::size_t num_frequencies() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

// c_k = sum_{l=0}^{N-k} a_l * conj(a_{l+k}); c_0 comes out real and >= 0.
FourierDensity autocorrelate(std::span<const Complex> autocorr_input);

FourierDensity normalize(const FourierDensity& d);

// p(z) for z in [-1, 1]. Out-of-range z throws unless periodic extension is
// requested (the series itself has period 2).
double eval_density(const FourierDensity& d, double z, bool periodic = false);

// gamma * (2*pi^2 / m) * sum_{k=1}^{N} k^2 |c_k|^2, the total squared
// variation penalty. Works on whichever coefficients the density carries;
// training applies it to the raw autocorrelation output.
double regularization_term(const FourierDensity& d, std::size_t m, double gamma);

struct LogLikelihood {
  double value = 0.0;
  bool floored = false;  // density underflowed and the configured floor was used
};

LogLikelihood log_likelihood(const FourierDensity& d, double z, double density_floor = 1e-12);

nlohmann::json density_to_json(const FourierDensity& d);
FourierDensity density_from_json(const nlohmann::json& j);

}  // namespace fourierhead
