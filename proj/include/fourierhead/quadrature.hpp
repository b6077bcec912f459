#pragma once

#include <cmath>
#include <functional>

namespace fourierhead {

// Tanh-sinh quadrature on (a, b). Nodes cluster double-exponentially toward
// the endpoints and are addressed by their distance to the NEAR endpoint, so
// integrable endpoint singularities (e.g. Beta densities with shape < 1)
// are resolved down to subnormal offsets. Mass closer to an endpoint than
// the smallest positive double is beyond any floating-point node placement;
// callers with a singular endpoint should put it at the interval start via a
// change of variables (offsets from `a` stay exact where `b - tiny` rounds).
inline double tanh_sinh_integrate(const std::function<double(double)>& f, double a, double b) {
  constexpr double kHalfPi = 1.570796326794896619231322;
  const double h = 1.0 / 128.0;
  const int levels = 768;  // |t| <= 6
  const double width = b - a;

  const auto add_node = [&](double offset_fraction, double weight, double& sum) {
    // One node per endpoint, measured from its near end.
    const double x_lo = a + width * offset_fraction;
    if (x_lo > a && x_lo < b) {
      const double flo = f(x_lo);
      if (std::isfinite(flo)) sum += weight * flo;
    }
    const double x_hi = b - width * offset_fraction;
    if (x_hi > a && x_hi < b && x_hi != x_lo) {
      const double fhi = f(x_hi);
      if (std::isfinite(fhi)) sum += weight * fhi;
    }
  };

  double sum = 0.0;
  add_node(0.5, h * kHalfPi / 2.0, sum);  // t = 0: cosh(0)/(2 cosh^2(0)) = 1/2
  for (int k = 1; k <= levels; ++k) {
    const double t = h * static_cast<double>(k);
    const double s = kHalfPi * std::sinh(t);
    const double cosh_s = std::cosh(s);
    const double weight = h * kHalfPi * std::cosh(t) / (2.0 * cosh_s * cosh_s);
    if (!(weight > 0.0)) break;  // reached double underflow in the tails
    // Distance from the near endpoint: 1/(1 + exp(2s)), subnormal-safe.
    const double offset = 1.0 / (1.0 + std::exp(2.0 * s));
    if (!(offset > 0.0)) break;
    add_node(offset, weight, sum);
  }
  return sum * width;
}

// Composite Simpson rule; node_count must be odd. Used as the plain-vanilla
// cross-check route for smooth integrands.
inline double simpson_integrate(const std::function<double(double)>& f, double a, double b,
                                std::size_t node_count) {
  if (node_count < 3 || node_count % 2 == 0) node_count += 1 + (node_count % 2 == 0 ? 0 : 2);
  const double h = (b - a) / static_cast<double>(node_count - 1);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i + 1 < node_count; ++i) {
    sum += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

}  // namespace fourierhead
