#pragma once

// Double-exponential (tanh-sinh) quadrature on a finite interval.
// Handles integrable endpoint singularities, which the Mittag-Leffler
// integral representation produces at r = 0 for second parameters > 1.

#include <cmath>
#include <utility>

namespace mlstab::detail {

// Integrates f over (a, b). The substitution x = a + (b-a)*sigma(u) with
// sigma(u) = 1/(1 + exp(-pi*sinh u)) clusters nodes doubly exponentially at
// both endpoints. sigma and 1-sigma are computed from exp(-pi*|sinh u|)
// directly so that neither quantity overflows or loses precision near the
// endpoints.
template <class F>
double tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-13,
                 int max_level = 10) {
  const double length = b - a;
  if (!(length > 0.0)) return 0.0;
  const double u_max = 6.0;

  auto node_contribution = [&](double u) -> long double {
    const double s = std::sinh(u);
    const double q = std::exp(-3.14159265358979323846 * std::abs(s));
    if (q == 0.0) return 0.0L;
    const double denom = 1.0 + q;
    const double near = q / denom;        // distance to the nearer endpoint
    const double far = 1.0 / denom;
    const double sigma = (s >= 0.0) ? far : near;
    const double x = a + length * sigma;
    if (!(x > a) || !(x < b)) return 0.0L;
    const double weight =
        length * 3.14159265358979323846 * std::cosh(u) * near * far;
    const double value = f(x);
    if (!std::isfinite(value)) return 0.0L;
    return static_cast<long double>(value) * weight;
  };

  double h = 1.0;
  long double sum = node_contribution(0.0);
  for (int k = 1; k * h <= u_max; ++k) {
    sum += node_contribution(k * h) + node_contribution(-k * h);
  }
  long double integral = sum * h;

  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    long double extra = 0.0L;
    for (int k = 1; k * h <= u_max; k += 2) {
      extra += node_contribution(k * h) + node_contribution(-k * h);
    }
    const long double refined = integral * 0.5L + extra * h;
    const long double change = refined - integral;
    integral = refined;
    if (level >= 3 &&
        std::abs(static_cast<double>(change)) <=
            rel_tol * std::abs(static_cast<double>(integral))) {
      break;
    }
  }
  return static_cast<double>(integral);
}

}  // namespace mlstab::detail
