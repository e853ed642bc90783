#pragma once

// Gamma and two-parameter Mittag-Leffler evaluation on the real line.
// The negative axis is the regime that matters for decay envelopes, so
// E_{alpha,beta} is routed through three schemes: the defining power series
// near the origin, the Gorenflo-Loutchko-Luchko integral representation in
// the mid range, and the algebraic asymptotic expansion far out.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mlstab/detail/tanh_sinh.hpp"

namespace mlstab {

/// Query bundle for the two-parameter Mittag-Leffler function E_{alpha,beta}(x).
struct MLQuery {
  double alpha;
  double beta;
  double x;
};

namespace detail {

inline constexpr long double kPi =
    3.14159265358979323846264338327950288L;

// sin(pi*x) with argument reduction done on x itself, so the result keeps
// full precision for the moderate |x| used by reflection and by the
// reciprocal of Gamma at negative arguments.
inline long double sin_pi(long double x) {
  const long double reduced = std::remainder(x, 2.0L);  // in [-1, 1]
  return std::sin(kPi * reduced);
}

// Lanczos approximation with g = 607/128 and the 15-term coefficient set
// (Godfrey's fit; also used by Boost.Math). Relative error of the rational
// part is below 1e-15; evaluating in long double keeps the final double
// result inside 1e-13 even at x = 170 where the exponential factors are
// enormous.
inline long double lanczos_sum(long double zz) {
  static constexpr long double kCoeff[15] = {
      0.99999999999999709182L,
      57.156235665862923517L,
      -59.597960355475491248L,
      14.136097974741747174L,
      -0.49191381609762019978L,
      0.33994649984811888699e-4L,
      0.46523628927048575665e-4L,
      -0.98374475304879564677e-4L,
      0.15808870322491248884e-3L,
      -0.21026444172410488319e-3L,
      0.21743961811521264320e-3L,
      -0.16431810653676389022e-3L,
      0.84418223983852743293e-4L,
      -0.26190838401581408670e-4L,
      0.36899182659531622704e-5L,
  };
  long double sum = kCoeff[0];
  for (int k = 1; k < 15; ++k) {
    sum += kCoeff[k] / (zz + k);
  }
  return sum;
}

// Gamma(x) for x >= 0.5 in long double.
inline long double gamma_positive(long double x) {
  constexpr long double kG = 4.7421875L;  // 607/128
  const long double zz = x - 1.0L;
  const long double base = zz + kG + 0.5L;
  const long double sum = lanczos_sum(zz);
  return std::sqrt(2.0L * kPi) * std::pow(base, zz + 0.5L) *
         std::exp(-base) * sum;
}

inline long double gamma_impl(long double x) {
  if (x >= 0.5L) return gamma_positive(x);
  // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
  return kPi / (sin_pi(x) * gamma_positive(1.0L - x));
}

// 1/Gamma(x) as an entire function: returns 0 at the poles of Gamma.
inline long double reciprocal_gamma_impl(long double x) {
  if (x >= 0.5L) return 1.0L / gamma_positive(x);
  if (x == std::floor(x)) return 0.0L;  // non-positive integer
  return sin_pi(x) * gamma_positive(1.0L - x) / kPi;
}

}  // namespace detail

/// Gamma function. Relative error below 1e-12 on [0.1, 170]; negative
/// non-integer arguments are served through the reflection formula.
/// Throws std::domain_error at the poles (non-positive integers) and
/// std::overflow_error for x > 171 where the result leaves double range.
[[nodiscard]] inline double gamma(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("gamma: argument must be finite");
  }
  if (x > 171.0) {
    throw std::overflow_error("gamma: overflow for x > 171");
  }
  if (x <= 0.0 && x == std::floor(x)) {
    throw std::domain_error("gamma: pole at non-positive integer " +
                            std::to_string(x));
  }
  return static_cast<double>(detail::gamma_impl(static_cast<long double>(x)));
}

/// 1/Gamma(x), entire in x: evaluates to 0 at non-positive integers instead
/// of raising. Used by the asymptotic Mittag-Leffler expansion, whose terms
/// simply drop out at the poles of Gamma.
[[nodiscard]] inline double reciprocal_gamma(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("reciprocal_gamma: argument must be finite");
  }
  return static_cast<double>(
      detail::reciprocal_gamma_impl(static_cast<long double>(x)));
}

namespace detail {

// Power series sum_k x^k / Gamma(alpha k + beta) for x > 0. All terms are
// positive, so there is no cancellation and the series is usable for any
// positive argument; terms are formed in log space to avoid overflow of
// intermediate powers.
inline double ml_series_positive(double alpha, double beta, double x) {
  const long double la = alpha;
  const long double lb = beta;
  const long double lx = std::log(static_cast<long double>(x));
  long double sum = 0.0L;
  long double comp = 0.0L;
  int small_streak = 0;
  for (int k = 0; k <= 4000; ++k) {
    const long double term = std::exp(k * lx - std::lgamma(la * k + lb));
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (k > 2 && term <= 1e-18L * sum) {
      if (++small_streak >= 3) break;
    } else {
      small_streak = 0;
    }
  }
  return static_cast<double>(sum);
}

// Alternating power series for x < 0, Kahan-compensated in long double.
// Only called when |x| <= min(5, 16^alpha): that bound keeps the largest
// term below ~e^16, so the cancellation never eats more than seven of the
// long double's nineteen digits.
inline double ml_series_negative(double alpha, double beta, double x) {
  const long double la = alpha;
  const long double lb = beta;
  const long double lax = std::log(static_cast<long double>(-x));
  long double sum = 0.0L;
  long double comp = 0.0L;
  long double scale = 0.0L;  // largest |term|, for the stopping test
  int small_streak = 0;
  for (int k = 0; k <= 500; ++k) {
    long double term = std::exp(k * lax - std::lgamma(la * k + lb));
    if (k & 1) term = -term;
    scale = std::max(scale, std::abs(term));
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (k > 2 && std::abs(term) <= 1e-18L * scale) {
      if (++small_streak >= 3) break;
    } else {
      small_streak = 0;
    }
  }
  return static_cast<double>(sum);
}

// Algebraic asymptotic expansion for large negative arguments:
//   E_{alpha,beta}(x) ~ -sum_{k>=1} x^{-k} / Gamma(beta - alpha k).
// Truncated at the smallest term (the expansion is divergent); at
// |x| >= 50 the optimal error is orders of magnitude below the 1e-6
// contract for this regime.
inline double ml_asymptotic(double alpha, double beta, double x) {
  const double inv = 1.0 / x;
  long double sum = 0.0L;
  double power = 1.0;
  long double last_magnitude = std::numeric_limits<long double>::max();
  for (int k = 1; k <= 20; ++k) {
    power *= inv;
    const long double rg =
        reciprocal_gamma_impl(static_cast<long double>(beta - alpha * k));
    const long double term = -static_cast<long double>(power) * rg;
    const long double magnitude = std::abs(term);
    if (magnitude == 0.0L) continue;  // Gamma pole: the term drops out
    if (k > 2 && magnitude >= last_magnitude) break;
    sum += term;
    last_magnitude = magnitude;
  }
  return static_cast<double>(sum);
}

// Gorenflo-Loutchko-Luchko real integral representation, valid for x < 0,
// 0 < alpha < 1 and beta < 1 + alpha:
//   E_{alpha,beta}(x) = 1/(alpha pi) * Integral_0^inf K(r) dr,
//   K(r) = r^{(1-beta)/alpha} e^{-r^{1/alpha}}
//          * [r sin(pi(1-beta)) - x sin(pi(1-beta+alpha))]
//          / (r^2 - 2 r x cos(alpha pi) + x^2).
// For alpha > 1/2 the rational factor has a Lorentzian resonance centred at
// r0 = |x||cos(pi alpha)| of half-width |x| sin(pi alpha); the integration
// is split into panels around it so tanh-sinh sees smooth integrands.
inline double ml_gll_integral(double alpha, double beta, double x) {
  const double pi = static_cast<double>(kPi);
  const double s1 = std::sin(pi * (1.0 - beta));
  const double s2 = std::sin(pi * (1.0 - beta + alpha));
  const double c = std::cos(pi * alpha);
  const double xx = x * x;
  const double power = (1.0 - beta) / alpha;
  const double inv_alpha = 1.0 / alpha;

  auto integrand = [&](double r) {
    const double kernel = std::pow(r, power) * std::exp(-std::pow(r, inv_alpha));
    const double numer = r * s1 - x * s2;
    const double denom = r * r - 2.0 * r * x * c + xx;
    return kernel * numer / denom;
  };

  const double az = -x;
  const double peak = (alpha > 0.5) ? az * std::abs(c) : 0.0;
  const double width = az * std::sin(pi * alpha);
  const double tail_end = std::pow(46.0, alpha);  // e^{-r^{1/alpha}} < 1e-20 beyond
  const double upper = std::max({tail_end, peak + 6.0 * width, 1.0});

  double knots[5] = {0.0, upper, upper, upper, upper};
  int n_knots = 2;
  if (alpha > 0.5) {
    double inner[3] = {peak - 4.0 * width, peak, peak + 4.0 * width};
    n_knots = 1;
    for (double k : inner) {
      if (k > 1e-12 * az && k < upper * (1.0 - 1e-12)) knots[n_knots++] = k;
    }
    knots[n_knots++] = upper;
  }

  long double total = 0.0L;
  for (int i = 0; i + 1 < n_knots; ++i) {
    total += tanh_sinh(integrand, knots[i], knots[i + 1]);
  }
  return static_cast<double>(total / (alpha * kPi));
}

// E_{1,b}(x) for b > 1 through the finite integral
//   E_{1,b}(x) = 1/Gamma(b-1) * Integral_0^1 e^{x s} (1-s)^{b-2} ds,
// which follows from the Beta-function term rewrite of the series. The
// (1-s)^{b-2} endpoint singularity for b < 2 is integrable and tanh-sinh
// resolves it to full precision.
inline double ml_order_one(double beta, double x) {
  if (beta == 1.0) return std::exp(x);
  if (beta < 1.0) {
    // E_{1,b}(x) = x E_{1,b+1}(x) + 1/Gamma(b)
    return x * ml_order_one(beta + 1.0, x) +
           static_cast<double>(reciprocal_gamma_impl(beta));
  }
  auto integrand = [&](double s) {
    return std::exp(x * s) * std::pow(1.0 - s, beta - 2.0);
  };
  const double integral = tanh_sinh(integrand, 0.0, 1.0);
  return integral * static_cast<double>(
                        reciprocal_gamma_impl(static_cast<long double>(beta) - 1.0L));
}

inline double ml_dispatch(double alpha, double beta, double x);

// Peels the second parameter down with
//   E_{a,B}(x) = (E_{a,B-a}(x) - 1/Gamma(B-a)) / x
// until the integral representation's constraint B < 1 + a holds.
inline double ml_reduce_beta(double alpha, double beta, double x) {
  int steps = 0;
  double b = beta;
  while (b >= 1.0 + alpha) {
    b -= alpha;
    ++steps;
  }
  double value = ml_dispatch(alpha, b, x);
  for (int k = 0; k < steps; ++k) {
    value = (value - static_cast<double>(
                         reciprocal_gamma_impl(static_cast<long double>(b)))) /
            x;
    b += alpha;
  }
  return value;
}

inline double ml_dispatch(double alpha, double beta, double x) {
  if (x == 0.0) {
    return static_cast<double>(
        reciprocal_gamma_impl(static_cast<long double>(beta)));
  }
  if (alpha == 1.0 && beta == 1.0) return std::exp(x);
  if (x > 0.0) return ml_series_positive(alpha, beta, x);

  // The series radius shrinks with alpha: the largest term of the
  // alternating sum grows like e^{|x|^{1/alpha}}, so |x| <= 16^alpha caps
  // the cancellation at ~7 long-double digits.
  const double radius = std::min(5.0, std::pow(16.0, alpha));
  if (-x <= radius) return ml_series_negative(alpha, beta, x);
  if (x < -50.0) return ml_asymptotic(alpha, beta, x);
  if (alpha == 1.0) return ml_order_one(beta, x);
  if (beta < 1.0 + alpha) return ml_gll_integral(alpha, beta, x);
  return ml_reduce_beta(alpha, beta, x);
}

}  // namespace detail

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(x) for real x and
/// orders alpha in (0, 1], beta > 0. Relative error is below 1e-9 for
/// x in [-50, 5] and below 1e-6 for x < -50 (asymptotic regime).
[[nodiscard]] inline double mittag_leffler(double alpha, double beta,
                                           double x) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error("mittag_leffler: alpha must be positive");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("mittag_leffler: beta must be positive");
  }
  if (!std::isfinite(x)) {
    throw std::domain_error("mittag_leffler: x must be finite");
  }
  if (alpha > 1.0) {
    throw std::domain_error(
        "mittag_leffler: orders alpha > 1 are not supported");
  }
  return detail::ml_dispatch(alpha, beta, x);
}

[[nodiscard]] inline double mittag_leffler(const MLQuery& q) {
  return mittag_leffler(q.alpha, q.beta, q.x);
}

/// One-parameter Mittag-Leffler function E_alpha(x) = E_{alpha,1}(x).
[[nodiscard]] inline double mittag_leffler_one(double alpha, double x) {
  return mittag_leffler(alpha, 1.0, x);
}

/// Caputo derivative of order alpha of the decay envelope t -> E_beta(-c t^beta):
///   D^alpha E_beta(-c t^beta) = -c t^{beta-alpha} E_{beta,1+beta-alpha}(-c t^beta).
/// Requires 0 < beta <= alpha <= 1, c > 0, t > 0; the result is never positive.
[[nodiscard]] inline double caputo_derivative_of_envelope(double beta,
                                                          double alpha,
                                                          double c, double t) {
  if (!(beta > 0.0) || !(alpha <= 1.0) || beta > alpha) {
    throw std::domain_error(
        "caputo_derivative_of_envelope: need 0 < beta <= alpha <= 1");
  }
  if (!(c > 0.0)) {
    throw std::domain_error("caputo_derivative_of_envelope: need c > 0");
  }
  if (!(t > 0.0)) {
    throw std::domain_error("caputo_derivative_of_envelope: need t > 0");
  }
  const double arg = -c * std::pow(t, beta);
  return -c * std::pow(t, beta - alpha) *
         mittag_leffler(beta, 1.0 + beta - alpha, arg);
}

}  // namespace mlstab
