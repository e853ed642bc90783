#pragma once

// Explicit Mittag-Leffler decay certificates: given a feasible positive
// vector v, find a rate c > 0 such that nu * v_i * E_beta(-c t^beta)
// dominates the solution componentwise, where beta couples the smallest
// order with the homogeneity degree p.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <mlstab/assumption_checker.hpp>
#include <mlstab/special_functions.hpp>
#include <mlstab/system_model.hpp>

namespace mlstab {

enum class Scope { global, local };

[[nodiscard]] inline const char* to_string(Scope s) {
  return s == Scope::global ? "global" : "local";
}

/// Thrown when a certificate's validity region excludes the requested data,
/// e.g. a local certificate combined with an initial norm of 1 or more.
class ScopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when no positive rate satisfies the certificate inequality.
class CertificateInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Certificate {
  std::vector<double> v;
  double beta = 0.0;
  double c = 0.0;
  double nu = 0.0;
  Scope scope = Scope::local;
  std::vector<double> sup_i;
};

[[nodiscard]] inline double compute_beta(const SystemSpec& system) {
  return system.orders().min_order() / system.degree_p();
}

/// Upper bound for the memory ratio
///   I_i(t) = t^(beta-alpha_i) E_(beta, beta+1-alpha_i)(-c t^beta)
///            / E_beta(-c t^beta)
/// over t >= 1. Exactly 1 when beta equals alpha_i; otherwise the maximum
/// over a logarithmic grid up to t = 1e8 together with the t -> infinity
/// limit Gamma(1-beta)/Gamma(1-alpha_i), inflated by 1% to cover the gaps
/// between grid points.
[[nodiscard]] inline double sup_I(double beta, double alpha_i, double c) {
  if (!(beta > 0.0) || beta > 1.0 || !(alpha_i > 0.0) || alpha_i > 1.0) {
    throw std::domain_error("sup_I: beta and alpha_i must lie in (0, 1]");
  }
  if (!(c > 0.0)) throw std::invalid_argument("sup_I: c must be > 0");
  if (std::abs(beta - alpha_i) < 1e-14) return 1.0;
  constexpr int kGrid = 400;
  double best = 0.0;
  for (int k = 0; k < kGrid; ++k) {
    const double t = std::pow(10.0, 8.0 * k / (kGrid - 1));
    const double y = -c * std::pow(t, beta);
    const double ratio = std::pow(t, beta - alpha_i) *
                         mittag_leffler(beta, beta + 1.0 - alpha_i, y) /
                         mittag_leffler(beta, 1.0, y);
    best = std::max(best, ratio);
  }
  const double tail = gamma(1.0 - beta) * reciprocal_gamma(1.0 - alpha_i);
  return std::max(best, tail) * 1.01;
}

/// Componentwise left-hand side of the certificate inequality at rate c.
/// The certificate exists at c precisely when every entry is <= 0.
[[nodiscard]] inline std::vector<double> certificate_lhs(
    const SystemSpec& system, const CertificateVector& cv, double phi_norm,
    double c) {
  if (!(c > 0.0)) throw std::invalid_argument("certificate_lhs: c must be > 0");
  const int d = system.dim();
  const double p = system.degree_p();
  const double beta = compute_beta(system);
  const double rbar = system.r();
  const double e_delay =
      mittag_leffler(beta, 1.0, -c * std::pow(rbar, beta));
  const double e_one = mittag_leffler(beta, 1.0, -c);
  const double nu = phi_norm / e_one;
  const double nu_factor = std::pow(nu, 1.0 - p);

  const auto& alphas = system.orders().values();
  const auto fv = system.f()(cv.v);
  std::vector<double> lhs(d);
  for (int i = 0; i < d; ++i) lhs[i] = fv[i] / cv.v[i];
  for (const auto& term : system.delays()) {
    const auto gv = term.field(cv.v);
    const double discount = std::pow(e_delay, term.field.declared_degree());
    for (int i = 0; i < d; ++i) lhs[i] += gv[i] / (discount * cv.v[i]);
  }
  for (int i = 0; i < d; ++i) {
    lhs[i] += nu_factor * c * sup_I(beta, alphas[i], c);
  }
  return lhs;
}

namespace detail {

inline bool certificate_feasible(const SystemSpec& system,
                                 const CertificateVector& cv, double phi_norm,
                                 double c) {
  for (double entry : certificate_lhs(system, cv, phi_norm, c)) {
    if (!(entry <= 0.0)) return false;
  }
  return true;
}

}  // namespace detail

/// Largest certifiable decay rate, located on a descending geometric grid
/// over (0, 1) and then sharpened by bisection to 1e-9. The returned rate
/// is always on the feasible side of the boundary.
[[nodiscard]] inline double find_rate_constant(const SystemSpec& system,
                                               const CertificateVector& cv,
                                               double phi_norm) {
  if (!(phi_norm >= 0.0) || !std::isfinite(phi_norm)) {
    throw std::invalid_argument("find_rate_constant: phi_norm must be >= 0");
  }
  if (system.degree_p() > 1.0 && !(phi_norm > 0.0)) {
    throw std::invalid_argument(
        "find_rate_constant: phi_norm must be > 0 when the degree exceeds 1");
  }
  constexpr int kGridPoints = 64;
  const double top = 1.0 - 1e-6;
  const double bottom = 1e-7;
  const double ratio = std::pow(bottom / top, 1.0 / (kGridPoints - 1));

  double c = top;
  double infeasible_above = -1.0;
  for (int k = 0; k < kGridPoints; ++k, c *= ratio) {
    if (detail::certificate_feasible(system, cv, phi_norm, c)) {
      if (k == 0) return c;
      double lo = c;
      double hi = infeasible_above;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (detail::certificate_feasible(system, cv, phi_norm, mid)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return lo;
    }
    infeasible_above = c;
  }
  if (detail::certificate_feasible(system, cv, phi_norm, 1e-12)) {
    return 1e-12;
  }
  throw CertificateInfeasible(
      "no positive rate satisfies the certificate inequality for this "
      "vector and initial norm");
}

/// Assembles the decay certificate for a validated vector and initial norm.
/// The scope is global exactly when every delayed degree equals p; a local
/// certificate requires the initial norm to sit strictly inside the unit
/// ball of the weighted norm.
[[nodiscard]] inline Certificate make_certificate(const SystemSpec& system,
                                                  const CertificateVector& cv,
                                                  double phi_norm) {
  const Scope scope =
      system.uniform_degrees() ? Scope::global : Scope::local;
  if (scope == Scope::local && phi_norm >= 1.0) {
    throw ScopeError(
        "certificate is local: it applies only to initial data with "
        "||phi||_v < 1");
  }
  const double c = find_rate_constant(system, cv, phi_norm);
  const double beta = compute_beta(system);
  Certificate cert;
  cert.v = cv.v;
  cert.beta = beta;
  cert.c = c;
  cert.nu = phi_norm / mittag_leffler(beta, 1.0, -c);
  cert.scope = scope;
  const auto& alphas = system.orders().values();
  cert.sup_i.resize(system.dim());
  for (int i = 0; i < system.dim(); ++i) {
    cert.sup_i[i] = sup_I(beta, alphas[i], c);
  }
  return cert;
}

/// The certified decay envelope nu * v_i * E_beta(-c t^beta) at time t.
[[nodiscard]] inline std::vector<double> envelope(const Certificate& cert,
                                                  double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("envelope: t must be >= 0");
  }
  const double factor =
      cert.nu * mittag_leffler(cert.beta, 1.0, -cert.c * std::pow(t, cert.beta));
  std::vector<double> out(cert.v.size());
  for (std::size_t i = 0; i < cert.v.size(); ++i) out[i] = factor * cert.v[i];
  return out;
}

}  // namespace mlstab
