#pragma once

// Read-only checks of a simulated trajectory against the guarantees the
// library is built around: componentwise nonnegativity, weighted-norm
// contraction, domination by a certified Mittag-Leffler envelope, and a
// decay heuristic that flags trajectories stuck away from the origin.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <mlstab/solver.hpp>
#include <mlstab/stability_certificate.hpp>
#include <mlstab/system_model.hpp>

namespace mlstab {

/// Outcome of one trajectory check. `worst_violation` is signed: positive
/// means the property was violated by that amount somewhere, negative means
/// it held with that much room to spare. `component` is the coordinate
/// where the extreme occurs (-1 when the check is norm-based).
struct VerificationReport {
  std::string check;
  bool pass = false;
  double worst_violation = 0.0;
  double at_t = 0.0;
  int component = -1;
};

/// ||phi||_v over the whole covered history interval, not just phi(0):
/// the contraction and envelope bounds control the full history.
[[nodiscard]] inline double initial_weighted_norm(const InitialCondition& phi,
                                                  const std::vector<double>& v) {
  if (phi.kind() == InitialCondition::Kind::constant) {
    return weighted_norm(phi.constant_values(), v);
  }
  if (phi.kind() == InitialCondition::Kind::function) {
    double norm = 0.0;
    for (int k = 0; k <= 256; ++k) {
      const double s = -phi.span() + phi.span() * k / 256.0;
      norm = std::max(norm, weighted_norm(phi(s), v));
    }
    return norm;
  }
  double norm = 0.0;
  for (const auto& row : phi.sample_values()) {
    norm = std::max(norm, weighted_norm(row, v));
  }
  return norm;
}

/// Every stored state component must stay above -tol.
[[nodiscard]] inline VerificationReport verify_positivity(
    const Trajectory& traj, double tol = 1e-6) {
  VerificationReport report;
  report.check = "positivity";
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < traj.rows(); ++n) {
    for (int i = 0; i < traj.dim; ++i) {
      const double violation = -traj.states[n * traj.dim + i];
      if (violation > report.worst_violation) {
        report.worst_violation = violation;
        report.at_t = traj.times[n];
        report.component = i;
      }
    }
  }
  report.pass = report.worst_violation <= tol;
  return report;
}

/// ||w(t)||_v must never exceed ||phi||_v beyond tol.
[[nodiscard]] inline VerificationReport verify_norm_bound(
    const Trajectory& traj, const std::vector<double>& v,
    const InitialCondition& phi, double tol = 1e-6) {
  if (static_cast<int>(v.size()) != traj.dim) {
    throw std::invalid_argument("verify_norm_bound: dimension mismatch");
  }
  for (double vi : v) {
    if (!(vi > 0.0)) {
      throw std::invalid_argument("verify_norm_bound: v must be positive");
    }
  }
  const double phi_norm = initial_weighted_norm(phi, v);
  VerificationReport report;
  report.check = "norm_bound";
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < traj.rows(); ++n) {
    const double norm = weighted_norm(traj.row(n), v);
    const double violation = norm - phi_norm;
    if (violation > report.worst_violation) {
      report.worst_violation = violation;
      report.at_t = traj.times[n];
    }
  }
  report.pass = report.worst_violation <= tol;
  return report;
}

/// w_i(t) must stay below the certified envelope nu*v_i*E_beta(-c t^beta)
/// within an absolute tolerance. A local certificate only covers initial
/// data strictly inside the unit ball of ||.||_v.
[[nodiscard]] inline VerificationReport verify_envelope(
    const Trajectory& traj, const Certificate& cert, double tol = 1e-4) {
  if (static_cast<int>(cert.v.size()) != traj.dim) {
    throw std::invalid_argument("verify_envelope: dimension mismatch");
  }
  if (cert.scope == Scope::local &&
      initial_weighted_norm(traj.phi, cert.v) >= 1.0) {
    throw ScopeError(
        "certificate is local: it applies only to initial data with "
        "||phi||_v < 1");
  }
  VerificationReport report;
  report.check = "envelope";
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < traj.rows(); ++n) {
    const auto bound = envelope(cert, traj.times[n]);
    for (int i = 0; i < traj.dim; ++i) {
      const double violation = traj.states[n * traj.dim + i] - bound[i];
      if (violation > report.worst_violation) {
        report.worst_violation = violation;
        report.at_t = traj.times[n];
        report.component = i;
      }
    }
  }
  report.pass = report.worst_violation <= tol;
  return report;
}

/// Flags a trajectory that never decays: non-convergent means the sup norm
/// over the trailing window fraction of the horizon stays above 1% of the
/// initial sup norm, i.e. no two-orders-of-magnitude decay happened.
[[nodiscard]] inline VerificationReport detect_nonconvergence(
    const Trajectory& traj, double window = 0.2) {
  if (!(window > 0.0) || !(window < 1.0)) {
    throw std::invalid_argument("detect_nonconvergence: window must be in (0, 1)");
  }
  const auto sup_norm = [&](std::size_t n) {
    double norm = 0.0;
    for (int i = 0; i < traj.dim; ++i) {
      norm = std::max(norm, std::abs(traj.states[n * traj.dim + i]));
    }
    return norm;
  };
  const double horizon = traj.times.back();
  const double cutoff = horizon * (1.0 - window);
  double trailing_min = std::numeric_limits<double>::infinity();
  double at_t = horizon;
  for (std::size_t n = 0; n < traj.rows(); ++n) {
    if (traj.times[n] < cutoff) continue;
    const double norm = sup_norm(n);
    if (norm < trailing_min) {
      trailing_min = norm;
      at_t = traj.times[n];
    }
  }
  const double threshold = sup_norm(0) * 1e-2;
  VerificationReport report;
  report.check = "convergence";
  report.pass = trailing_min <= threshold;
  report.worst_violation = trailing_min - threshold;
  report.at_t = at_t;
  return report;
}

}  // namespace mlstab
