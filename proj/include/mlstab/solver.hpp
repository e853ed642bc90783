#pragma once

// Predictor-corrector time stepping for multi-order Caputo systems with
// delays, after Diethelm-Ford-Freed's fractional Adams-Bashforth-Moulton
// scheme, applied per component with that component's order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <mlstab/special_functions.hpp>
#include <mlstab/system_model.hpp>

namespace mlstab {

struct SolverConfig {
  double step = 1e-3;
  double horizon = 20.0;
  int corrector_iterations = 1;
};

/// Uniform-grid solution record. States are stored row-major: row n holds
/// w(times[n]). The initial history rides along so that value() covers
/// [-r, 0) as well and downstream consumers can rebuild norms over it.
struct Trajectory {
  int dim = 0;
  double step = 0.0;
  double r = 0.0;
  std::vector<double> times;
  std::vector<double> states;
  InitialCondition phi = InitialCondition::constant({0.0});
  std::vector<std::string> warnings;
  std::size_t warning_total = 0;

  [[nodiscard]] std::size_t rows() const { return times.size(); }

  [[nodiscard]] std::vector<double> row(std::size_t n) const {
    if (n >= rows()) throw std::out_of_range("trajectory row out of range");
    return std::vector<double>(states.begin() + n * dim,
                               states.begin() + (n + 1) * dim);
  }

  /// State at any covered time: the history for t <= 0, exact rows on grid
  /// points, linear interpolation in between.
  [[nodiscard]] std::vector<double> value(double t) const {
    if (t <= 0.0) return phi(t);
    if (times.empty()) throw std::out_of_range("trajectory is empty");
    const double last = times.back();
    if (t > last + 1e-9) {
      throw std::out_of_range("trajectory lookup beyond the horizon");
    }
    t = std::min(t, last);
    const auto k = static_cast<std::size_t>(
        std::min(static_cast<double>(rows() - 1),
                 std::max(0.0, std::floor(t / step + 1e-12))));
    const double aligned = std::abs(t - times[std::min(
                               static_cast<std::size_t>(std::llround(t / step)),
                               rows() - 1)]);
    if (aligned <= 1e-9 * std::max(1.0, std::abs(t))) {
      return row(std::min(static_cast<std::size_t>(std::llround(t / step)),
                          rows() - 1));
    }
    const std::size_t lo = std::min(k, rows() - 2);
    const double theta = (t - times[lo]) / step;
    std::vector<double> out(dim);
    for (int i = 0; i < dim; ++i) {
      out[i] = (1.0 - theta) * states[lo * dim + i] +
               theta * states[(lo + 1) * dim + i];
    }
    return out;
  }
};

/// Thrown when the solution norm passes 1e12 or stops being finite. The
/// computed prefix of the trajectory is preserved for inspection.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

struct AbmWeights {
  std::vector<double> predictor;  // k = 0..n, scale included
  std::vector<double> corrector;  // k = 0..n plus the new point, scale included
};

/// Quadrature weights for the step from t_n to t_(n+1). The predictor is the
/// product-rectangle rule, the corrector the product-trapezoid rule; both
/// integrate constants exactly, which pins their row sums to
/// (t_(n+1))^alpha / Gamma(alpha+1).
[[nodiscard]] inline AbmWeights abm_weights(double alpha, std::size_t n,
                                            double h) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::domain_error("abm_weights: alpha must lie in (0, 1]");
  }
  if (!(h > 0.0)) throw std::invalid_argument("abm_weights: h must be > 0");
  AbmWeights w;
  w.predictor.resize(n + 1);
  w.corrector.resize(n + 2);
  const double pred_scale = std::pow(h, alpha) / gamma(alpha + 1.0);
  const double corr_scale = std::pow(h, alpha) / gamma(alpha + 2.0);
  const auto pa = [alpha](double m) { return std::pow(m, alpha); };
  const auto pa1 = [alpha](double m) { return std::pow(m, alpha + 1.0); };
  const auto dn = static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) {
    const double nk = dn - static_cast<double>(k);
    w.predictor[k] = pred_scale * (pa(nk + 1.0) - pa(nk));
    if (k == 0) {
      w.corrector[0] = corr_scale * (pa1(dn) - (dn - alpha) * pa(dn + 1.0));
    } else {
      w.corrector[k] =
          corr_scale * (pa1(nk + 2.0) - 2.0 * pa1(nk + 1.0) + pa1(nk));
    }
  }
  w.corrector[n + 1] = corr_scale;
  return w;
}

namespace detail {

inline double max_abs(const double* row, int dim) {
  double m = 0.0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(row[i]));
  return m;
}

inline bool row_finite(const double* row, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(row[i])) return false;
  }
  return true;
}

}  // namespace detail

/// Integrates the system from the history phi over [0, horizon]. The grid is
/// uniform; when horizon is not a multiple of step the final point overshoots
/// to the next multiple. Throws SolverDivergence past a norm of 1e12.
[[nodiscard]] inline Trajectory solve(const SystemSpec& system,
                                      const InitialCondition& phi,
                                      const SolverConfig& config) {
  const int d = system.dim();
  if (phi.dim() != d) {
    throw std::invalid_argument("solve: phi dimension mismatch");
  }
  const double h = config.step;
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("solve: step must be positive");
  }
  if (!(config.horizon >= h)) {
    throw std::invalid_argument("solve: horizon must be at least one step");
  }
  if (config.corrector_iterations < 1 || config.corrector_iterations > 5) {
    throw std::invalid_argument("solve: corrector_iterations must be in 1..5");
  }
  const double r = system.r();
  if (r > 0.0) {
    if (h > r / 2.0 + 1e-12) {
      throw std::invalid_argument(
          "solve: step must not exceed half the largest delay bound");
    }
    if (phi.span() + 1e-9 < r) {
      throw std::invalid_argument("solve: phi does not cover [-r, 0]");
    }
  }
  const auto n_steps =
      static_cast<std::size_t>(std::ceil(config.horizon / h - 1e-9));

  // Power tables m^alpha and m^(alpha+1), shared between components with
  // equal orders; the ABM weights are first differences of these.
  const auto& alphas = system.orders().values();
  std::map<double, std::size_t> table_index;
  std::vector<std::vector<double>> pow_a;
  std::vector<std::vector<double>> pow_a1;
  std::vector<std::size_t> comp_table(d);
  for (int i = 0; i < d; ++i) {
    const auto [it, inserted] =
        table_index.try_emplace(alphas[i], pow_a.size());
    if (inserted) {
      std::vector<double> ta(n_steps + 2);
      std::vector<double> ta1(n_steps + 2);
      for (std::size_t m = 0; m < n_steps + 2; ++m) {
        ta[m] = std::pow(static_cast<double>(m), alphas[i]);
        ta1[m] = std::pow(static_cast<double>(m), alphas[i] + 1.0);
      }
      pow_a.push_back(std::move(ta));
      pow_a1.push_back(std::move(ta1));
    }
    comp_table[i] = it->second;
  }
  std::vector<double> pred_scale(d);
  std::vector<double> corr_scale(d);
  for (int i = 0; i < d; ++i) {
    pred_scale[i] = std::pow(h, alphas[i]) / gamma(alphas[i] + 1.0);
    corr_scale[i] = std::pow(h, alphas[i]) / gamma(alphas[i] + 2.0);
  }

  Trajectory traj;
  traj.dim = d;
  traj.step = h;
  traj.r = r;
  traj.phi = phi;
  traj.times.resize(n_steps + 1);
  for (std::size_t n = 0; n <= n_steps; ++n) {
    traj.times[n] = static_cast<double>(n) * h;
  }
  traj.states.assign((n_steps + 1) * d, 0.0);

  WarningSink sink;
  const std::vector<double> w0 = phi(0.0);
  std::copy(w0.begin(), w0.end(), traj.states.begin());

  // F is kept per component so the O(N) convolution loops stay contiguous.
  std::vector<std::vector<double>> F(d, std::vector<double>(n_steps + 1, 0.0));

  std::size_t n_known = 0;
  const double* anchor = nullptr;

  const auto lookup = [&](double t) -> std::vector<double> {
    if (t <= 0.0) return phi(t);
    const double k = t / h;
    const auto rounded = static_cast<std::size_t>(std::llround(k));
    if (std::abs(k - std::llround(k)) < 1e-9) {
      if (rounded <= n_known) return traj.row(rounded);
      return std::vector<double>(anchor, anchor + d);
    }
    const auto k0 = static_cast<std::size_t>(std::floor(k));
    std::vector<double> out(d);
    if (k0 >= n_known) {
      const double theta = (t - static_cast<double>(n_known) * h) / h;
      for (int i = 0; i < d; ++i) {
        out[i] = (1.0 - theta) * traj.states[n_known * d + i] +
                 theta * anchor[i];
      }
      return out;
    }
    const double theta = k - static_cast<double>(k0);
    for (int i = 0; i < d; ++i) {
      out[i] = (1.0 - theta) * traj.states[k0 * d + i] +
               theta * traj.states[(k0 + 1) * d + i];
    }
    return out;
  };

  const auto rhs_at = [&](double t, const std::vector<double>& w_now) {
    std::vector<double> out = system.f()(w_now, &sink);
    for (const auto& term : system.delays()) {
      const auto delayed = lookup(t - term.tau(t));
      const auto g = term.field(delayed, &sink);
      for (int i = 0; i < d; ++i) out[i] += g[i];
    }
    return out;
  };

  {
    const auto f0 = rhs_at(0.0, w0);
    for (int i = 0; i < d; ++i) F[i][0] = f0[i];
  }

  std::vector<double> pred(d);
  std::vector<double> corr_hist(d);
  std::vector<double> w_new(d);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t_next = static_cast<double>(n + 1) * h;
    n_known = n;
    const auto dn = static_cast<double>(n);
    for (int i = 0; i < d; ++i) {
      const auto& pa = pow_a[comp_table[i]];
      const auto& pa1 = pow_a1[comp_table[i]];
      const auto& Fi = F[i];
      double psum = (pa[n + 1] - pa[n]) * Fi[0];
      double csum = (pa1[n] - (dn - alphas[i]) * pa[n + 1]) * Fi[0];
      for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t mm = n - k + 1;
        psum += (pa[mm] - pa[mm - 1]) * Fi[k];
        csum += (pa1[mm + 1] - 2.0 * pa1[mm] + pa1[mm - 1]) * Fi[k];
      }
      pred[i] = w0[i] + pred_scale[i] * psum;
      corr_hist[i] = csum;
    }

    anchor = pred.data();
    w_new = pred;
    for (int it = 0; it < config.corrector_iterations; ++it) {
      const auto f_new = rhs_at(t_next, w_new);
      for (int i = 0; i < d; ++i) {
        w_new[i] = w0[i] + corr_scale[i] * (f_new[i] + corr_hist[i]);
      }
    }

    for (int i = 0; i < d; ++i) {
      if (w_new[i] >= -1e-9 && w_new[i] < 0.0) {
        sink.note("component " + std::to_string(i + 1) +
                  " clamped to 0 at t = " + std::to_string(t_next));
        w_new[i] = 0.0;
      }
      traj.states[(n + 1) * d + i] = w_new[i];
    }

    const double* stored = traj.states.data() + (n + 1) * d;
    if (!detail::row_finite(stored, d) || detail::max_abs(stored, d) > 1e12) {
      const std::size_t keep = detail::row_finite(stored, d) ? n + 2 : n + 1;
      Trajectory partial;
      partial.dim = d;
      partial.step = h;
      partial.r = r;
      partial.phi = phi;
      partial.times.assign(traj.times.begin(), traj.times.begin() + keep);
      partial.states.assign(traj.states.begin(),
                            traj.states.begin() + keep * d);
      partial.warnings = sink.messages();
      partial.warning_total = sink.total();
      throw SolverDivergence(
          "solution norm exceeded 1e12 at t = " + std::to_string(t_next),
          std::move(partial));
    }

    n_known = n + 1;
    const auto f_store = rhs_at(t_next, w_new);
    for (int i = 0; i < d; ++i) F[i][n + 1] = f_store[i];
  }

  traj.warnings = sink.messages();
  traj.warning_total = sink.total();
  return traj;
}

}  // namespace mlstab
