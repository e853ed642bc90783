#pragma once

// Multi-order fractional delay systems: per-component Caputo orders, a
// non-delayed vector field, delayed terms with bounded time-varying lags,
// and nonnegative initial histories.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlstab {

/// Collects warnings emitted during field evaluation or integration
/// (negative-radicand clamps, negativity clamps). Stores the first few
/// messages verbatim and counts the rest.
class WarningSink {
 public:
  void note(std::string message) {
    ++total_;
    if (messages_.size() < kMaxStored) messages_.push_back(std::move(message));
  }
  [[nodiscard]] const std::vector<std::string>& messages() const {
    return messages_;
  }
  [[nodiscard]] std::size_t total() const { return total_; }

 private:
  static constexpr std::size_t kMaxStored = 64;
  std::vector<std::string> messages_;
  std::size_t total_ = 0;
};

/// A vector field on the nonnegative orthant together with its declared
/// homogeneity degree. Fields are plain callables; evaluation is total and
/// immutable state makes instances freely shareable.
class VectorField {
 public:
  using EvalFn = std::function<std::vector<double>(const std::vector<double>&,
                                                   WarningSink*)>;

  VectorField(std::string name, int dim, double declared_degree, EvalFn eval)
      : name_(std::move(name)),
        dim_(dim),
        degree_(declared_degree),
        eval_(std::move(eval)) {
    if (dim_ < 1) throw std::invalid_argument("VectorField: dim must be >= 1");
    if (!(degree_ >= 1.0)) {
      throw std::invalid_argument(
          "VectorField: homogeneity degree must be >= 1");
    }
    if (!eval_) throw std::invalid_argument("VectorField: missing callable");
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] double declared_degree() const { return degree_; }

  [[nodiscard]] std::vector<double> operator()(const std::vector<double>& x,
                                               WarningSink* sink = nullptr) const {
    if (static_cast<int>(x.size()) != dim_) {
      throw std::invalid_argument("VectorField '" + name_ +
                                  "': argument dimension mismatch");
    }
    return eval_(x, sink);
  }

 private:
  std::string name_;
  int dim_;
  double degree_;
  EvalFn eval_;
};

/// One delayed term g(w(t - tau(t))) with its lag bound r_j.
struct DelayTerm {
  VectorField field;
  std::function<double(double)> tau;
  double r_j;
};

/// Componentwise Caputo orders, each in (0, 1].
class Orders {
 public:
  explicit Orders(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.empty()) throw std::invalid_argument("Orders: empty");
    for (double a : alpha_) {
      if (!(a > 0.0) || a > 1.0 || !std::isfinite(a)) {
        throw std::invalid_argument(
            "order constraint violated: each alpha_i must lie in (0, 1]");
      }
    }
  }

  [[nodiscard]] const std::vector<double>& values() const { return alpha_; }
  [[nodiscard]] int dim() const { return static_cast<int>(alpha_.size()); }
  [[nodiscard]] double min_order() const {
    return *std::min_element(alpha_.begin(), alpha_.end());
  }

 private:
  std::vector<double> alpha_;
};

/// The full system description: D^{alpha_i} w_i = f_i(w) + sum_j g_i^(j)(w(t - tau_j)).
class SystemSpec {
 public:
  SystemSpec(Orders orders, VectorField f, std::vector<DelayTerm> delays)
      : orders_(std::move(orders)),
        f_(std::move(f)),
        delays_(std::move(delays)) {
    if (f_.dim() != orders_.dim()) {
      throw std::invalid_argument("SystemSpec: f dimension mismatch");
    }
    const double p = f_.declared_degree();
    for (const auto& term : delays_) {
      if (term.field.dim() != orders_.dim()) {
        throw std::invalid_argument("SystemSpec: delay field dimension mismatch");
      }
      if (!(term.r_j > 0.0)) {
        throw std::invalid_argument("SystemSpec: delay bound r_j must be > 0");
      }
      if (!term.tau) {
        throw std::invalid_argument("SystemSpec: delay term missing tau");
      }
      if (term.field.declared_degree() < p) {
        throw std::invalid_argument(
            "SystemSpec: delayed degrees q_j must satisfy q_j >= p");
      }
    }
  }

  [[nodiscard]] int dim() const { return orders_.dim(); }
  [[nodiscard]] const Orders& orders() const { return orders_; }
  [[nodiscard]] const VectorField& f() const { return f_; }
  [[nodiscard]] const std::vector<DelayTerm>& delays() const { return delays_; }
  [[nodiscard]] double degree_p() const { return f_.declared_degree(); }

  /// Largest delay bound (0 when the system has no delayed terms).
  [[nodiscard]] double r() const {
    double r = 0.0;
    for (const auto& term : delays_) r = std::max(r, term.r_j);
    return r;
  }

  /// True when every delayed degree equals p, the condition for the decay
  /// certificate to hold globally.
  [[nodiscard]] bool uniform_degrees() const {
    for (const auto& term : delays_) {
      if (term.field.declared_degree() != f_.declared_degree()) return false;
    }
    return true;
  }

  /// Right-hand side f(w_now) + sum_j g^(j)(history(t - tau_j(t))).
  /// `history` must cover [t - r, t].
  [[nodiscard]] std::vector<double> rhs(
      double t, const std::vector<double>& w_now,
      const std::function<std::vector<double>(double)>& history,
      WarningSink* sink = nullptr) const {
    if (t < 0.0) throw std::invalid_argument("rhs: t must be >= 0");
    std::vector<double> out = f_(w_now, sink);
    for (const auto& term : delays_) {
      const double lag = term.tau(t);
      const std::vector<double> delayed = history(t - lag);
      const std::vector<double> g = term.field(delayed, sink);
      for (int i = 0; i < dim(); ++i) out[i] += g[i];
    }
    return out;
  }

 private:
  Orders orders_;
  VectorField f_;
  std::vector<DelayTerm> delays_;
};

/// Weighted max norm ||w||_v = max_i |w_i| / v_i for a positive weight v.
[[nodiscard]] inline double weighted_norm(const std::vector<double>& w,
                                          const std::vector<double>& v) {
  if (w.size() != v.size()) {
    throw std::invalid_argument("weighted_norm: dimension mismatch");
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(v[i] > 0.0)) {
      throw std::invalid_argument("weighted_norm: weights must be positive");
    }
    norm = std::max(norm, std::abs(w[i]) / v[i]);
  }
  return norm;
}

/// Central finite-difference Jacobian of a field at x with step h.
[[nodiscard]] inline std::vector<std::vector<double>> jacobian_fd(
    const VectorField& field, const std::vector<double>& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("jacobian_fd: h must be > 0");
  const int d = field.dim();
  std::vector<std::vector<double>> jac(d, std::vector<double>(d, 0.0));
  std::vector<double> plus = x;
  std::vector<double> minus = x;
  for (int j = 0; j < d; ++j) {
    plus[j] = x[j] + h;
    minus[j] = x[j] - h;
    const std::vector<double> fp = field(plus);
    const std::vector<double> fm = field(minus);
    for (int i = 0; i < d; ++i) jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
    plus[j] = x[j];
    minus[j] = x[j];
  }
  return jac;
}

/// Initial history phi on [-r, 0]: a nonnegative continuous function given
/// in closed form, as a constant, or as linearly interpolated samples.
class InitialCondition {
 public:
  enum class Kind { constant, samples, function };

  static InitialCondition constant(std::vector<double> values) {
    InitialCondition phi;
    phi.kind_ = Kind::constant;
    phi.dim_ = static_cast<int>(values.size());
    phi.span_ = std::numeric_limits<double>::infinity();
    require_nonneg(values);
    phi.constant_ = std::move(values);
    if (phi.dim_ < 1) throw std::invalid_argument("phi: empty constant");
    return phi;
  }

  static InitialCondition from_samples(std::vector<double> times,
                                       std::vector<std::vector<double>> values) {
    InitialCondition phi;
    phi.kind_ = Kind::samples;
    if (times.size() < 2 || times.size() != values.size()) {
      throw std::invalid_argument("phi samples: need matching times/values");
    }
    if (std::abs(times.back()) > 1e-12) {
      throw std::invalid_argument("phi samples: last sample must be at s = 0");
    }
    phi.dim_ = static_cast<int>(values.front().size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (k > 0 && !(times[k] > times[k - 1])) {
        throw std::invalid_argument("phi samples: times must be increasing");
      }
      if (static_cast<int>(values[k].size()) != phi.dim_) {
        throw std::invalid_argument("phi samples: ragged values");
      }
      require_nonneg(values[k]);
    }
    phi.span_ = -times.front();
    phi.times_ = std::move(times);
    phi.values_ = std::move(values);
    return phi;
  }

  static InitialCondition from_function(
      int dim, double span, std::function<std::vector<double>(double)> fn) {
    InitialCondition phi;
    phi.kind_ = Kind::function;
    phi.dim_ = dim;
    phi.span_ = span;
    phi.fn_ = std::move(fn);
    if (dim < 1 || !(span > 0.0) || !phi.fn_) {
      throw std::invalid_argument("phi function: bad parameters");
    }
    for (int k = 0; k <= 256; ++k) {
      const double s = -span + span * k / 256.0;
      require_nonneg(phi.fn_(s));
    }
    return phi;
  }

  [[nodiscard]] int dim() const { return dim_; }

  /// Length of the covered history interval (infinite for constants).
  [[nodiscard]] double span() const { return span_; }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const std::vector<double>& constant_values() const {
    if (kind_ != Kind::constant) {
      throw std::logic_error("phi: not a constant history");
    }
    return constant_;
  }
  [[nodiscard]] const std::vector<double>& sample_times() const { return times_; }
  [[nodiscard]] const std::vector<std::vector<double>>& sample_values() const {
    return values_;
  }

  [[nodiscard]] std::vector<double> operator()(double s) const {
    if (s > 1e-9) throw std::out_of_range("phi: defined only for s <= 0");
    s = std::min(s, 0.0);
    if (s < -span_ - 1e-9) {
      throw std::out_of_range("phi: argument before the covered history");
    }
    s = std::max(s, -span_);
    switch (kind_) {
      case Kind::constant:
        return constant_;
      case Kind::function:
        return fn_(s);
      case Kind::samples: {
        auto it = std::upper_bound(times_.begin(), times_.end(), s);
        if (it == times_.begin()) return values_.front();
        if (it == times_.end()) return values_.back();
        const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
        const std::size_t lo = hi - 1;
        const double t0 = times_[lo];
        const double t1 = times_[hi];
        const double w = (s - t0) / (t1 - t0);
        std::vector<double> out(dim_);
        for (int i = 0; i < dim_; ++i) {
          out[i] = (1.0 - w) * values_[lo][i] + w * values_[hi][i];
        }
        return out;
      }
    }
    throw std::logic_error("phi: unreachable");
  }

 private:
  InitialCondition() = default;

  static void require_nonneg(const std::vector<double>& values) {
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(
            "phi must be finite and nonnegative on [-r, 0]");
      }
    }
  }

  Kind kind_ = Kind::constant;
  int dim_ = 0;
  double span_ = 0.0;
  std::vector<double> constant_;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
  std::function<std::vector<double>(double)> fn_;
};

namespace detail {

// Square root with the radicand clamped at zero. The built-in fields are
// only meant for the nonnegative orthant; trajectories may graze it from
// rounding, and finite-difference probes step outside it deliberately.
inline double clamped_sqrt(double radicand, WarningSink* sink) {
  if (radicand < 0.0) {
    if (sink) sink->note("negative radicand clamped to 0");
    return 0.0;
  }
  return std::sqrt(radicand);
}

}  // namespace detail

/// Looks up a vector field by registry name. Fields tied to the built-in
/// examples are 2-dimensional; "zero" and "negative_identity" accept any
/// dimension. Throws std::invalid_argument for unknown names.
[[nodiscard]] inline VectorField field_from_registry(const std::string& name,
                                                     int dim) {
  auto require_dim2 = [&] {
    if (dim != 2) {
      throw std::invalid_argument("field '" + name + "' is 2-dimensional");
    }
  };
  if (name == "example1_f") {
    require_dim2();
    return VectorField(name, 2, 1.0,
                       [](const std::vector<double>& w, WarningSink*) {
                         return std::vector<double>{-4.0 * w[0] + 3.0 * w[1],
                                                    w[0] - 3.0 * w[1]};
                       });
  }
  if (name == "example1_g") {
    require_dim2();
    return VectorField(name, 2, 2.0,
                       [](const std::vector<double>& w, WarningSink* sink) {
                         const double radicand = w[0] * w[0] * w[0] * w[1];
                         return std::vector<double>{
                             w[0] * w[0] + 3.0 * detail::clamped_sqrt(radicand, sink),
                             w[0] * w[1] + 2.0 * w[1] * w[1]};
                       });
  }
  if (name == "example2_f") {
    require_dim2();
    return VectorField(name, 2, 2.0,
                       [](const std::vector<double>& w, WarningSink*) {
                         return std::vector<double>{
                             -8.0 * w[0] * w[0] + w[1] * w[1],
                             2.0 * w[0] * w[0] - 9.0 * w[1] * w[1]};
                       });
  }
  if (name == "example2_g") {
    require_dim2();
    return VectorField(name, 2, 2.0,
                       [](const std::vector<double>& w, WarningSink* sink) {
                         const double radicand =
                             w[0] * w[0] + 7.0 * w[1] * w[1];
                         const double root = detail::clamped_sqrt(radicand, sink);
                         return std::vector<double>{
                             3.0 * w[0] * w[1] + w[1] * w[1],
                             (w[0] + 2.0 * w[1]) * root};
                       });
  }
  if (name == "zero") {
    return VectorField(name, dim, 1.0,
                       [dim](const std::vector<double>&, WarningSink*) {
                         return std::vector<double>(dim, 0.0);
                       });
  }
  if (name == "negative_identity") {
    return VectorField(name, dim, 1.0,
                       [](const std::vector<double>& w, WarningSink*) {
                         std::vector<double> out(w.size());
                         for (std::size_t i = 0; i < w.size(); ++i) out[i] = -w[i];
                         return out;
                       });
  }
  if (name == "identity") {
    return VectorField(name, dim, 1.0,
                       [](const std::vector<double>& w, WarningSink*) {
                         return w;
                       });
  }
  throw std::invalid_argument("unknown field '" + name + "' in registry");
}

/// Lag functions available to configurations.
[[nodiscard]] inline std::function<double(double)> make_constant_tau(double value) {
  if (!(value >= 0.0)) {
    throw std::invalid_argument("constant tau must be >= 0");
  }
  return [value](double) { return value; };
}

[[nodiscard]] inline std::function<double(double)> make_example1_tau() {
  return [](double t) { return (2.0 + std::sin(t)) / 3.0; };
}

[[nodiscard]] inline std::function<double(double)> make_example2_tau() {
  return [](double t) { return 0.5 + 1.0 / (2.0 + t * t); };
}

/// A built-in example system plus its reference data: a certificate-vector
/// suggestion (when one is known to be feasible) and the initial histories
/// used by the bundled scenarios.
struct BuiltinExample {
  SystemSpec system;
  std::optional<std::vector<double>> suggested_v;
  std::vector<std::vector<double>> reference_phi;
};

/// The two bundled systems. "example1" mixes degree-1 and degree-2 fields
/// (decay certificate is local); "example2" has uniform degree 2 (global).
[[nodiscard]] inline BuiltinExample builtin_example(const std::string& id) {
  if (id == "example1") {
    SystemSpec system(Orders({0.71, 0.61}), field_from_registry("example1_f", 2),
                      {DelayTerm{field_from_registry("example1_g", 2),
                                 make_example1_tau(), 1.0}});
    return BuiltinExample{std::move(system),
                          std::vector<double>{0.3, 0.2},
                          {{0.2, 0.15}, {1.2, 0.4}}};
  }
  if (id == "example2") {
    SystemSpec system(Orders({0.95, 0.7}), field_from_registry("example2_f", 2),
                      {DelayTerm{field_from_registry("example2_g", 2),
                                 make_example2_tau(), 1.0}});
    return BuiltinExample{std::move(system), std::nullopt,
                          {{0.2, 0.4}, {2.3, 0.2}}};
  }
  throw std::invalid_argument("unknown example id '" + id + "'");
}

}  // namespace mlstab
