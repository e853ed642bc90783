#pragma once

// Randomized structural checks for the hypotheses behind the decay
// certificate: cooperativity of the undelayed field, homogeneity degrees,
// order preservation of the delayed fields, and the search for a positive
// vector with strictly negative feasibility slack.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <mlstab/system_model.hpp>

namespace mlstab {

inline constexpr std::uint64_t kDefaultSeed = 12345;

/// Deterministic random source with an explicitly pinned bit mapping, so
/// reports citing a seed reproduce bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform draw in [0, 1) using the top 53 bits of the generator word.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller on two uniform draws.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.2831853071795864769;
    spare_ = radius * std::sin(two_pi * u2);
    has_spare_ = true;
    return radius * std::cos(two_pi * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class Verdict { pass, fail, inconclusive };

[[nodiscard]] inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct CheckWitness {
  std::vector<double> point;
  std::string detail;
};

struct CheckReport {
  std::string assumption;
  Verdict verdict = Verdict::inconclusive;
  std::size_t sample_count = 0;
  std::uint64_t rng_seed = 0;
  std::vector<CheckWitness> witnesses;
  std::vector<std::pair<std::string, double>> metrics;
};

namespace detail {

constexpr std::size_t kMaxWitnesses = 8;

/// Random point in the open positive orthant at a log-uniform radius, so the
/// checks exercise small and large states alike.
inline std::vector<double> orthant_sample(Rng& rng, int dim, double log10_lo,
                                          double log10_hi, double& radius_out) {
  const double radius = std::pow(10.0, rng.uniform(log10_lo, log10_hi));
  std::vector<double> x(dim);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < dim; ++i) {
      x[i] = std::abs(rng.normal());
      norm2 += x[i] * x[i];
    }
  } while (norm2 == 0.0);
  const double scale = radius / std::sqrt(norm2);
  for (double& xi : x) xi *= scale;
  radius_out = radius;
  return x;
}

inline bool all_finite(const std::vector<double>& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline void add_witness(CheckReport& report, std::vector<double> point,
                        std::string detail) {
  if (report.witnesses.size() < kMaxWitnesses) {
    report.witnesses.push_back({std::move(point), std::move(detail)});
  }
}

/// Per-sample homogeneity exponents: least-squares slope of
/// log ||f(lambda x)|| against log lambda along random rays.
inline std::vector<double> degree_slopes(const VectorField& field,
                                         std::size_t samples,
                                         std::uint64_t seed) {
  Rng rng(seed);
  constexpr int kLambdas = 8;
  std::vector<double> slopes;
  for (std::size_t s = 0; s < samples; ++s) {
    double radius = 0.0;
    const auto x = orthant_sample(rng, field.dim(), -1.0, 1.0, radius);
    double sum_l = 0.0, sum_y = 0.0, sum_ll = 0.0, sum_ly = 0.0;
    bool usable = true;
    for (int k = 0; k < kLambdas; ++k) {
      const double lambda =
          0.1 * std::pow(100.0, static_cast<double>(k) / (kLambdas - 1));
      std::vector<double> scaled(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = lambda * x[i];
      const auto value = field(scaled);
      double norm2 = 0.0;
      for (double vi : value) norm2 += vi * vi;
      if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
        usable = false;
        break;
      }
      const double l = std::log(lambda);
      const double y = 0.5 * std::log(norm2);
      sum_l += l;
      sum_y += y;
      sum_ll += l * l;
      sum_ly += l * y;
    }
    if (!usable) continue;
    const double n = kLambdas;
    slopes.push_back((n * sum_ly - sum_l * sum_y) /
                     (n * sum_ll - sum_l * sum_l));
  }
  return slopes;
}

}  // namespace detail

/// Samples the Jacobian over the positive orthant and flags negative
/// off-diagonal entries, the defining obstruction to cooperativity.
[[nodiscard]] inline CheckReport check_cooperative(
    const VectorField& field, std::size_t samples = 200,
    std::uint64_t seed = kDefaultSeed, double tol = 1e-8) {
  CheckReport report;
  report.assumption = "cooperative:" + field.name();
  report.sample_count = samples;
  report.rng_seed = seed;
  Rng rng(seed);
  std::size_t unusable = 0;
  bool violated = false;
  for (std::size_t s = 0; s < samples; ++s) {
    double radius = 0.0;
    const auto x = detail::orthant_sample(rng, field.dim(), -3.0, 3.0, radius);
    const auto jac = jacobian_fd(field, x, 1e-6 * radius);
    double max_abs = 0.0;
    bool finite = true;
    for (const auto& row : jac) {
      for (double entry : row) {
        if (!std::isfinite(entry)) finite = false;
        max_abs = std::max(max_abs, std::abs(entry));
      }
    }
    if (!finite) {
      ++unusable;
      continue;
    }
    const double threshold = tol * std::max(1.0, max_abs);
    for (int i = 0; i < field.dim(); ++i) {
      for (int j = 0; j < field.dim(); ++j) {
        if (i != j && jac[i][j] < -threshold) {
          violated = true;
          detail::add_witness(report, x,
                              "dF_" + std::to_string(i + 1) + "/dx_" +
                                  std::to_string(j + 1) + " = " +
                                  std::to_string(jac[i][j]));
        }
      }
    }
  }
  if (violated) {
    report.verdict = Verdict::fail;
  } else if (unusable == samples) {
    report.verdict = Verdict::inconclusive;
    detail::add_witness(report, {}, "every sampled Jacobian was non-finite");
  } else {
    report.verdict = Verdict::pass;
  }
  return report;
}

/// Average homogeneity exponent along random rays. Throws when the field
/// vanishes on every sampled ray, since no exponent is identifiable there.
[[nodiscard]] inline double estimate_degree(const VectorField& field,
                                            std::size_t samples = 64,
                                            std::uint64_t seed = kDefaultSeed) {
  const auto slopes = detail::degree_slopes(field, samples, seed);
  if (slopes.empty()) {
    throw std::invalid_argument("degree estimate: field '" + field.name() +
                                "' vanishes along every sampled ray");
  }
  double sum = 0.0;
  for (double s : slopes) sum += s;
  return sum / static_cast<double>(slopes.size());
}

/// Compares the sampled homogeneity exponent against the declared degree.
/// A field that vanishes on every sampled ray passes vacuously: zero is
/// homogeneous of every degree.
[[nodiscard]] inline CheckReport check_homogeneity(
    const VectorField& field, std::size_t samples = 64,
    std::uint64_t seed = kDefaultSeed, double tol = 1e-3) {
  CheckReport report;
  report.assumption = "homogeneous:" + field.name();
  report.sample_count = samples;
  report.rng_seed = seed;
  const auto slopes = detail::degree_slopes(field, samples, seed);
  if (slopes.empty()) {
    report.verdict = Verdict::pass;
    report.metrics.emplace_back("estimated_degree", field.declared_degree());
    detail::add_witness(report, {},
                        "field vanishes on sampled rays; degree is vacuous");
    return report;
  }
  double sum = 0.0;
  double worst = slopes.front();
  for (double s : slopes) {
    sum += s;
    if (std::abs(s - field.declared_degree()) >
        std::abs(worst - field.declared_degree())) {
      worst = s;
    }
  }
  const double estimate = sum / static_cast<double>(slopes.size());
  report.metrics.emplace_back("estimated_degree", estimate);
  report.metrics.emplace_back("declared_degree", field.declared_degree());
  if (std::abs(estimate - field.declared_degree()) <= tol &&
      std::abs(worst - field.declared_degree()) <= 10.0 * tol) {
    report.verdict = Verdict::pass;
  } else {
    report.verdict = Verdict::fail;
    detail::add_witness(report, {},
                        "estimated degree " + std::to_string(estimate) +
                            " vs declared " +
                            std::to_string(field.declared_degree()));
  }
  return report;
}

/// Samples ordered pairs w <= u in the orthant and checks the field keeps
/// the componentwise order.
[[nodiscard]] inline CheckReport check_order_preserving(
    const VectorField& field, std::size_t samples = 200,
    std::uint64_t seed = kDefaultSeed, double tol = 1e-8) {
  CheckReport report;
  report.assumption = "order_preserving:" + field.name();
  report.sample_count = samples;
  report.rng_seed = seed;
  Rng rng(seed);
  std::size_t unusable = 0;
  bool violated = false;
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> w(field.dim());
    std::vector<double> u(field.dim());
    for (int i = 0; i < field.dim(); ++i) {
      w[i] = rng.uniform(0.0, 5.0);
      u[i] = w[i] + rng.uniform(0.0, 5.0);
    }
    const auto gw = field(w);
    const auto gu = field(u);
    if (!detail::all_finite(gw) || !detail::all_finite(gu)) {
      ++unusable;
      continue;
    }
    for (int i = 0; i < field.dim(); ++i) {
      if (gu[i] - gw[i] < -tol * std::max(1.0, std::abs(gu[i]))) {
        violated = true;
        detail::add_witness(
            report, w,
            "component " + std::to_string(i + 1) + " drops from " +
                std::to_string(gw[i]) + " to " + std::to_string(gu[i]));
      }
    }
  }
  if (violated) {
    report.verdict = Verdict::fail;
  } else if (unusable == samples) {
    report.verdict = Verdict::inconclusive;
    detail::add_witness(report, {}, "every sampled pair was non-finite");
  } else {
    report.verdict = Verdict::pass;
  }
  return report;
}

/// Feasibility slack f(v) + sum_j g^(j)(v), the quantity that must be
/// componentwise strictly negative for the decay certificate to exist.
[[nodiscard]] inline std::vector<double> slack_vector(
    const SystemSpec& system, const std::vector<double>& v) {
  std::vector<double> slack = system.f()(v);
  for (const auto& term : system.delays()) {
    const auto g = term.field(v);
    for (int i = 0; i < system.dim(); ++i) slack[i] += g[i];
  }
  return slack;
}

/// A positive vector together with its validated strictly negative slack.
struct CertificateVector {
  std::vector<double> v;
  std::vector<double> slack;
};

[[nodiscard]] inline CertificateVector make_certificate_vector(
    const SystemSpec& system, std::vector<double> v) {
  if (static_cast<int>(v.size()) != system.dim()) {
    throw std::invalid_argument("certificate vector: dimension mismatch");
  }
  for (double vi : v) {
    if (!(vi > 0.0) || !std::isfinite(vi)) {
      throw std::invalid_argument("certificate vector: entries must be > 0");
    }
  }
  auto slack = slack_vector(system, v);
  for (double si : slack) {
    if (!(si < 0.0)) {
      throw std::invalid_argument(
          "certificate vector: feasibility slack must be strictly negative");
    }
  }
  return CertificateVector{std::move(v), std::move(slack)};
}

struct CertificateSearch {
  std::optional<CertificateVector> found;
  std::vector<double> best_v;
  std::vector<double> best_slack;
  std::size_t restarts_used = 0;
  std::uint64_t seed = 0;
};

/// Random-restart multiplicative pattern search for a feasible certificate
/// vector. Coordinate moves reshape v; global scaling moves matter when the
/// delayed degrees exceed p, because slack is then not scale-invariant and
/// shrinking v can flip its sign.
[[nodiscard]] inline CertificateSearch find_certificate_vector(
    const SystemSpec& system, std::size_t restarts = 40,
    std::uint64_t seed = kDefaultSeed) {
  CertificateSearch result;
  result.seed = seed;
  Rng rng(seed);
  const int d = system.dim();
  const auto objective = [&](const std::vector<double>& v) {
    const auto slack = slack_vector(system, v);
    double worst = -std::numeric_limits<double>::infinity();
    for (double s : slack) worst = std::max(worst, s);
    return std::isfinite(worst) ? worst
                                : std::numeric_limits<double>::infinity();
  };
  double global_best = std::numeric_limits<double>::infinity();

  for (std::size_t restart = 0; restart < restarts; ++restart) {
    result.restarts_used = restart + 1;
    std::vector<double> v(d);
    double vmax = 0.0;
    for (double& vi : v) {
      vi = rng.uniform(0.05, 1.0);
      vmax = std::max(vmax, vi);
    }
    for (double& vi : v) vi /= vmax;
    double value = objective(v);

    double step = 1.6;
    for (int iter = 0; iter < 400 && step > 1.0 + 1e-6; ++iter) {
      std::vector<double> best_candidate;
      double best_value = value;
      const auto consider = [&](std::vector<double> candidate) {
        for (double& ci : candidate) {
          ci = std::clamp(ci, 1e-8, 1e8);
        }
        const double cand_value = objective(candidate);
        if (cand_value < best_value) {
          best_value = cand_value;
          best_candidate = std::move(candidate);
        }
      };
      for (int i = 0; i < d; ++i) {
        auto up = v;
        up[i] *= step;
        consider(std::move(up));
        auto down = v;
        down[i] /= step;
        consider(std::move(down));
      }
      auto grow = v;
      auto shrink = v;
      for (int i = 0; i < d; ++i) {
        grow[i] *= step;
        shrink[i] /= step;
      }
      consider(std::move(grow));
      consider(std::move(shrink));

      if (best_value < value) {
        v = best_candidate;
        value = best_value;
      } else {
        step = 1.0 + (step - 1.0) / 2.0;
      }
    }

    if (value < global_best) {
      global_best = value;
      result.best_v = v;
      result.best_slack = slack_vector(system, v);
    }
    if (value <= -1e-10) {
      if (system.uniform_degrees()) {
        // With uniform degrees the slack scales by a positive power of any
        // rescaling, so the sign pattern survives normalization.
        double norm = 0.0;
        for (double vi : v) norm = std::max(norm, vi);
        for (double& vi : v) vi /= norm;
      }
      result.found = make_certificate_vector(system, v);
      result.best_v = result.found->v;
      result.best_slack = result.found->slack;
      return result;
    }
  }
  return result;
}

}  // namespace mlstab
