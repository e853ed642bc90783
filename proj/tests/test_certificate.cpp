#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <mlstab/special_functions.hpp>
#include <mlstab/stability_certificate.hpp>

namespace {

using mlstab::CertificateVector;
using mlstab::Scope;

double worst_entry(const std::vector<double>& xs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double x : xs) worst = std::max(worst, x);
  return worst;
}

double memory_ratio(double beta, double alpha_i, double c, double t) {
  const double y = -c * std::pow(t, beta);
  return std::pow(t, beta - alpha_i) *
         mlstab::mittag_leffler(beta, beta + 1.0 - alpha_i, y) /
         mlstab::mittag_leffler(beta, 1.0, y);
}

}  // namespace

TEST_CASE("compute_beta couples the smallest order with the degree") {
  const auto ex1 = mlstab::builtin_example("example1");
  const auto ex2 = mlstab::builtin_example("example2");
  REQUIRE(mlstab::compute_beta(ex1.system) == Catch::Approx(0.61).margin(1e-15));
  REQUIRE(mlstab::compute_beta(ex2.system) == Catch::Approx(0.35).margin(1e-15));
}

TEST_CASE("sup_I is exactly one when beta matches the component order") {
  REQUIRE(mlstab::sup_I(0.61, 0.61, 0.3) == 1.0);
  REQUIRE(mlstab::sup_I(0.35, 0.35, 0.0137) == 1.0);
  REQUIRE(mlstab::sup_I(1.0, 1.0, 0.9) == 1.0);
}

TEST_CASE("sup_I rejects invalid parameters") {
  REQUIRE_THROWS_AS(mlstab::sup_I(0.5, 0.7, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::sup_I(0.5, 0.7, -0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::sup_I(0.0, 0.7, 0.1), std::domain_error);
  REQUIRE_THROWS_AS(mlstab::sup_I(0.5, 1.2, 0.1), std::domain_error);
}

TEST_CASE("sup_I dominates the memory ratio at off-grid probes") {
  struct Probe {
    double beta, alpha, c;
  };
  const Probe probes[] = {{0.61, 0.71, 0.2449}, {0.35, 0.7, 0.0137},
                          {0.35, 0.95, 0.0137}, {0.8, 1.0, 0.5}};
  for (const auto& pr : probes) {
    CAPTURE(pr.beta, pr.alpha, pr.c);
    const double bound = mlstab::sup_I(pr.beta, pr.alpha, pr.c);
    const double tail = mlstab::gamma(1.0 - pr.beta) *
                        mlstab::reciprocal_gamma(1.0 - pr.alpha);
    REQUIRE(bound >= tail);
    for (int k = 0; k < 120; ++k) {
      const double t = std::pow(10.0, 8.0 * (k + 0.371) / 119.0);
      CAPTURE(t);
      REQUIRE(memory_ratio(pr.beta, pr.alpha, pr.c, t) <= bound);
    }
  }
}

TEST_CASE("memory ratio flattens to the gamma quotient for long times") {
  // For beta = 0.35 and alpha_i = 0.7 the ratio of the two Mittag-Leffler
  // factors approaches Gamma(0.65)/Gamma(0.3) as t grows. Convergence is
  // first order in 1/(c t^beta), so the probe uses c = 0.1 where the
  // argument at t = 1e8 is already deep in the asymptotic regime.
  const double expected = 0.462899270491810559;
  const double y = -0.1 * std::pow(1e8, 0.35);
  const double ratio = mlstab::mittag_leffler(0.35, 0.65, y) /
                       mlstab::mittag_leffler(0.35, 1.0, y);
  REQUIRE(ratio == Catch::Approx(expected).epsilon(0.05));
  REQUIRE(ratio > expected);
}

TEST_CASE("certificate inequality for the mixed-degree example") {
  const auto ex = mlstab::builtin_example("example1");
  REQUIRE(ex.suggested_v.has_value());
  const auto cv = mlstab::make_certificate_vector(ex.system, *ex.suggested_v);
  const double phi_norm = 0.75;

  const double c = mlstab::find_rate_constant(ex.system, cv, phi_norm);
  REQUIRE(c > 0.24);
  REQUIRE(c < 0.27);
  REQUIRE(worst_entry(mlstab::certificate_lhs(ex.system, cv, phi_norm, c)) <=
          0.0);
  REQUIRE(worst_entry(mlstab::certificate_lhs(ex.system, cv, phi_norm,
                                              c + 0.05)) > 0.0);
}

TEST_CASE("certificate inequality for the uniform-degree example") {
  const auto ex = mlstab::builtin_example("example2");
  const auto cv = mlstab::make_certificate_vector(ex.system, {0.75, 1.0});
  const double phi_norm = 0.4;

  const double c = mlstab::find_rate_constant(ex.system, cv, phi_norm);
  REQUIRE(c > 0.013);
  REQUIRE(c < 0.020);
  REQUIRE(worst_entry(mlstab::certificate_lhs(ex.system, cv, phi_norm, c)) <=
          0.0);
  REQUIRE(worst_entry(mlstab::certificate_lhs(ex.system, cv, phi_norm,
                                              c + 0.01)) > 0.0);
}

TEST_CASE("rate search boundary is consistent with a brute-force scan") {
  const auto ex = mlstab::builtin_example("example2");
  const auto cv = mlstab::make_certificate_vector(ex.system, {0.75, 1.0});
  const double phi_norm = 0.4;
  const double c_found = mlstab::find_rate_constant(ex.system, cv, phi_norm);

  int transitions = 0;
  bool prev_feasible = true;
  for (int k = 0; k < 100; ++k) {
    const double c = std::pow(10.0, -4.0 + 4.0 * k / 99.0);
    const bool feasible =
        worst_entry(mlstab::certificate_lhs(ex.system, cv, phi_norm, c)) <=
        0.0;
    if (k == 0) {
      REQUIRE(feasible);
    } else if (feasible != prev_feasible) {
      ++transitions;
      REQUIRE_FALSE(feasible);
      // The refined rate lies between the last feasible and the first
      // infeasible scan point.
      const double c_prev = std::pow(10.0, -4.0 + 4.0 * (k - 1) / 99.0);
      REQUIRE(c_found >= c_prev);
      REQUIRE(c_found <= c);
    }
    prev_feasible = feasible;
  }
  REQUIRE(transitions == 1);
}

TEST_CASE("make_certificate assembles the mixed-degree certificate") {
  const auto ex = mlstab::builtin_example("example1");
  const auto cv = mlstab::make_certificate_vector(ex.system, *ex.suggested_v);
  const auto cert = mlstab::make_certificate(ex.system, cv, 0.75);

  REQUIRE(cert.scope == Scope::local);
  REQUIRE(cert.beta == Catch::Approx(0.61).margin(1e-15));
  REQUIRE(cert.v == cv.v);
  REQUIRE(cert.nu ==
          Catch::Approx(0.75 / mlstab::mittag_leffler(0.61, 1.0, -cert.c))
              .epsilon(1e-14));
  REQUIRE(cert.nu > 0.75);
  REQUIRE(cert.nu < 1.0);
  REQUIRE(cert.sup_i.size() == 2);
  // The second component has alpha_i = beta, so its bound is exactly 1.
  REQUIRE(cert.sup_i[1] == 1.0);
  REQUIRE(cert.sup_i[0] > 0.5);
  REQUIRE(cert.sup_i[0] < 1.05);
  REQUIRE(cert.sup_i[0] == mlstab::sup_I(0.61, 0.71, cert.c));
}

TEST_CASE("make_certificate assembles the uniform-degree certificate") {
  const auto ex = mlstab::builtin_example("example2");
  const auto cv = mlstab::make_certificate_vector(ex.system, {0.75, 1.0});
  const auto cert = mlstab::make_certificate(ex.system, cv, 0.4);

  REQUIRE(cert.scope == Scope::global);
  REQUIRE(cert.beta == Catch::Approx(0.35).margin(1e-15));
  REQUIRE(cert.nu == Catch::Approx(0.407).margin(0.01));
  // Global scope admits initial data of any size. With degree p = 2 the
  // memory term is discounted by 1/nu, so larger initial data trades a
  // larger envelope prefactor for a faster certified rate.
  const auto big = mlstab::make_certificate(ex.system, cv, 3.0);
  REQUIRE(big.scope == Scope::global);
  REQUIRE(big.c > cert.c);
  REQUIRE(big.nu > cert.nu);
}

TEST_CASE("local certificates reject initial data outside the unit ball") {
  const auto ex = mlstab::builtin_example("example1");
  const auto cv = mlstab::make_certificate_vector(ex.system, *ex.suggested_v);
  REQUIRE_THROWS_AS(mlstab::make_certificate(ex.system, cv, 1.0),
                    mlstab::ScopeError);
  REQUIRE_THROWS_AS(mlstab::make_certificate(ex.system, cv, 4.0),
                    mlstab::ScopeError);
  REQUIRE_NOTHROW(mlstab::make_certificate(ex.system, cv, 0.999));
}

TEST_CASE("degree above one requires a positive initial norm") {
  const auto ex = mlstab::builtin_example("example2");
  const auto cv = mlstab::make_certificate_vector(ex.system, {0.75, 1.0});
  REQUIRE_THROWS_AS(mlstab::find_rate_constant(ex.system, cv, 0.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::find_rate_constant(ex.system, cv, -0.5),
                    std::invalid_argument);
}

TEST_CASE("infeasible systems are reported as such") {
  // An expanding field admits no decay rate; bypass the slack validation to
  // exercise the search itself.
  mlstab::SystemSpec sys(mlstab::Orders({0.8, 0.8}),
                         mlstab::field_from_registry("identity", 2), {});
  const CertificateVector cv{{1.0, 1.0}, {1.0, 1.0}};
  REQUIRE_THROWS_AS(mlstab::find_rate_constant(sys, cv, 0.5),
                    mlstab::CertificateInfeasible);
}

TEST_CASE("rate search is deterministic") {
  const auto ex = mlstab::builtin_example("example1");
  const auto cv = mlstab::make_certificate_vector(ex.system, *ex.suggested_v);
  const double c1 = mlstab::find_rate_constant(ex.system, cv, 0.75);
  const double c2 = mlstab::find_rate_constant(ex.system, cv, 0.75);
  REQUIRE(c1 == c2);
}

TEST_CASE("envelope evaluates the certified decay curve") {
  const auto ex = mlstab::builtin_example("example1");
  const auto cv = mlstab::make_certificate_vector(ex.system, *ex.suggested_v);
  const auto cert = mlstab::make_certificate(ex.system, cv, 0.75);

  const auto at_zero = mlstab::envelope(cert, 0.0);
  REQUIRE(at_zero.size() == 2);
  REQUIRE(at_zero[0] == Catch::Approx(cert.nu * cert.v[0]).epsilon(1e-14));
  REQUIRE(at_zero[1] == Catch::Approx(cert.nu * cert.v[1]).epsilon(1e-14));

  const double t = 3.7;
  const auto at_t = mlstab::envelope(cert, t);
  const double expected =
      cert.nu *
      mlstab::mittag_leffler(cert.beta, 1.0, -cert.c * std::pow(t, cert.beta));
  REQUIRE(at_t[0] == Catch::Approx(expected * cert.v[0]).epsilon(1e-14));

  double prev = at_zero[0];
  for (double tk : {0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
    const double cur = mlstab::envelope(cert, tk)[0];
    REQUIRE(cur < prev);
    REQUIRE(cur > 0.0);
    prev = cur;
  }
  REQUIRE_THROWS_AS(mlstab::envelope(cert, -0.1), std::invalid_argument);
}
