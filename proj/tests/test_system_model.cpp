#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <mlstab/system_model.hpp>

namespace {

std::function<std::vector<double>(double)> constant_history(
    std::vector<double> value) {
  return [value = std::move(value)](double) { return value; };
}

}  // namespace

TEST_CASE("orders accept (0,1] only", "[model]") {
  REQUIRE_NOTHROW(mlstab::Orders({1.0, 0.5}));
  REQUIRE_THROWS_AS(mlstab::Orders({0.0, 0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::Orders({0.5, 1.2}), std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::Orders({-0.3}), std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::Orders({}), std::invalid_argument);
  REQUIRE_THROWS_WITH(mlstab::Orders({1.5}),
                      Catch::Matchers::ContainsSubstring("order constraint"));
  REQUIRE(mlstab::Orders({0.71, 0.61}).min_order() == 0.61);
}

TEST_CASE("builtin example1 structure and field values", "[model]") {
  const auto ex = mlstab::builtin_example("example1");
  const auto& sys = ex.system;
  REQUIRE(sys.dim() == 2);
  REQUIRE(sys.orders().values() == std::vector<double>{0.71, 0.61});
  REQUIRE(sys.degree_p() == 1.0);
  REQUIRE(sys.delays().size() == 1);
  REQUIRE(sys.delays()[0].field.declared_degree() == 2.0);
  REQUIRE(sys.r() == 1.0);
  REQUIRE_FALSE(sys.uniform_degrees());
  REQUIRE(ex.suggested_v.has_value());
  REQUIRE(*ex.suggested_v == std::vector<double>{0.3, 0.2});
  REQUIRE(ex.reference_phi.size() == 2);

  const std::vector<double> v{0.3, 0.2};
  const auto f = sys.f()(v);
  REQUIRE(f[0] == Catch::Approx(-0.6).margin(1e-15));
  REQUIRE(f[1] == Catch::Approx(-0.3).margin(1e-15));
  const auto g = sys.delays()[0].field(v);
  REQUIRE(g[0] == Catch::Approx(0.09 + 3.0 * std::sqrt(0.0054)).epsilon(1e-15));
  REQUIRE(g[1] == Catch::Approx(0.14).margin(1e-15));
  // The suggested certificate vector leaves strictly negative slack.
  REQUIRE(f[0] + g[0] < -0.28);
  REQUIRE(f[1] + g[1] == Catch::Approx(-0.16).margin(1e-12));
}

TEST_CASE("builtin example2 structure and field values", "[model]") {
  const auto ex = mlstab::builtin_example("example2");
  const auto& sys = ex.system;
  REQUIRE(sys.orders().values() == std::vector<double>{0.95, 0.7});
  REQUIRE(sys.degree_p() == 2.0);
  REQUIRE(sys.uniform_degrees());
  REQUIRE_FALSE(ex.suggested_v.has_value());

  const auto rhs = sys.rhs(1.0, {1.0, 1.0}, constant_history({1.0, 1.0}));
  REQUIRE(rhs[0] == -3.0);
  REQUIRE(rhs[1] == Catch::Approx(-7.0 + 3.0 * std::sqrt(8.0)).epsilon(1e-15));

  // v = (0.75, 1) keeps f + g strictly negative; every quantity involved is
  // exactly representable, so the slack comes out exact in doubles.
  const std::vector<double> v{0.75, 1.0};
  const auto f = sys.f()(v);
  const auto g = sys.delays()[0].field(v);
  REQUIRE(f[0] + g[0] == -0.25);
  REQUIRE(f[1] + g[1] == -0.3125);

  REQUIRE_THROWS_AS(mlstab::builtin_example("example9"), std::invalid_argument);
}

TEST_CASE("rhs queries the history at the lagged time", "[model]") {
  const auto ex = mlstab::builtin_example("example1");
  std::vector<double> queried;
  const auto history = [&queried](double s) {
    queried.push_back(s);
    return std::vector<double>{0.1, 0.1};
  };
  (void)ex.system.rhs(0.0, {0.1, 0.1}, history);
  REQUIRE(queried.size() == 1);
  REQUIRE(queried[0] == Catch::Approx(-2.0 / 3.0).epsilon(1e-15));
  REQUIRE_THROWS_AS(ex.system.rhs(-0.5, {0.1, 0.1}, history),
                    std::invalid_argument);
}

TEST_CASE("sqrt radicand clamping reports a warning", "[model]") {
  const auto g1 = mlstab::field_from_registry("example1_g", 2);
  mlstab::WarningSink sink;
  const auto value = g1({-0.1, 0.2}, &sink);
  REQUIRE(value[0] == Catch::Approx(0.01).margin(1e-15));
  REQUIRE(sink.total() == 1);
  REQUIRE_FALSE(sink.messages().empty());

  const auto g2 = mlstab::field_from_registry("example2_g", 2);
  mlstab::WarningSink quiet;
  (void)g2({-1.0, -2.0}, &quiet);
  REQUIRE(quiet.total() == 0);
}

TEST_CASE("system construction validates its pieces", "[model]") {
  auto f2 = mlstab::field_from_registry("example1_g", 2);
  auto g1 = mlstab::field_from_registry("negative_identity", 2);
  REQUIRE_THROWS_WITH(
      mlstab::SystemSpec(mlstab::Orders({0.5, 0.5}), f2,
                         {mlstab::DelayTerm{g1, mlstab::make_constant_tau(0.5),
                                            0.5}}),
      Catch::Matchers::ContainsSubstring("q_j >= p"));
  REQUIRE_THROWS_AS(
      mlstab::SystemSpec(mlstab::Orders({0.5}),
                         mlstab::field_from_registry("zero", 2), {}),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      mlstab::SystemSpec(mlstab::Orders({0.5, 0.5}), g1,
                         {mlstab::DelayTerm{f2, mlstab::make_constant_tau(0.5),
                                            0.0}}),
      std::invalid_argument);
  const mlstab::SystemSpec no_delay(mlstab::Orders({0.5}),
                                    mlstab::field_from_registry("zero", 1), {});
  REQUIRE(no_delay.r() == 0.0);
  REQUIRE(no_delay.uniform_degrees());
}

TEST_CASE("weighted norm", "[model]") {
  REQUIRE(mlstab::weighted_norm({0.3, -0.4}, {0.5, 1.0}) == 0.6);
  REQUIRE(mlstab::weighted_norm({0.0, 0.0}, {1.0, 2.0}) == 0.0);
  REQUIRE_THROWS_AS(mlstab::weighted_norm({1.0}, {1.0, 1.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::weighted_norm({1.0, 1.0}, {1.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("finite difference jacobian", "[model]") {
  const auto f1 = mlstab::field_from_registry("example1_f", 2);
  const auto jac_lin = mlstab::jacobian_fd(f1, {0.7, 0.4}, 1e-4);
  REQUIRE(jac_lin[0][0] == Catch::Approx(-4.0).margin(1e-9));
  REQUIRE(jac_lin[0][1] == Catch::Approx(3.0).margin(1e-9));
  REQUIRE(jac_lin[1][0] == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(jac_lin[1][1] == Catch::Approx(-3.0).margin(1e-9));

  const auto f2 = mlstab::field_from_registry("example2_f", 2);
  const auto jac_quad = mlstab::jacobian_fd(f2, {1.0, 1.0}, 1e-5);
  REQUIRE(jac_quad[0][0] == Catch::Approx(-16.0).margin(1e-5));
  REQUIRE(jac_quad[0][1] == Catch::Approx(2.0).margin(1e-5));
  REQUIRE(jac_quad[1][0] == Catch::Approx(4.0).margin(1e-5));
  REQUIRE(jac_quad[1][1] == Catch::Approx(-18.0).margin(1e-5));

  REQUIRE_THROWS_AS(mlstab::jacobian_fd(f1, {1.0, 1.0}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("constant history", "[model]") {
  const auto phi = mlstab::InitialCondition::constant({0.2, 0.15});
  REQUIRE(phi.dim() == 2);
  REQUIRE(std::isinf(phi.span()));
  REQUIRE(phi(-3.0) == std::vector<double>{0.2, 0.15});
  REQUIRE(phi(0.0) == std::vector<double>{0.2, 0.15});
  REQUIRE(phi(1e-10) == std::vector<double>{0.2, 0.15});
  REQUIRE_THROWS_AS(phi(0.5), std::out_of_range);
  REQUIRE_THROWS_AS(mlstab::InitialCondition::constant({0.2, -0.1}),
                    std::invalid_argument);
}

TEST_CASE("sampled history interpolates linearly", "[model]") {
  const auto phi = mlstab::InitialCondition::from_samples(
      {-1.0, -0.5, 0.0}, {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}});
  REQUIRE(phi.span() == 1.0);
  REQUIRE(phi(-0.75)[0] == Catch::Approx(0.75));
  REQUIRE(phi(-0.75)[1] == Catch::Approx(0.25));
  REQUIRE(phi(-1.0) == std::vector<double>{1.0, 0.0});
  REQUIRE(phi(0.0) == std::vector<double>{0.0, 1.0});
  REQUIRE_THROWS_AS(phi(-1.5), std::out_of_range);

  REQUIRE_THROWS_AS(mlstab::InitialCondition::from_samples(
                        {-1.0, -0.5}, {{1.0}, {-0.5}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::InitialCondition::from_samples(
                        {-1.0, -0.5, -0.1}, {{1.0}, {0.5}, {0.2}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mlstab::InitialCondition::from_samples(
                        {-1.0, -1.0, 0.0}, {{1.0}, {0.5}, {0.2}}),
                    std::invalid_argument);
}

TEST_CASE("functional history validates nonnegativity on a grid", "[model]") {
  const auto phi = mlstab::InitialCondition::from_function(
      1, 1.0, [](double s) { return std::vector<double>{1.0 + s * 0.5}; });
  REQUIRE(phi(-1.0)[0] == Catch::Approx(0.5));
  REQUIRE_THROWS_AS(
      mlstab::InitialCondition::from_function(
          1, 1.0,
          [](double s) {
            return std::vector<double>{s + 0.25};
          }),
      std::invalid_argument);
}

TEST_CASE("field registry lookups", "[model]") {
  REQUIRE_THROWS_WITH(mlstab::field_from_registry("no_such_field", 2),
                      Catch::Matchers::ContainsSubstring("no_such_field"));
  REQUIRE_THROWS_AS(mlstab::field_from_registry("example1_f", 3),
                    std::invalid_argument);
  const auto zero = mlstab::field_from_registry("zero", 3);
  REQUIRE(zero({1.0, 2.0, 3.0}) == std::vector<double>{0.0, 0.0, 0.0});
  const auto neg = mlstab::field_from_registry("negative_identity", 2);
  REQUIRE(neg({1.0, -2.0}) == std::vector<double>{-1.0, 2.0});
  const auto ident = mlstab::field_from_registry("identity", 2);
  REQUIRE(ident({0.5, 0.25}) == std::vector<double>{0.5, 0.25});
  REQUIRE_THROWS_AS(neg({1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("lag functions", "[model]") {
  const auto tau1 = mlstab::make_example1_tau();
  REQUIRE(tau1(0.0) == Catch::Approx(2.0 / 3.0));
  for (double t = 0.0; t < 12.0; t += 0.1) {
    REQUIRE(tau1(t) > 0.0);
    REQUIRE(tau1(t) <= 1.0);
  }
  const auto tau2 = mlstab::make_example2_tau();
  REQUIRE(tau2(0.0) == Catch::Approx(1.0));
  for (double t = 0.0; t < 12.0; t += 0.1) {
    REQUIRE(tau2(t) > 0.5);
    REQUIRE(tau2(t) <= 1.0);
  }
  const auto fixed = mlstab::make_constant_tau(0.5);
  REQUIRE(fixed(7.0) == 0.5);
  REQUIRE_THROWS_AS(mlstab::make_constant_tau(-0.5), std::invalid_argument);
}
