#pragma once

// Command-line front end. Subcommands: `example` (run a bundled system with
// its reference initial histories end to end), `simulate` (solve a JSON
// config), `certify` (assumption checks + decay certificate), and `verify`
// (re-check a stored trajectory against a stored certificate).
//
// Exit codes: 0 success, 1 I/O failure, 2 verification mismatch or solver
// divergence, 3 assumption/scope refusal, 4 no certificate vector, 64 usage
// error, 65 malformed config or data file.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mlstab/assumption_checker.hpp>
#include <mlstab/io.hpp>
#include <mlstab/solver.hpp>
#include <mlstab/stability_certificate.hpp>
#include <mlstab/svg_plot.hpp>
#include <mlstab/system_model.hpp>
#include <mlstab/verifier.hpp>

namespace mlstab {
namespace detail {

inline std::uint64_t resolve_seed(std::uint64_t fallback) {
  const char* env = std::getenv("MLSTAB_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  for (const char* p = env; *p != '\0'; ++p) {
    if (std::isdigit(static_cast<unsigned char>(*p)) == 0) {
      throw ConfigError("MLSTAB_SEED must be a nonnegative integer");
    }
  }
  return std::strtoull(env, nullptr, 10);
}

inline std::filesystem::path ensure_out_dir(const std::string& out) {
  const std::filesystem::path dir(out.empty() ? "." : out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  }
  return dir;
}

inline std::vector<CheckReport> run_assumption_checks(const SystemSpec& system,
                                                      std::uint64_t seed) {
  std::vector<CheckReport> checks;
  checks.push_back(check_cooperative(system.f(), 500, seed));
  checks.push_back(check_homogeneity(system.f(), 64, seed));
  for (const auto& term : system.delays()) {
    checks.push_back(check_order_preserving(term.field, 200, seed));
    checks.push_back(check_homogeneity(term.field, 64, seed));
  }
  return checks;
}

inline bool all_passed(const std::vector<CheckReport>& checks) {
  for (const auto& check : checks) {
    if (check.verdict != Verdict::pass) return false;
  }
  return true;
}

inline std::optional<CertificateVector> resolve_certificate_vector(
    const SystemSpec& system, const std::optional<std::vector<double>>& hint,
    std::uint64_t seed) {
  if (hint) return make_certificate_vector(system, *hint);
  return find_certificate_vector(system, 40, seed).found;
}

/// Solves to the horizon, or as far as the solution stays finite: a
/// divergent run yields the partial trajectory and sets `diverged`.
inline Trajectory solve_or_partial(const SystemSpec& system,
                                   const InitialCondition& phi,
                                   const SolverConfig& config, bool& diverged) {
  diverged = false;
  try {
    return solve(system, phi, config);
  } catch (const SolverDivergence& e) {
    diverged = true;
    std::fprintf(stderr, "mlstab: %s\n", e.what());
    return e.partial();
  }
}

inline int cmd_example(const std::string& id, const std::string& out,
                       double step, double horizon) {
  if (id != "example1" && id != "example2") {
    std::fprintf(stderr, "mlstab: unknown example id '%s' (use example1 or example2)\n",
                 id.c_str());
    return 64;
  }
  const auto dir = ensure_out_dir(out);
  const std::uint64_t seed = resolve_seed(kDefaultSeed);
  const auto ex = builtin_example(id);

  const auto checks = run_assumption_checks(ex.system, seed);
  write_check_reports_json(dir / "assumptions.json", checks);
  bool ok = all_passed(checks);

  const auto cv = resolve_certificate_vector(ex.system, ex.suggested_v, seed);
  if (!cv) {
    std::fprintf(stderr, "mlstab: no feasible certificate vector found\n");
    return 4;
  }

  SolverConfig config;
  config.step = step;
  config.horizon = horizon;

  for (std::size_t k = 0; k < ex.reference_phi.size(); ++k) {
    const std::string prefix = "phi" + std::to_string(k + 1) + "_";
    const auto phi = InitialCondition::constant(ex.reference_phi[k]);
    const double phi_norm = initial_weighted_norm(phi, cv->v);

    std::optional<Certificate> cert;
    if (ex.system.uniform_degrees() || phi_norm < 1.0) {
      cert = make_certificate(ex.system, *cv, phi_norm);
      write_certificate_json(dir / (prefix + "certificate.json"), *cert);
    }

    bool diverged = false;
    const auto traj = solve_or_partial(ex.system, phi, config, diverged);
    write_trajectory_csv(dir / (prefix + "traj.csv"), traj);

    std::vector<VerificationReport> reports;
    reports.push_back(verify_positivity(traj));
    reports.push_back(verify_norm_bound(traj, cv->v, traj.phi));
    if (cert) reports.push_back(verify_envelope(traj, *cert));
    reports.push_back(detect_nonconvergence(traj));
    write_reports_json(dir / (prefix + "report.json"), reports);
    write_plot_svg(dir / (prefix + "plot.svg"), traj, cert);

    // Example 1's second history sits outside the certificate's validity
    // ball; the expected outcome there is refusal plus no decay. Every
    // other run must satisfy all three certified guarantees.
    const bool expect_nonconvergent = (id == "example1" && k == 1);
    if (expect_nonconvergent) {
      const bool nonconvergent = !reports.back().pass;
      ok = ok && nonconvergent && !cert.has_value();
    } else {
      bool envelope_pass = false;
      bool positivity_pass = false;
      bool norm_pass = false;
      for (const auto& report : reports) {
        if (report.check == "positivity") positivity_pass = report.pass;
        if (report.check == "norm_bound") norm_pass = report.pass;
        if (report.check == "envelope") envelope_pass = report.pass;
      }
      ok = ok && !diverged && positivity_pass && norm_pass &&
           cert.has_value() && envelope_pass;
    }
  }
  if (!ok) {
    std::fprintf(stderr, "mlstab: %s did not reproduce the expected verdicts\n",
                 id.c_str());
    return 2;
  }
  return 0;
}

inline int cmd_simulate(const std::string& config_path, bool plot,
                        const std::string& out) {
  const auto dir = ensure_out_dir(out);
  auto setup = parse_config_file(config_path);
  setup.seed = resolve_seed(setup.seed);

  std::optional<InitialCondition> phi = setup.phi;
  if (!phi && setup.example_id) {
    phi = InitialCondition::constant(
        builtin_example(*setup.example_id).reference_phi.front());
  }
  if (!phi) {
    throw ConfigError("config: phi is required to simulate a custom system");
  }

  bool diverged = false;
  const auto traj = solve_or_partial(setup.system, *phi, setup.solver, diverged);
  write_trajectory_csv(dir / "traj.csv", traj);
  if (plot) write_plot_svg(dir / "plot.svg", traj);
  for (const auto& warning : traj.warnings) {
    std::fprintf(stderr, "mlstab: warning: %s\n", warning.c_str());
  }
  return diverged ? 2 : 0;
}

inline int cmd_certify(const std::string& config_path,
                       const std::optional<double>& phi_norm_flag,
                       const std::string& out) {
  const auto dir = ensure_out_dir(out);
  auto setup = parse_config_file(config_path);
  setup.seed = resolve_seed(setup.seed);

  const auto checks = run_assumption_checks(setup.system, setup.seed);
  write_check_reports_json(dir / "checks.json", checks);
  if (!all_passed(checks)) {
    std::fprintf(stderr, "mlstab: assumption checks failed; see checks.json\n");
    return 3;
  }

  const auto cv =
      resolve_certificate_vector(setup.system, setup.suggested_v, setup.seed);
  if (!cv) {
    std::fprintf(stderr, "mlstab: no feasible certificate vector found\n");
    return 4;
  }

  double phi_norm = 0.0;
  if (phi_norm_flag) {
    if (!(*phi_norm_flag >= 0.0)) {
      std::fprintf(stderr, "mlstab: --phi-norm must be >= 0\n");
      return 64;
    }
    phi_norm = *phi_norm_flag;
  } else if (setup.phi) {
    phi_norm = initial_weighted_norm(*setup.phi, cv->v);
  } else if (setup.system.uniform_degrees()) {
    phi_norm = 1.0;
  } else {
    std::fprintf(stderr,
                 "mlstab: a local certificate needs --phi-norm or a config phi\n");
    return 64;
  }

  const auto cert = make_certificate(setup.system, *cv, phi_norm);
  write_certificate_json(dir / "certificate.json", cert);
  std::printf("certificate: scope=%s beta=%.6g c=%.6g nu=%.6g\n",
              to_string(cert.scope), cert.beta, cert.c, cert.nu);
  return 0;
}

inline int cmd_verify(const std::string& traj_path, const std::string& cert_path,
                      const std::string& out) {
  const auto dir = ensure_out_dir(out);
  const auto traj = read_trajectory_csv(traj_path);
  const auto cert = read_certificate_json(cert_path);
  if (static_cast<int>(cert.v.size()) != traj.dim) {
    throw ConfigError("trajectory dimension " + std::to_string(traj.dim) +
                      " does not match certificate dimension " +
                      std::to_string(cert.v.size()));
  }

  std::vector<VerificationReport> reports;
  reports.push_back(verify_positivity(traj));
  reports.push_back(verify_norm_bound(traj, cert.v, traj.phi));
  reports.push_back(verify_envelope(traj, cert));
  reports.push_back(detect_nonconvergence(traj));
  write_reports_json(dir / "report.json", reports);

  bool ok = true;
  for (const auto& report : reports) {
    std::printf("%-12s %s (worst %.6g at t=%.6g)\n", report.check.c_str(),
                report.pass ? "pass" : "FAIL", report.worst_violation,
                report.at_t);
    if (report.check != "convergence") ok = ok && report.pass;
  }
  return ok ? 0 : 2;
}

}  // namespace detail

inline int run_cli(int argc, char** argv) {
  CLI::App app{"Mittag-Leffler decay certificates for delayed fractional positive systems"};
  app.require_subcommand(1);

  std::string example_id;
  std::string example_out = ".";
  double example_step = 1e-3;
  double example_horizon = 20.0;
  auto* example = app.add_subcommand(
      "example", "Run a bundled example system end to end");
  example->add_option("id", example_id, "example1 or example2")->required();
  example->add_option("--out", example_out, "output directory");
  example->add_option("--step", example_step, "solver step size");
  example->add_option("--horizon", example_horizon, "simulation horizon");

  std::string sim_config;
  std::string sim_out = ".";
  bool sim_plot = false;
  auto* simulate = app.add_subcommand("simulate", "Solve a configured system");
  simulate->add_option("--config", sim_config, "JSON config path")->required();
  simulate->add_flag("--plot", sim_plot, "also write plot.svg");
  simulate->add_option("--out", sim_out, "output directory");

  std::string cert_config;
  std::string cert_out = ".";
  double cert_phi_norm = 0.0;
  auto* certify = app.add_subcommand(
      "certify", "Check assumptions and compute a decay certificate");
  certify->add_option("--config", cert_config, "JSON config path")->required();
  auto* phi_norm_opt = certify->add_option(
      "--phi-norm", cert_phi_norm, "weighted norm of the initial history");
  certify->add_option("--out", cert_out, "output directory");

  std::string verify_traj;
  std::string verify_cert;
  std::string verify_out = ".";
  auto* verify = app.add_subcommand(
      "verify", "Re-check a stored trajectory against a certificate");
  verify->add_option("--traj", verify_traj, "trajectory CSV path")->required();
  verify->add_option("--cert", verify_cert, "certificate JSON path")->required();
  verify->add_option("--out", verify_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  try {
    if (example->parsed()) {
      return detail::cmd_example(example_id, example_out, example_step,
                                 example_horizon);
    }
    if (simulate->parsed()) {
      return detail::cmd_simulate(sim_config, sim_plot, sim_out);
    }
    if (certify->parsed()) {
      std::optional<double> flag;
      if (phi_norm_opt->count() > 0) flag = cert_phi_norm;
      return detail::cmd_certify(cert_config, flag, cert_out);
    }
    if (verify->parsed()) {
      return detail::cmd_verify(verify_traj, verify_cert, verify_out);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "mlstab: %s\n", e.what());
    return 65;
  } catch (const ScopeError& e) {
    std::fprintf(stderr, "mlstab: %s\n", e.what());
    return 3;
  } catch (const CertificateInfeasible& e) {
    std::fprintf(stderr, "mlstab: %s\n", e.what());
    return 4;
  } catch (const IoError& e) {
    std::fprintf(stderr, "mlstab: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mlstab: %s\n", e.what());
    return 1;
  }
  return 64;
}

}  // namespace mlstab
