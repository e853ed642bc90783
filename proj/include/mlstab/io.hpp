#pragma once

// File formats: trajectory CSV, certificate/report/check JSON, and the
// versioned JSON run configuration. All writers go through an atomic
// temp-plus-rename so readers never observe a half-written file.

#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <mlstab/assumption_checker.hpp>
#include <mlstab/solver.hpp>
#include <mlstab/stability_certificate.hpp>
#include <mlstab/system_model.hpp>
#include <mlstab/verifier.hpp>

namespace mlstab {

/// Malformed configuration or unparseable data file (CLI exit 65).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure: cannot open, write, or rename (CLI exit 1).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() +
                  ": " + ec.message());
  }
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// CSV layout: header "t,w_1,...,w_d", then history rows for s in [-r, 0)
/// at the phi sampling grid, then one row per solution grid point.
inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const Trajectory& traj) {
  std::string out = "t";
  for (int i = 1; i <= traj.dim; ++i) out += ",w_" + std::to_string(i);
  out += "\n";
  const auto append_row = [&](double t, const std::vector<double>& w) {
    out += detail::format_double(t);
    for (double wi : w) {
      out += ',';
      out += detail::format_double(wi);
    }
    out += '\n';
  };
  if (traj.r > 0.0) {
    switch (traj.phi.kind()) {
      case InitialCondition::Kind::constant:
        append_row(-traj.r, traj.phi.constant_values());
        break;
      case InitialCondition::Kind::samples:
        for (std::size_t k = 0; k < traj.phi.sample_times().size(); ++k) {
          if (traj.phi.sample_times()[k] < 0.0) {
            append_row(traj.phi.sample_times()[k], traj.phi.sample_values()[k]);
          }
        }
        break;
      case InitialCondition::Kind::function:
        for (int k = 0; k < 256; ++k) {
          const double s = -traj.r + traj.r * k / 256.0;
          append_row(s, traj.phi(s));
        }
        break;
    }
  }
  for (std::size_t n = 0; n < traj.rows(); ++n) {
    append_row(traj.times[n], traj.row(n));
  }
  detail::atomic_write(path, out);
}

/// Reads a trajectory CSV back, rebuilding the initial history from the
/// negative-time rows (constant when there are none).
[[nodiscard]] inline Trajectory read_trajectory_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("trajectory csv: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int dim = 0;
  {
    std::stringstream hdr(line);
    std::string tok;
    if (!std::getline(hdr, tok, ',') || tok != "t") {
      throw ConfigError("trajectory csv: header must start with 't'");
    }
    while (std::getline(hdr, tok, ',')) {
      ++dim;
      if (tok != "w_" + std::to_string(dim)) {
        throw ConfigError("trajectory csv: unexpected column '" + tok + "'");
      }
    }
  }
  if (dim < 1) throw ConfigError("trajectory csv: no state columns");

  std::vector<double> hist_times;
  std::vector<std::vector<double>> hist_values;
  Trajectory traj;
  traj.dim = dim;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string tok;
    std::vector<double> values;
    while (std::getline(row, tok, ',')) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ConfigError("trajectory csv: bad number at line " +
                          std::to_string(lineno));
      }
      if (used != tok.size()) {
        throw ConfigError("trajectory csv: bad number at line " +
                          std::to_string(lineno));
      }
      values.push_back(x);
    }
    if (static_cast<int>(values.size()) != dim + 1) {
      throw ConfigError("trajectory csv: wrong column count at line " +
                        std::to_string(lineno));
    }
    const double t = values.front();
    values.erase(values.begin());
    if (t < 0.0) {
      hist_times.push_back(t);
      hist_values.push_back(std::move(values));
    } else {
      traj.times.push_back(t);
      traj.states.insert(traj.states.end(), values.begin(), values.end());
    }
  }
  if (traj.times.empty()) {
    throw ConfigError("trajectory csv: no rows at t >= 0");
  }
  traj.step = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 1.0;
  if (hist_times.empty()) {
    traj.r = 0.0;
    traj.phi = InitialCondition::constant(traj.row(0));
  } else {
    traj.r = -hist_times.front();
    hist_times.push_back(0.0);
    hist_values.push_back(traj.row(0));
    try {
      traj.phi = InitialCondition::from_samples(std::move(hist_times),
                                                std::move(hist_values));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("trajectory csv: bad history rows: ") +
                        e.what());
    }
  }
  return traj;
}

/// Certificate JSON carries exactly the six fields that define the bound.
inline void write_certificate_json(const std::filesystem::path& path,
                                   const Certificate& cert) {
  nlohmann::ordered_json doc;
  doc["v"] = cert.v;
  doc["beta"] = cert.beta;
  doc["c"] = cert.c;
  doc["nu"] = cert.nu;
  doc["scope"] = to_string(cert.scope);
  doc["sup_I"] = cert.sup_i;
  detail::atomic_write(path, doc.dump(2) + "\n");
}

[[nodiscard]] inline Certificate read_certificate_json(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("certificate json: " + std::string(e.what()));
  }
  if (!doc.is_object() || doc.size() != 6 || !doc.contains("v") ||
      !doc.contains("beta") || !doc.contains("c") || !doc.contains("nu") ||
      !doc.contains("scope") || !doc.contains("sup_I")) {
    throw ConfigError(
        "certificate json: expected exactly the fields "
        "v, beta, c, nu, scope, sup_I");
  }
  Certificate cert;
  try {
    cert.v = doc["v"].get<std::vector<double>>();
    cert.beta = doc["beta"].get<double>();
    cert.c = doc["c"].get<double>();
    cert.nu = doc["nu"].get<double>();
    cert.sup_i = doc["sup_I"].get<std::vector<double>>();
    const std::string scope = doc["scope"].get<std::string>();
    if (scope == "global") {
      cert.scope = Scope::global;
    } else if (scope == "local") {
      cert.scope = Scope::local;
    } else {
      throw ConfigError("certificate json: scope must be global or local");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("certificate json: " + std::string(e.what()));
  }
  if (cert.v.empty() || cert.v.size() != cert.sup_i.size()) {
    throw ConfigError("certificate json: v and sup_I sizes disagree");
  }
  for (double vi : cert.v) {
    if (!(vi > 0.0)) throw ConfigError("certificate json: v must be positive");
  }
  if (!(cert.beta > 0.0) || cert.beta > 1.0 || !(cert.c > 0.0) ||
      !(cert.nu >= 0.0)) {
    throw ConfigError("certificate json: parameters out of range");
  }
  return cert;
}

inline void write_reports_json(const std::filesystem::path& path,
                               const std::vector<VerificationReport>& reports) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& report : reports) {
    nlohmann::ordered_json entry;
    entry["check"] = report.check;
    entry["pass"] = report.pass;
    entry["worst_violation"] = report.worst_violation;
    entry["at_t"] = report.at_t;
    doc.push_back(std::move(entry));
  }
  detail::atomic_write(path, doc.dump(2) + "\n");
}

[[nodiscard]] inline std::vector<VerificationReport> read_reports_json(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("report json: " + std::string(e.what()));
  }
  if (!doc.is_array()) throw ConfigError("report json: expected an array");
  std::vector<VerificationReport> reports;
  for (const auto& entry : doc) {
    VerificationReport report;
    try {
      report.check = entry.at("check").get<std::string>();
      report.pass = entry.at("pass").get<bool>();
      report.worst_violation = entry.at("worst_violation").get<double>();
      report.at_t = entry.at("at_t").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("report json: " + std::string(e.what()));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

inline void write_check_reports_json(const std::filesystem::path& path,
                                     const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& report : reports) {
    nlohmann::ordered_json entry;
    entry["assumption"] = report.assumption;
    entry["verdict"] = to_string(report.verdict);
    entry["sample_count"] = report.sample_count;
    entry["rng_seed"] = report.rng_seed;
    auto witnesses = nlohmann::ordered_json::array();
    for (const auto& witness : report.witnesses) {
      witnesses.push_back({{"point", witness.point}, {"detail", witness.detail}});
    }
    entry["witnesses"] = std::move(witnesses);
    auto metrics = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.metrics) metrics[key] = value;
    entry["metrics"] = std::move(metrics);
    doc.push_back(std::move(entry));
  }
  detail::atomic_write(path, doc.dump(2) + "\n");
}

/// A parsed run configuration: the system plus optional initial data and
/// solver settings. `example_id` is set when the config names a built-in,
/// in which case `suggested_v` carries its known certificate vector.
struct RunSetup {
  SystemSpec system;
  std::optional<InitialCondition> phi;
  SolverConfig solver;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> example_id;
  std::optional<std::vector<double>> suggested_v;
};

namespace detail {

inline InitialCondition parse_phi(const nlohmann::json& node, int dim) {
  if (!node.is_object() || !node.contains("kind")) {
    throw ConfigError("config: phi must be an object with a kind");
  }
  try {
    const std::string kind = node.at("kind").get<std::string>();
    if (kind == "constant") {
      auto values = node.at("values").get<std::vector<double>>();
      if (static_cast<int>(values.size()) != dim) {
        throw ConfigError("config: phi dimension mismatch");
      }
      return InitialCondition::constant(std::move(values));
    }
    if (kind == "samples") {
      auto times = node.at("times").get<std::vector<double>>();
      auto values = node.at("values").get<std::vector<std::vector<double>>>();
      for (const auto& row : values) {
        if (static_cast<int>(row.size()) != dim) {
          throw ConfigError("config: phi dimension mismatch");
        }
      }
      return InitialCondition::from_samples(std::move(times),
                                            std::move(values));
    }
    throw ConfigError("config: phi kind must be constant or samples");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: phi: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config: phi: " + std::string(e.what()));
  }
}

inline std::function<double(double)> parse_tau(const std::string& kind,
                                               const nlohmann::json& params) {
  if (kind == "constant") {
    if (!params.is_object() || !params.contains("value")) {
      throw ConfigError("config: constant delay needs params.value");
    }
    return make_constant_tau(params.at("value").get<double>());
  }
  if (kind == "example1") return make_example1_tau();
  if (kind == "example2") return make_example2_tau();
  throw ConfigError("config: unknown delay kind '" + kind + "'");
}

}  // namespace detail

/// Parses a schema-1 configuration document. Either { "example": id } with
/// optional overrides, or a full system description over the registered
/// vector fields.
[[nodiscard]] inline RunSetup parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  if (doc.contains("schema") && doc.at("schema") != 1) {
    throw ConfigError("config: unsupported schema version");
  }

  std::optional<RunSetup> setup;
  try {
    if (doc.contains("example")) {
      const auto id = doc.at("example").get<std::string>();
      auto builtin = builtin_example(id);
      setup.emplace(RunSetup{std::move(builtin.system), std::nullopt,
                             SolverConfig{}, kDefaultSeed, id,
                             std::move(builtin.suggested_v)});
    } else {
      if (!doc.contains("orders") || !doc.contains("f")) {
        throw ConfigError("config: need either example or orders plus f");
      }
      Orders orders(doc.at("orders").get<std::vector<double>>());
      const int dim = orders.dim();
      auto f = field_from_registry(doc.at("f").get<std::string>(), dim);
      std::vector<DelayTerm> delays;
      if (doc.contains("delays")) {
        for (const auto& node : doc.at("delays")) {
          auto field =
              field_from_registry(node.at("field").get<std::string>(), dim);
          auto tau = detail::parse_tau(
              node.at("kind").get<std::string>(),
              node.contains("params") ? node.at("params") : nlohmann::json());
          const double r = node.at("r").get<double>();
          delays.push_back(DelayTerm{std::move(field), std::move(tau), r});
        }
      }
      setup.emplace(RunSetup{
          SystemSpec(std::move(orders), std::move(f), std::move(delays)),
          std::nullopt, SolverConfig{}, kDefaultSeed, std::nullopt,
          std::nullopt});
    }

    if (doc.contains("phi")) {
      setup->phi = detail::parse_phi(doc.at("phi"), setup->system.dim());
    }
    if (doc.contains("T")) {
      setup->solver.horizon = doc.at("T").get<double>();
    }
    if (doc.contains("step")) {
      setup->solver.step = doc.at("step").get<double>();
    }
    if (doc.contains("seed")) {
      setup->seed = doc.at("seed").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  if (!(setup->solver.horizon > 0.0)) {
    throw ConfigError("config: T must be > 0");
  }
  if (!(setup->solver.step > 0.0) ||
      setup->solver.step > setup->solver.horizon) {
    throw ConfigError("config: step must be in (0, T]");
  }
  return std::move(*setup);
}

[[nodiscard]] inline RunSetup parse_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(doc);
}

}  // namespace mlstab
