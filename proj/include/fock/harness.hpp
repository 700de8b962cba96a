#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fock/bergman.hpp"
#include "fock/io.hpp"
#include "fock/weights.hpp"

namespace fock::harness {

using io::json;
namespace fs = std::filesystem;

/// Raised for suite failures; the message names the suite.
class SuiteError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  json weight;  ///< descriptor as read
  weights::WeightSpec spec;
  double L = 6.0;
  std::size_t n = 129;
  std::size_t degree = 40;
  bergman::QuadMode mode = bergman::QuadMode::radial;
  std::size_t quad_nodes = 2048;
  std::map<std::string, double> tolerances;  ///< overrides of default_tolerances()
  std::map<std::string, double> params;      ///< overrides of default_params()
  std::vector<std::string> suites;  ///< every suite when the field is absent
  std::string output = "fock_out";
  std::uint64_t seed = 1;

  double tol(const std::string& name) const;
  double param(const std::string& name) const;
  bergman::ModelOptions model_options() const;
};

const std::vector<std::string>& suite_names();
const std::map<std::string, double>& default_tolerances();
const std::map<std::string, double>& default_params();

/// Validates against the schema; ConfigError names the offending field.
RunConfig parse_config(const json& j, const fs::path& base_dir = {});
RunConfig load_config(const fs::path& path);
/// FOCK_SEED replaces the seed when set.
void apply_environment(RunConfig& config);

/// Canonical serialization (sorted keys, defaults filled in).
json to_json(const RunConfig& config);
/// SHA-256 of the compact canonical serialization, lowercase hex.
std::string config_hash(const RunConfig& config);
std::string sha256_hex(std::string_view data);

struct Check {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;

  static Check make(std::string name, double value, double lower, double upper);
  /// lower <= value <= upper with NaN failing.
  bool recompute() const;
};

struct SuiteReport {
  std::string suite;
  json weight;
  std::vector<Check> checks;
  std::vector<io::Table> tables;
  std::map<std::string, json> artifacts;  ///< DecayFit, SolveReport, ... by name
  std::vector<std::pair<std::string, double>> timings;  ///< seconds per phase
  std::string config_hash;

  bool passed() const;
  const Check& check(std::string_view name) const;
  const io::Table& table(std::string_view name) const;
};

/// Runs one suite. Throws ConfigError for unknown suites and SuiteError
/// (with the suite name and the module message) for module errors.
SuiteReport run_suite(const RunConfig& config, std::string_view suite);

/// Runs the listed suites in order, or concurrently with `parallel`.
std::vector<SuiteReport> run_suites(const RunConfig& config, const std::vector<std::string>& suites,
                                    bool parallel);

/// Report JSON without timings (byte-identical across reruns).
json to_json(const SuiteReport& report);

/// Writes DIR/<suite>/report.json, DIR/<suite>/timings.json, one CSV per
/// table and one JSON per artifact. Returns the suite directory.
fs::path write_report(const SuiteReport& report, const fs::path& dir);

/// Writes DIR/<suite>/<table>.csv; throws DomainError for a missing table.
fs::path emit_plot_data(const SuiteReport& report, std::string_view table, const fs::path& dir);

/// rho(z) from the sampled weight on [-L, L]^2 with n nodes per side;
/// L <= 0 picks max(6, 2|z| + 2).
double rho_at(const weights::WeightSpec& spec, cplx z, double L = 0.0, std::size_t n = 257);

/// Kernel table rows for the given pairs on the config's weight and model.
io::Table kernel_table(const RunConfig& config, const std::vector<std::pair<cplx, cplx>>& pairs);

}  // namespace fock::harness
