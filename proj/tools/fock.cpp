#include <algorithm>
#include <future>
#include <mutex>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fock/harness.hpp"
#include "fock/io.hpp"

namespace {

using fock::harness::json;

int cmd_run(const std::string& config_path, const std::vector<std::string>& only, const std::string& out_flag,
            bool parallel) {
  auto config = fock::harness::load_config(config_path);
  fock::harness::apply_environment(config);
  const auto suites = only.empty() ? config.suites : only;
  for (const auto& s : suites) {
    const auto& names = fock::harness::suite_names();
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      throw fock::ConfigError("unknown suite '" + s + "'");
    }
  }
  const std::filesystem::path out = out_flag.empty() ? config.output : out_flag;
  std::filesystem::create_directories(out);
  fock::io::write_json(fock::harness::to_json(config), out / "config.json");

  bool ok = true;
  json summary = {{"config_hash", fock::harness::config_hash(config)}, {"suites", json::array()}};
  std::vector<std::pair<std::string, std::string>> failures;
  std::vector<fock::harness::SuiteReport> reports;
  if (parallel) {
    std::vector<std::future<void>> jobs;
    std::mutex m;
    for (const auto& s : suites) {
      jobs.push_back(std::async(std::launch::async, [&, s] {
        try {
          auto r = fock::harness::run_suite(config, s);
          std::lock_guard lock(m);
          reports.push_back(std::move(r));
        } catch (const fock::Error& e) {
          std::lock_guard lock(m);
          failures.emplace_back(s, e.what());
        }
      }));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (const auto& s : suites) {
      try {
        reports.push_back(fock::harness::run_suite(config, s));
      } catch (const fock::Error& e) {
        failures.emplace_back(s, e.what());
      }
    }
  }
  for (const auto& s : suites) {
    for (const auto& r : reports) {
      if (r.suite != s) continue;
      fock::harness::write_report(r, out);
      std::size_t passed = 0;
      for (const auto& c : r.checks) passed += c.pass ? 1 : 0;
      std::cout << (r.passed() ? "PASS " : "FAIL ") << s << " (" << passed << "/" << r.checks.size() << " checks)\n";
      for (const auto& c : r.checks) {
        if (!c.pass) {
          std::cout << "  failed " << c.name << ": " << c.value << " not in [" << c.lower << ", " << c.upper << "]\n";
        }
      }
      ok = ok && r.passed();
      summary["suites"].push_back({{"suite", s}, {"passed", r.passed()}});
    }
    for (const auto& [name, msg] : failures) {
      if (name != s) continue;
      std::cout << "ERROR " << s << ": " << msg << "\n";
      ok = false;
      summary["suites"].push_back({{"suite", s}, {"passed", false}, {"error", msg}});
    }
  }
  summary["passed"] = ok;
  fock::io::write_json(summary, out / "summary.json");
  return ok ? 0 : 1;
}

int cmd_rho(const std::string& weight_text, const std::string& point_text, double L, std::size_t n) {
  json wj;
  try {
    wj = json::parse(weight_text);
  } catch (const json::parse_error& e) {
    throw fock::ConfigError(std::string("weight: ") + e.what());
  }
  const auto spec = fock::io::weight_from_json(wj);
  const fock::cplx z = fock::io::parse_point(point_text);
  const double r = fock::harness::rho_at(spec, z, L, n);
  json out = {{"weight", wj}, {"point", {z.real(), z.imag()}}, {"rho", r}};
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_kernel(const std::string& config_path, const std::string& pairs_path, const std::string& out_path) {
  auto config = fock::harness::load_config(config_path);
  fock::harness::apply_environment(config);
  const auto pairs = fock::io::read_pairs(pairs_path);
  const auto table = fock::harness::kernel_table(config, pairs);
  if (out_path.empty()) {
    fock::io::write_csv(table, std::cout);
  } else {
    fock::io::write_csv(table, out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Fock space numerical laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> suites;
  bool parallel = false;
  auto* run = app.add_subcommand("run", "Run check suites and write reports");
  run->add_option("--config", config_path, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--suite", suites, "Suite to run (repeatable; default: the config list)");
  run->add_option("--out", out_dir, "Output directory (default: config output)");
  run->add_flag("--parallel", parallel, "Run suites concurrently");

  std::string weight_text, point_text;
  double rho_L = 0.0;
  std::size_t rho_n = 257;
  auto* rho = app.add_subcommand("rho", "Evaluate the unit-mass radius at a point");
  rho->add_option("--weight", weight_text, "Weight descriptor JSON")->required();
  rho->add_option("--point", point_text, "Point as x,y")->required();
  rho->add_option("--L", rho_L, "Box half-width (default: fitted to the point)");
  rho->add_option("--n", rho_n, "Nodes per side")->check(CLI::Range(64, 4097));

  std::string kconfig, pairs_path, kout;
  auto* kernel = app.add_subcommand("kernel", "Evaluate the Bergman kernel on listed pairs");
  kernel->add_option("--config", kconfig, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  kernel->add_option("--pairs", pairs_path, "CSV with z_re,z_im,zeta_re,zeta_im")->required()->check(CLI::ExistingFile);
  kernel->add_option("--out", kout, "Output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, suites, out_dir, parallel);
    if (*rho) return cmd_rho(weight_text, point_text, rho_L, rho_n);
    if (*kernel) return cmd_kernel(kconfig, pairs_path, kout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
