#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fock/harness.hpp"
#include "fock/io.hpp"

using namespace fock;
using namespace fock::harness;
namespace fs = std::filesystem;

namespace {

json gaussian_config() {
  return json::parse(R"({
    "weight": {"family": "radial_power", "alpha": 2, "coeff": 1},
    "grid": {"L": 6, "n": 129},
    "basis": {"degree": 40},
    "quad": {"mode": "radial", "nodes": 2048},
    "suites": ["rho"],
    "seed": 3
  })");
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("fock_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string message_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config schema errors name the field") {
  auto j = gaussian_config();
  j["weight"]["family"] = "mexican_hat";
  CHECK(message_of(j).find("weight.family") != std::string::npos);

  j = gaussian_config();
  j["weight"]["alpha"] = -1.0;
  CHECK(message_of(j).find("weight.alpha") != std::string::npos);

  j = gaussian_config();
  j["suites"] = {"rho", "no-such-suite"};
  CHECK(message_of(j).find("no-such-suite") != std::string::npos);

  j = gaussian_config();
  j["tolerances"] = {{"kernel_rel", 0.0}};
  CHECK(message_of(j).find("tolerances.kernel_rel") != std::string::npos);

  j = gaussian_config();
  j["tolerances"] = {{"made_up", 1.0}};
  CHECK(message_of(j).find("tolerances.made_up") != std::string::npos);

  j = gaussian_config();
  j["grid"]["n"] = 32;
  CHECK(message_of(j).find("grid.n") != std::string::npos);

  j = gaussian_config();
  j["quad"]["mode"] = "spiral";
  CHECK(message_of(j).find("quad.mode") != std::string::npos);

  j = gaussian_config();
  j["extra"] = 1;
  CHECK(message_of(j).find("extra") != std::string::npos);

  CHECK(message_of(gaussian_config()).empty());
}

TEST_CASE("every suite has a runner and defaults are positive") {
  CHECK(suite_names().size() == 13);
  for (const auto& [k, v] : default_tolerances()) CHECK(v > 0.0);
  const auto c = parse_config(gaussian_config());
  CHECK_THROWS_AS(run_suite(c, "nonexistent"), ConfigError);
  CHECK(run_suites(c, {}, false).empty());
  auto all = gaussian_config();
  all.erase("suites");
  CHECK(parse_config(all).suites == suite_names());
}

TEST_CASE("config hash is the SHA-256 of the canonical serialization") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto a = parse_config(gaussian_config());
  CHECK(config_hash(a) == sha256_hex(to_json(a).dump()));
  auto j = gaussian_config();
  j["tolerances"] = {{"kernel_rel", 1e-6}};
  CHECK(config_hash(parse_config(j)) == config_hash(a));
  j["seed"] = 4;
  CHECK(config_hash(parse_config(j)) != config_hash(a));
}

TEST_CASE("seed override from the environment") {
  auto c = parse_config(gaussian_config());
  ::setenv("FOCK_SEED", "99", 1);
  apply_environment(c);
  CHECK(c.seed == 99);
  ::setenv("FOCK_SEED", "x9", 1);
  CHECK_THROWS_AS(apply_environment(c), ConfigError);
  ::unsetenv("FOCK_SEED");
}

TEST_CASE("suite reports are deterministic and recomputable") {
  const auto c = parse_config(gaussian_config());
  const auto a = run_suite(c, "gaussian-closed-form");
  const auto b = run_suite(c, "gaussian-closed-form");
  CHECK(a.passed());
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(a.config_hash == config_hash(c));

  const auto dir = scratch("reports");
  const auto out = write_report(a, dir);
  const auto j = io::read_json(out / "report.json");
  for (const auto& chk : j.at("checks")) {
    const double v = chk.at("value").get<double>();
    const double lo = chk.at("bound")[0].get<double>();
    const double hi = chk.at("bound")[1].get<double>();
    CHECK((lo <= v && v <= hi) == chk.at("pass").get<bool>());
  }
  CHECK(j.at("provenance").at("config_hash") == config_hash(c));
  CHECK(fs::exists(out / "timings.json"));

  std::ifstream first(out / "kernel.csv");
  std::string header;
  std::getline(first, header);
  CHECK(header == "z_re,z_im,zeta_re,zeta_im,K_re,K_im,normalized");

  const auto again = write_report(b, scratch("reports_again"));
  std::ifstream x(out / "report.json"), y(again / "report.json");
  const std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
  CHECK(sx == sy);
}

TEST_CASE("plot data emission") {
  const auto c = parse_config(gaussian_config());
  const auto rep = run_suite(c, "gaussian-closed-form");
  const auto dir = scratch("plots");
  const auto path = emit_plot_data(rep, "kernel", dir);
  const auto t = io::read_csv(path);
  CHECK(t.columns.size() == 7);
  CHECK(t.rows.size() == 100);
  CHECK_THROWS_AS(emit_plot_data(rep, "nonexistent", dir), DomainError);

  io::Table probe{"probe", io::kProbeColumns, {}};
  probe.add({1.0, 0.28, 0.7, 2.5});
  SuiteReport r;
  r.suite = "compact-probe";
  r.tables.push_back(probe);
  CHECK(io::read_csv(emit_plot_data(r, "probe", dir)).columns.size() == 4);
  CHECK_THROWS_AS(probe.add({1.0}), DomainError);
}

TEST_CASE("module errors carry the suite name") {
  auto j = gaussian_config();
  j["params"] = {{"integrability_L", 3.0}, {"integrability_n", 97}};
  const auto c = parse_config(j);
  try {
    run_suite(c, "integrability");
    FAIL("expected a SuiteError");
  } catch (const SuiteError& e) {
    CHECK(std::string(e.what()).find("integrability") != std::string::npos);
  }
}

TEST_CASE("io round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  const auto dir = scratch("io");
  const Grid g(2.0, 65);
  const auto f = GridField::sample(g, Meaning::rho, [](cplx z) { return std::exp(-std::norm(z)) / 3.0; });
  io::write_grid_field(f, dir / "field.csv");
  const auto side = io::read_json(dir / "field.json");
  CHECK(side.at("meaning") == "rho");
  CHECK(side.at("n") == 65);
  const auto back = io::read_grid_field(dir / "field.csv");
  CHECK(back.grid() == g);
  CHECK(back.meaning() == Meaning::rho);
  CHECK(back.values() == f.values());

  // Grid-sampled weight read back through the config path.
  const Grid wg(4.0, 129);
  io::write_grid_field(GridField::sample(wg, Meaning::weight, [](cplx z) { return std::norm(z); }), dir / "phi.csv");
  const auto spec = io::weight_from_json({{"family", "grid_sampled"}, {"csv", "phi.csv"}}, dir);
  CHECK(io::weight_to_json(spec).at("family") == "grid_sampled");
  CHECK(weights::evaluate_phi(spec, {1.0, 0.5}) == doctest::Approx(1.25).epsilon(1e-3));

  const json pr = {{"family", "perturbed_radial"},
                   {"base", {{"alpha", 2.0}, {"coeff", 1.0}}},
                   {"bumps", {{{"center", {0.5, 0.0}}, {"height", 0.1}, {"width", 1.0}}}}};
  CHECK(io::weight_to_json(io::weight_from_json(pr)) == pr);
  CHECK_THROWS_AS(io::weight_from_json({{"family", "perturbed_radial"}, {"base", {{"alpha", 2.0}, {"coeff", 1.0}}},
                                        {"bumps", {{{"center", {0.5}}, {"height", 0.1}, {"width", 1.0}}}}}),
                  ConfigError);

  std::ofstream(dir / "pairs.csv") << "z_re,z_im,zeta_re,zeta_im\n0,0,1,0.5\n0.25,-1,0,0\n";
  const auto pairs = io::read_pairs(dir / "pairs.csv");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[1].first == cplx{0.25, -1.0});
  CHECK(io::parse_point("1.0,0.5") == cplx{1.0, 0.5});
  CHECK_THROWS_AS(io::parse_point("1.0;0.5"), ConfigError);
  CHECK_THROWS_AS(io::parse_point("a,b"), ConfigError);
}

TEST_CASE("kernel table for listed pairs") {
  const auto c = parse_config(gaussian_config());
  const auto t = kernel_table(c, {{cplx{0.0, 0.0}, cplx{0.0, 0.0}}, {cplx{0.5, 0.2}, cplx{-0.3, 0.1}}});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][4] == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
  // normalized value on the diagonal: K rho^2 e^{-2 phi} = 1 / (2 pi^2).
  CHECK(t.rows[0][6] == doctest::Approx(1.0 / (2.0 * std::numbers::pi * std::numbers::pi)).epsilon(1e-8));
}
