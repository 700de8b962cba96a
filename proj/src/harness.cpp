#include "fock/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <unordered_map>

#include <openssl/evp.h>

#include "fock/dbar.hpp"
#include "fock/metric.hpp"

namespace fock::harness {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

using Pairs = std::vector<std::pair<cplx, cplx>>;

// ---------------------------------------------------------------------------
// Deterministic sampling
// ---------------------------------------------------------------------------

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a, double b) { return a + (b - a) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  cplx in_disk(double R) { return std::polar(R * std::sqrt(uniform(0.0, 1.0)), uniform(0.0, 2.0 * pi)); }

 private:
  std::mt19937_64 rng_;
};

std::uint64_t stream_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return h;
}

Pairs separated_pairs(const weights::RhoMap& rho, Sampler& s, std::size_t count, double zmax, double smin,
                      double smax) {
  Pairs out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000 * count) throw DomainError("cannot place separated pairs inside the sampling disk");
    const cplx z = s.in_disk(zmax);
    const cplx zeta = z + std::polar(s.uniform(smin, smax) * rho(z), s.uniform(0.0, 2.0 * pi));
    if (std::abs(zeta) > zmax) continue;
    out.emplace_back(z, zeta);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weight facts used by the oracles
// ---------------------------------------------------------------------------

struct PowerInfo {
  bool radial = false;
  double alpha = 0.0;
  double coeff = 0.0;
  bool gaussian() const { return radial && alpha == 2.0; }
};

PowerInfo power_info(const weights::WeightSpec& spec) {
  if (const auto* p = std::get_if<weights::RadialPower>(&spec.family)) return {true, p->alpha, p->coeff};
  return {};
}

// mu(D(0, r)) = 2 pi alpha c r^alpha.
double rho_origin_oracle(const PowerInfo& w) { return std::pow(2.0 * pi * w.alpha * w.coeff, -1.0 / w.alpha); }

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

class Builder {
 public:
  Builder(const RunConfig& config, std::string suite) : config_(config) {
    rep_.suite = std::move(suite);
    rep_.weight = config.weight;
    rep_.config_hash = config_hash(config);
    last_ = std::chrono::steady_clock::now();
  }

  void check(std::string name, double value, double lower, double upper) {
    rep_.checks.push_back(Check::make(std::move(name), value, lower, upper));
  }
  void table(io::Table t) { rep_.tables.push_back(std::move(t)); }
  void artifact(std::string name, json j) { rep_.artifacts[std::move(name)] = std::move(j); }
  void lap(std::string phase) {
    const auto now = std::chrono::steady_clock::now();
    rep_.timings.emplace_back(std::move(phase), std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }
  void set_weight(json w) { rep_.weight = std::move(w); }
  SuiteReport finish() { return std::move(rep_); }

  const RunConfig& config() const { return config_; }

 private:
  const RunConfig& config_;
  SuiteReport rep_;
  std::chrono::steady_clock::time_point last_;
};

GridField density(const weights::WeightSpec& spec, double L, std::size_t n) {
  return weights::laplacian(weights::sample_weight(spec, L, n));
}

// Largest radius (step 0.05) inside the validated disk where the truncation is converged.
double converged_radius(const bergman::KernelModel& model, double cap) {
  const double top = std::min(model.validated_radius(), cap);
  double r = 0.0;
  for (double t = 0.05; t <= top + 1e-12; t += 0.05) {
    if (model.truncation_ratio(t) > 1e-10) break;
    r = t;
  }
  if (r <= 0.0) throw CertificateError("kernel truncation not converged anywhere; raise basis.degree");
  return r;
}

constexpr double kMaxDegree = 4096;

constexpr std::size_t kBaseDegree = 40;

// Radial-mode model whose truncation is converged out to `reach`; the degree
// doubles from min(configured, 40).
std::unique_ptr<bergman::KernelModel> converged_model(const RunConfig& c, double reach) {
  bergman::ModelOptions mo = c.model_options();
  mo.mode = bergman::QuadMode::radial;
  mo.degree = std::min(mo.degree, kBaseDegree);
  auto model = std::make_unique<bergman::KernelModel>(c.spec, mo);
  while (model->truncation_ratio(reach) > 1e-14) {
    if (mo.degree * 2 > kMaxDegree) {
      throw CertificateError("kernel truncation at |z| = " + std::to_string(reach) +
                             " needs a basis degree above 4096; shrink the box");
    }
    mo.degree *= 2;
    model = std::make_unique<bergman::KernelModel>(c.spec, mo);
  }
  return model;
}

double sampling_radius(const RunConfig& c, const bergman::KernelModel& model) {
  const double fixed = c.param("pair_radius");
  return fixed > 0.0 ? fixed : converged_radius(model, c.L - 1.0);
}

io::Table kernel_rows(const bergman::KernelModel& model, const weights::RhoMap& rho, const Pairs& pairs,
                      std::string name) {
  io::Table t{std::move(name), io::kKernelColumns, {}};
  for (const auto& [z, zeta] : pairs) {
    const cplx K = model.kernel(z, zeta);
    const double normalized = model.weighted_abs(z, zeta) * rho(z) * rho(zeta);
    t.add({z.real(), z.imag(), zeta.real(), zeta.imag(), K.real(), K.imag(), normalized});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

void suite_gaussian_closed_form(Builder& b) {
  const auto& c = b.config();
  const auto spec = weights::WeightSpec::gaussian();
  b.set_weight(io::weight_to_json(spec));
  auto mo = c.model_options();
  if (!power_info(c.spec).gaussian()) mo.degree = kBaseDegree;
  const bergman::KernelModel model(spec, mo);
  b.lap("model");

  double gram_err = 0.0;
  const auto& lc = model.log_gram_diagonal();
  for (std::size_t k = 0; k < lc.size(); ++k) {
    const double oracle = std::log(pi) + std::lgamma(k + 1.0) - (k + 1.0) * std::log(2.0);
    gram_err = std::max(gram_err, std::abs(lc[k] - oracle) / std::max(1.0, std::abs(oracle)));
  }
  b.check("gram_log_diagonal_rel_error", gram_err, 0.0, c.tol("gram_log"));

  Sampler s(stream_seed(c.seed, "gaussian-closed-form"));
  const double R = c.param("closed_form_radius");
  Pairs pairs;
  for (int k = 0; k < 100; ++k) pairs.emplace_back(s.in_disk(R), s.in_disk(R));
  double kerr = 0.0;
  for (const auto& [z, zeta] : pairs) {
    const cplx oracle = (2.0 / pi) * std::exp(2.0 * z * std::conj(zeta));
    kerr = std::max(kerr, std::abs(model.kernel(z, zeta) - oracle) / std::abs(oracle));
  }
  b.check("kernel_max_rel_error", kerr, 0.0, c.tol("kernel_rel"));
  b.lap("kernel");

  const auto mu = density(spec, c.L, c.n);
  double lap_err = 0.0;
  for (double v : mu.values()) lap_err = std::max(lap_err, std::abs(v - 4.0));
  b.check("laplacian_max_error", lap_err, 0.0, 1e-12);
  const weights::RhoMap rho(mu);
  double rho_err = 0.0;
  for (int k = 0; k < 10; ++k) rho_err = std::max(rho_err, std::abs(weights::rho(mu, s.in_disk(R)) - 0.5 / std::sqrt(pi)));
  b.check("rho_max_abs_error", rho_err, 0.0, c.tol("rho_abs"));

  double diag_err = 0.0;
  std::vector<cplx> pts;
  for (int k = 0; k < 10; ++k) pts.push_back(s.in_disk(R));
  for (double v : bergman::diagonal_check(model, rho, pts)) {
    diag_err = std::max(diag_err, std::abs(v * 2.0 * pi * pi - 1.0));
  }
  b.check("diagonal_rel_error", diag_err, 0.0, c.tol("diagonal_gauss_rel"));

  Eigen::VectorXcd z3 = Eigen::VectorXcd::Zero(4);
  z3(3) = 1.0;
  b.check("reproducing_error", bergman::check_reproducing(model, z3, pts), 0.0, c.tol("reproducing"));
  b.table(kernel_rows(model, rho, pairs, "kernel"));
  b.lap("checks");
}

void suite_rho(Builder& b) {
  const auto& c = b.config();
  const auto mu = density(c.spec, c.L, c.n);
  const weights::RhoMap rho(mu);
  const PowerInfo w = power_info(c.spec);
  b.lap("rho_map");
  Sampler s(stream_seed(c.seed, "rho"));
  const double R = std::min(3.0, c.L / 2.0);
  std::vector<cplx> pts;
  for (int k = 0; k < 10; ++k) pts.push_back(s.in_disk(R));

  if (w.gaussian()) {
    double err = 0.0;
    for (cplx z : pts) err = std::max(err, std::abs(weights::rho(mu, z) - 1.0 / std::sqrt(4.0 * pi * w.coeff)));
    b.check("rho_gaussian_max_abs_error", err, 0.0, c.tol("rho_abs"));
  }
  if (w.radial) {
    b.check("rho_origin_abs_error", std::abs(weights::rho(mu, 0.0) - rho_origin_oracle(w)), 0.0,
            c.tol("rho_origin_abs"));
    if (w.alpha != 2.0 && c.L >= 4.0) {
      // pi rho^2 alpha^2 c |z|^(alpha-2) = 1 at large |z|.
      const double far = 1.0 / (w.alpha * std::sqrt(pi * w.coeff) * std::pow(3.0, w.alpha / 2.0 - 1.0));
      b.check("rho_far_rel_error", std::abs(weights::rho(mu, 3.0) / far - 1.0), 0.0, c.tol("rho_far_rel"));
    }
    if (c.L >= 5.0) {
      b.check("growth_slope_error", std::abs(weights::rho_growth_slope(rho, 2.0, 4.0) - (1.0 - w.alpha / 2.0)), 0.0,
              c.tol("growth_slope_abs"));
    }
  }

  std::size_t violations = 0;
  for (cplx z : pts) {
    double prev = 0.0;
    for (double r = 0.05; r <= 1.0; r += 0.05) {
      if (!mu.grid().contains_disk(z, r)) break;
      const double m = weights::mass_in_disk(mu, z, r);
      if (m < prev) ++violations;
      prev = m;
    }
  }
  b.check("mass_monotonicity_violations", static_cast<double>(violations), 0.0, 0.0);

  std::vector<cplx> sweep;
  const double top = c.L - rho.max_rho() - 0.5;
  for (double x = 0.05; x < std::min(4.0, top); x += 0.11) sweep.push_back({x, 0.3 * x});
  b.check("near_constancy", weights::rho_near_constancy(rho, sweep), 1.0, c.tol("near_constancy_max"));
  const auto fit = weights::quotient_bound_fit(rho, sweep);
  b.check("quotient_slope", fit.slope, -inf, std::nextafter(1.0, 0.0));

  const auto field = rho.sample(mu.grid());
  b.table(io::grid_field_table(field, "rho_field"));
  b.lap("checks");
}

void suite_doubling(Builder& b) {
  const auto& c = b.config();
  const auto mu = density(c.spec, c.L, c.n);
  const PowerInfo w = power_info(c.spec);
  weights::DoublingOptions opt;
  opt.growth_threshold = c.param("doubling_growth_threshold");
  opt.constant_cap = c.param("doubling_constant_cap");
  const std::vector<double> radii{0.25, 0.5, 0.75, 1.0, 1.5};
  const std::vector<cplx> centers{{0, 0}, {1, 0}, {0, -1.5}};
  const auto rep = weights::doubling_report(mu, radii, centers, opt);
  b.lap("doubling");
  if (w.gaussian()) {
    b.check("doubling_constant", rep.constant_estimate, 4.0 - c.tol("doubling_abs"), 4.0 + c.tol("doubling_abs"));
  } else {
    b.check("doubling_constant", rep.constant_estimate, 1.0, opt.constant_cap);
  }
  b.check("verdict_doubling", rep.verdict == weights::DoublingVerdict::doubling ? 1.0 : 0.0, 1.0, 1.0);
  b.check("gamma_estimate", rep.gamma_estimate, std::numeric_limits<double>::min(), 1.0);

  const weights::RhoMap rho(mu);
  std::vector<cplx> pb_centers;
  for (cplx z : {cplx{0.5, 0}, cplx{1, 1}, cplx{0, 1.5}}) {
    if (mu.grid().contains_disk(z, 8.0 * rho(z))) pb_centers.push_back(z);
  }
  if (pb_centers.empty()) throw BoxError("no power-bound centre admits D(z, 8 rho(z)) inside the box");
  const auto pb = weights::power_bound_check(mu, rho, pb_centers, {1.0, 2.0, 4.0, 8.0}, rep.gamma_estimate);
  b.check("power_bound_constant", pb.constant, 1.0, c.tol("power_bound_constant"));
  b.check("power_bound_min_slope", pb.min_slope, rep.gamma_estimate / pb.constant, inf);
  b.check("power_bound_max_slope", pb.max_slope, -inf, pb.constant / rep.gamma_estimate);
  b.lap("power_bounds");

  // Control weight with Laplacian e^{2 Re z}.
  const Grid grid(5.0, 257);
  auto phi = std::make_shared<GridField>(
      GridField::sample(grid, Meaning::weight, [](cplx z) { return std::exp(2.0 * z.real()) / 4.0; }));
  const auto cmu = density(weights::WeightSpec{weights::GridSampled{phi}}, 5.0, 257);
  const auto ctrl = weights::doubling_report(cmu, {0.25, 0.5, 1.0, 1.5, 2.0}, {{0, 0}, {0.3, 0.3}}, opt);
  b.check("control_flagged_non_doubling", ctrl.verdict == weights::DoublingVerdict::suspect_non_doubling ? 1.0 : 0.0,
          1.0, 1.0);

  io::Table t{"doubling_samples", {"z_re", "z_im", "r", "ratio"}, {}};
  for (const auto& smp : rep.samples) t.add({smp.z.real(), smp.z.imag(), smp.r, smp.ratio});
  b.table(std::move(t));
  b.lap("control");
}

void suite_main_estimate(Builder& b) {
  const auto& c = b.config();
  const bergman::KernelModel model(c.spec, c.model_options());
  const auto mu = density(c.spec, c.L, c.n);
  const weights::RhoMap rho(mu);
  const auto graph = metric::build_metric_graph(rho.sample(mu.grid()));
  b.lap("setup");
  const PowerInfo w = power_info(c.spec);
  Sampler s(stream_seed(c.seed, "main-estimate"));
  const double zmax = sampling_radius(c, model);
  const auto count = static_cast<std::size_t>(c.param("pairs"));
  const auto fit = separated_pairs(rho, s, count, zmax, 1.0, c.param("fit_sep_max"));
  const auto hold = separated_pairs(rho, s, count, zmax, 1.0, c.param("holdout_sep_max"));

  const auto st = bergman::decay_fit(model, rho, nullptr, fit, hold, bergman::DecayModel::stretched);
  if (w.gaussian()) {
    b.check("stretched_eps", st.eps_fit, c.tol("eps_gauss_lower"), c.tol("eps_gauss_upper"));
  } else {
    b.check("stretched_eps", st.eps_fit, std::numeric_limits<double>::min(), inf);
  }
  b.check("stretched_coverage", st.coverage, c.tol("coverage_kernel"), 1.0);
  b.artifact("decay_fit_stretched", io::to_json(st));
  b.lap("stretched");

  const auto me = bergman::decay_fit(model, rho, &graph, fit, hold, bergman::DecayModel::metric);
  b.check("metric_eps", me.eps_fit, std::numeric_limits<double>::min(), inf);
  b.check("metric_coverage", me.coverage, c.tol("coverage_kernel"), 1.0);
  b.artifact("decay_fit_metric", io::to_json(me));
  const auto ch = bergman::decay_fit(model, rho, &graph, fit, hold, bergman::DecayModel::christ);
  b.check("christ_eps", ch.eps_fit, std::numeric_limits<double>::min(), inf);
  b.check("christ_coverage", ch.coverage, 0.0, 1.0);
  b.artifact("decay_fit_christ", io::to_json(ch));
  b.lap("metric");

  Pairs all = fit;
  all.insert(all.end(), hold.begin(), hold.end());
  b.table(kernel_rows(model, rho, all, "kernel"));
  io::Table dist{"distance", io::kDistanceColumns, {}};
  std::unordered_map<std::size_t, std::vector<double>> cache;
  for (const auto& [z, zeta] : all) {
    const std::size_t src = graph.grid().snap(z);
    auto it = cache.find(src);
    if (it == cache.end()) it = cache.emplace(src, graph.distances_from_node(src)).first;
    dist.add({z.real(), z.imag(), zeta.real(), zeta.imag(), it->second[graph.grid().snap(zeta)]});
  }
  b.table(std::move(dist));
  b.lap("tables");
}

std::vector<cplx> ring_points(double zmax) {
  std::vector<cplx> pts;
  for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (int a = 0; a < 8; ++a) pts.push_back(std::polar(f * zmax, a * pi / 4.0 + 0.3));
  }
  return pts;
}

void suite_diagonal(Builder& b) {
  const auto& c = b.config();
  const bergman::KernelModel model(c.spec, c.model_options());
  const weights::RhoMap rho(density(c.spec, c.L, c.n));
  b.lap("setup");
  const double zmax = sampling_radius(c, model);
  const auto pts = ring_points(zmax);
  const auto vals = bergman::diagonal_check(model, rho, pts);
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  b.check("diagonal_radius_fraction", zmax / model.validated_radius(), 0.0, 1.0);
  b.check("diagonal_min", *lo, std::numeric_limits<double>::min(), inf);
  b.check("diagonal_spread", *hi / *lo, 1.0, c.tol("diagonal_spread"));
  if (power_info(c.spec).gaussian()) {
    double err = 0.0;
    for (double v : vals) err = std::max(err, std::abs(v * 2.0 * pi * pi - 1.0));
    b.check("diagonal_gaussian_rel_error", err, 0.0, c.tol("diagonal_gauss_rel"));
  }
  io::Table t{"diagonal", {"z_re", "z_im", "value"}, {}};
  for (std::size_t k = 0; k < pts.size(); ++k) t.add({pts[k].real(), pts[k].imag(), vals[k]});
  b.table(std::move(t));
  b.lap("checks");
}

void suite_coarse(Builder& b) {
  const auto& c = b.config();
  const bergman::KernelModel model(c.spec, c.model_options());
  const weights::RhoMap rho(density(c.spec, c.L, c.n));
  b.lap("setup");
  const double zmax = sampling_radius(c, model);
  double worst = 0.0;
  Pairs all;
  for (cplx dir : {cplx{0.0, 0.0}, cplx{0.6, 0.3}, cplx{-0.4, 0.5}}) {
    const cplx z = dir * zmax;
    const double r = rho(z);
    Pairs pairs;
    for (int k = -12; k <= 12; ++k) {
      const cplx zeta = z + std::polar(0.25 * k * r, 0.4);
      if (std::abs(zeta) <= zmax) pairs.emplace_back(z, zeta);
    }
    const auto rep = bergman::coarse_check(model, rho, pairs);
    worst = std::max(worst, rep.argmax_separation);
    all.insert(all.end(), pairs.begin(), pairs.end());
  }
  b.check("coarse_argmax_separation", worst, 0.0, c.tol("coarse_sep"));
  b.table(kernel_rows(model, rho, all, "kernel"));
  b.lap("checks");
}

void suite_distance_lemma(Builder& b) {
  const auto& c = b.config();
  const double L = c.param("distance_L");
  const auto n = static_cast<std::size_t>(c.param("distance_n"));
  const weights::RhoMap rho(density(c.spec, L, n));
  const auto graph = metric::build_metric_graph(rho.sample(rho.density().grid()));
  b.lap("graph");
  const double r = c.param("distance_r");
  const double reach = c.param("distance_far_radius");
  std::vector<cplx> far;
  for (int k = 0; k < 16; ++k) far.push_back(std::polar(rho(0.0) * r * 1.2 + (reach - rho(0.0) * r * 1.2) * k / 15.0, 0.4 * k));
  const auto rep = metric::distance_bounds_check(graph, 0.0, r, far);
  if (power_info(c.spec).gaussian()) {
    b.check("near_ratio_min", rep.near_min, 1.0 - c.tol("near_ratio"), 1.0 + c.tol("near_ratio"));
    b.check("near_ratio_max", rep.near_max, 1.0 - c.tol("near_ratio"), 1.0 + c.tol("near_ratio"));
  } else {
    b.check("near_ratio_min", rep.near_min, std::numeric_limits<double>::min(), inf);
    b.check("near_ratio_max", rep.near_max, rep.near_min, rep.near_min * c.tol("near_ratio_spread"));
  }
  b.check("common_delta", rep.common_delta ? 1.0 : 0.0, 1.0, 1.0);
  b.check("anisotropy_bound", rep.anisotropy_bound, 1.0, 1.0 + c.tol("near_ratio"));
  const auto d0 = graph.distances_from(0.0);
  io::Table t{"distance", io::kDistanceColumns, {}};
  for (cplx p : far) t.add({0.0, 0.0, p.real(), p.imag(), d0[graph.grid().snap(p)]});
  b.table(std::move(t));
  b.lap("checks");
}

void suite_integrability(Builder& b) {
  const auto& c = b.config();
  const double L = c.param("integrability_L");
  const auto n = static_cast<std::size_t>(c.param("integrability_n"));
  const auto mu = density(c.spec, L, n);
  const auto graph = metric::build_metric_graph(weights::RhoMap(mu).sample(mu.grid()));
  b.lap("graph");
  const double R = c.param("integrability_radius");
  const double k = c.param("integrability_k");
  const double eps = c.param("integrability_eps");
  io::Table t{"integrability", {"zeta_re", "zeta_im", "value"}, {}};
  double lo = inf, hi = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const cplx zeta{R * (i - 2) / 2.0, R * (j - 2) / 2.0};
      const double v = metric::integrability_check(mu, graph, zeta, k, eps);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      t.add({zeta.real(), zeta.imag(), v});
    }
  }
  b.check("integrability_min", lo, std::numeric_limits<double>::min(), inf);
  b.check("integrability_spread", hi / lo, 1.0, c.tol("integrability_spread"));
  b.table(std::move(t));
  b.lap("sweep");
}

void suite_submean(Builder& b) {
  const auto& c = b.config();
  const bergman::KernelModel model(c.spec, c.model_options());
  const weights::RhoMap rho(density(c.spec, c.L, c.n));
  b.lap("setup");
  Sampler s(stream_seed(c.seed, "submean"));
  const double zmax = sampling_radius(c, model);
  Eigen::VectorXcd f(4);
  for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = cplx{s.uniform(-1, 1), s.uniform(-1, 1)};
  std::vector<cplx> pts;
  for (int k = 0; k < 8; ++k) pts.push_back(s.in_disk(0.8 * zmax));
  const auto out = bergman::submean_check(model, rho, f, c.param("submean_r"), c.param("submean_s"), pts);
  double amax = 0.0, bmax = 0.0, cmax = 0.0, amin = inf, cmin = inf;
  io::Table t{"submean", {"z_re", "z_im", "a", "b", "b_scaled", "c"}, {}};
  for (const auto& r : out) {
    amax = std::max(amax, r.a);
    amin = std::min(amin, r.a);
    bmax = std::max(bmax, r.b_scaled);
    cmax = std::max(cmax, r.c);
    cmin = std::min(cmin, r.c);
    t.add({r.z.real(), r.z.imag(), r.a, r.b, r.b_scaled, r.c});
  }
  b.check("submean_a_max", amax, 0.0, c.tol("submean_max"));
  b.check("submean_a_min", amin, std::numeric_limits<double>::min(), inf);
  b.check("submean_b_scaled_max", bmax, 0.0, c.tol("submean_max"));
  b.check("submean_c_max", cmax, 0.0, c.tol("submean_max"));
  b.check("submean_c_min", cmin, std::numeric_limits<double>::min(), inf);
  b.table(std::move(t));
  b.lap("checks");
}

void suite_gadgets(Builder& b) {
  const auto& c = b.config();
  const Grid grid(c.param("gadget_L"), static_cast<std::size_t>(c.param("gadget_n")));
  std::map<double, weights::GadgetReport> reps;
  for (double eps : {0.05, 0.25, 0.5}) reps.emplace(eps, weights::proof_gadget_suite(c.spec, 0.0, eps, grid));
  b.lap("gadgets");
  for (double eps : {0.25, 0.5}) {
    const auto& r = reps.at(eps);
    const std::string tag = eps == 0.25 ? "0.25" : "0.5";
    b.check("big_phi_scaled_rel_error_eps_" + tag, std::abs(r.big_phi_at_zeta_scaled / (eps / 4.0) - 1.0), 0.0,
            c.tol("gadget_rel"));
    b.check("psi_minus_phi_min_eps_" + tag, r.psi_minus_phi_min, -1e-12, inf);
    b.check("psi_minus_phi_max_near_eps_" + tag, r.psi_minus_phi_max_near, -1e-12, std::pow(3.0, eps));
  }
  b.check("c1_ratio_small_eps", reps.at(0.05).c1 / reps.at(0.5).c1, 0.0, std::nextafter(1.0, 0.0));
  b.check("c2_ratio_small_eps", reps.at(0.05).c2 / reps.at(0.5).c2, 0.0, std::nextafter(1.0, 0.0));

  const auto reg = weights::regularize_weight(c.spec, grid);
  b.check("regularized_lower", reg.lower, c.tol("regularized_lower"), inf);
  b.check("regularized_upper", reg.upper, 0.0, c.tol("regularized_upper"));
  b.check("regularized_sup_difference", reg.sup_difference, 0.0, c.tol("regularized_sup_difference"));
  if (power_info(c.spec).gaussian()) {
    const double oracle = 1.0 / (8.0 * pi * power_info(c.spec).coeff);
    b.check("regularized_gaussian_rel_error", std::abs(reg.sup_difference / oracle - 1.0), 0.0, 1e-6);
  }
  b.table(io::grid_field_table(reps.at(0.5).psi, "psi_eps_0.5"));
  b.table(io::grid_field_table(reg.field, "regularized"));
  b.lap("regularized");
}

// u0 = chi(z/R) conj(z), f = dbar u0 with chi(z) = exp(-1/(1-|z|^2)).
double chi_disk(cplx z) {
  const double s = std::norm(z);
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}
cplx manufactured_f(cplx z, double R) {
  const double s = std::norm(z) / (R * R);
  if (s >= 1.0) return 0.0;
  return chi_disk(z / R) * (1.0 - s / ((1.0 - s) * (1.0 - s)));
}

bergman::KernelModel tensor_model(const RunConfig& c, std::size_t nodes) {
  bergman::ModelOptions o;
  o.degree = static_cast<std::size_t>(c.param("tensor_degree"));
  o.L = c.param("tensor_L");
  o.mode = bergman::QuadMode::tensor;
  o.quad_nodes = nodes;
  return bergman::KernelModel(c.spec, o);
}

void suite_dbar_kernel(Builder& b) {
  const auto& c = b.config();
  const double R = c.param("manufactured_radius");
  const double dL = c.param("dbar_L");
  const auto dn = static_cast<std::size_t>(c.param("dbar_n"));
  std::vector<double> residuals;
  for (std::size_t n : {dn, 2 * dn}) {
    const Grid g(dL, n);
    const auto f = ComplexField::sample(g, Meaning::function, [&](cplx z) { return manufactured_f(z, R); });
    const auto u = dbar::cauchy_transform(f);
    const auto phi = weights::sample_weight(c.spec, dL, n);
    residuals.push_back(dbar::dbar_residual(u, f, phi));
    dbar::SolveReport rep;
    rep.method = dbar::SolveMethod::cauchy;
    rep.residual = residuals.back();
    rep.norm_u = weighted_norm(u, phi);
    rep.grid_nodes = g.size();
    b.artifact("solve_cauchy_n" + std::to_string(n), io::to_json(rep));
  }
  b.check("cauchy_residual", residuals[0], 0.0, c.tol("residual_max"));
  b.check("cauchy_refinement_ratio", residuals[1] / residuals[0], 0.0, c.tol("halving"));
  b.lap("cauchy");

  const auto model_ptr = converged_model(c, dL * std::numbers::sqrt2);
  const auto& model = *model_ptr;
  const auto gn = static_cast<std::size_t>(c.param("covering_n"));
  const auto gmu = density(c.spec, dL, gn);
  const weights::RhoMap grho(gmu);
  auto cov = dbar::build_covering(grho.sample(gmu.grid()), c.param("covering_r"));
  const auto gf = ComplexField::sample(cov.grid, Meaning::function, [&](cplx z) { return manufactured_f(z, R); });
  auto [uG, repG] = dbar::apply_G(cov, model, gf);
  b.check("covering_certificate_min", *std::min_element(cov.certificates.begin(), cov.certificates.end()), 1e-10, inf);
  b.check("covering_G_residual", repG.residual, 0.0, c.tol("G_residual"));
  b.artifact("solve_covering_G", io::to_json(repG));
  b.lap("covering");

  const auto tmodel = tensor_model(c, static_cast<std::size_t>(c.param("tensor_n")));
  const Grid& tg = tmodel.quad_grid();
  const auto tf = ComplexField::sample(tg, Meaning::function, [&](cplx z) { return manufactured_f(z, R); });
  auto [uc, repc] = dbar::canonical_solve(tmodel, dbar::cauchy_transform(tf), &tf);
  b.check("canonical_orthogonality_defect", repc.orthogonality_defect, 0.0, c.tol("orthogonality"));
  const double lhs = repc.norm_u0 * repc.norm_u0;
  const double rhs = repc.norm_u * repc.norm_u + repc.norm_projection * repc.norm_projection;
  b.check("pythagoras_rel_error", std::abs(lhs - rhs) / lhs, 0.0, c.tol("pythagoras"));
  b.check("canonical_norm_ratio", repc.norm_u / repc.norm_u0, 0.0, 1.0);
  b.check("canonical_residual", repc.residual, 0.0, c.tol("canonical_residual"));
  b.artifact("solve_canonical", io::to_json(repc));
  b.lap("canonical");

  const auto kmu = density(c.spec, dL, gn);
  const weights::RhoMap krho(kmu);
  const auto graph = metric::build_metric_graph(krho.sample(kmu.grid()));
  dbar::KernelEstimateOptions opt;
  opt.canonical_sources = 1;
  const auto kmodel = tensor_model(c, static_cast<std::size_t>(c.param("kernel_tensor_n")));
  const auto est = dbar::kernel_estimate_check(cov, model, krho, graph, {cplx{0.0, 0.0}, cplx{0.4, 0.3}}, opt, &kmodel);
  b.check("G_near_slope", est.G.near_slope, -c.tol("near_slope_max_abs"), -c.tol("near_slope_min_abs"));
  b.check("G_far_eps", est.G.far.eps_fit, std::numeric_limits<double>::min(), inf);
  b.check("G_far_coverage", est.G.far.coverage, c.tol("coverage_G"), 1.0);
  b.artifact("decay_fit_G", io::to_json(est.G.far));
  if (est.has_canonical) {
    b.check("canonical_near_slope", est.canonical.near_slope, -c.tol("near_slope_max_abs"), -c.tol("near_slope_min_abs"));
    b.check("canonical_far_eps", est.canonical.far.eps_fit, std::numeric_limits<double>::min(), inf);
    b.check("canonical_far_coverage", est.canonical.far.coverage, c.tol("coverage_G"), 1.0);
    b.artifact("decay_fit_canonical", io::to_json(est.canonical.far));
  }
  b.lap("kernel_estimates");
}

void suite_compact_probe(Builder& b) {
  const auto& c = b.config();
  const weights::RhoMap rho(density(c.spec, c.L, c.n));
  const PowerInfo w = power_info(c.spec);
  const double rmax = c.param("probe_radius");
  std::vector<cplx> centers;
  for (double t = 0.5; t <= rmax + 1e-12; t += 0.5) centers.push_back(std::polar(t, 0.3));
  dbar::ProbeOptions popt;
  double reach = 0.0;
  for (cplx z : centers) reach = std::max(reach, std::abs(z) + popt.window * rho(z));

  const auto model = converged_model(c, reach);
  b.lap("model");
  const auto rep = dbar::compactness_probe(*model, rho, centers, popt);
  b.lap("probe");

  double rmin = inf;
  for (const auto& row : rep.rows) rmin = std::min(rmin, row.ratio);
  b.check("probe_min_ratio", rmin, std::numeric_limits<double>::min(), inf);
  b.check("probe_basis_degree", static_cast<double>(model->degree()), 1.0, kMaxDegree);
  const auto at = [&](double t) {
    for (const auto& row : rep.rows) {
      if (std::abs(row.abs_zj - t) < 1e-9) return row.norm_uj;
    }
    throw DomainError("probe has no centre at |z| = " + std::to_string(t));
  };
  if (w.radial && w.alpha == 2.0) {
    b.check("probe_spread", rep.spread, 1.0, c.tol("probe_spread"));
    b.check("verdict_non_compact", rep.verdict == dbar::ProbeVerdict::non_compact_signature ? 1.0 : 0.0, 1.0, 1.0);
  } else if (w.radial && w.alpha > 2.0 && rmax >= 3.0) {
    b.check("probe_decay_u3_over_u1", at(3.0) / at(1.0), c.tol("probe_decay_lower"), c.tol("probe_decay_upper"));
    b.check("verdict_compact", rep.verdict == dbar::ProbeVerdict::compact_signature ? 1.0 : 0.0, 1.0, 1.0);
  }
  io::Table t{"probe", io::kProbeColumns, {}};
  for (const auto& row : rep.rows) t.add({row.abs_zj, row.rho_zj, row.norm_uj, row.ratio});
  b.table(std::move(t));
  b.artifact("probe_summary", {{"spread", rep.spread},
                               {"decay", rep.decay},
                               {"verdict", std::string(dbar::to_string(rep.verdict))},
                               {"basis_degree", model->degree()}});
}

void suite_lp_bounds(Builder& b) {
  const auto& c = b.config();
  const auto model = tensor_model(c, static_cast<std::size_t>(c.param("tensor_n")));
  const weights::RhoMap rho(density(c.spec, c.L, c.n));
  b.lap("setup");
  const Grid& g = model.quad_grid();
  const auto& phi = model.quad_phi();
  Sampler s(stream_seed(c.seed, "lp-bounds"));
  std::vector<ComplexField> samples;
  for (int k = 0; k < 4; ++k) {
    const cplx center = s.in_disk(1.5);
    const double width = c.param("lp_bump_radius") * rho(center);
    ComplexField f(g, Meaning::function);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double chi = chi_disk((g.node(i) - center) / width);
      if (chi > 0.0) f[i] = chi * std::exp(phi[i]);
    }
    samples.push_back(std::move(f));
  }
  const auto out = dbar::minimal_solution_bound_check(model, rho, samples, {1.0, 2.0, inf});
  io::Table t{"lp_ratios", {"p", "sample", "ratio"}, {}};
  for (const auto& bound : out) {
    const std::string tag = std::isinf(bound.p) ? "inf" : std::to_string(static_cast<int>(bound.p));
    b.check("lp_min_ratio_p" + tag, bound.min_ratio, std::numeric_limits<double>::min(), inf);
    b.check("lp_spread_p" + tag, bound.max_ratio / bound.min_ratio, 1.0, c.tol("lp_spread"));
    for (std::size_t k = 0; k < bound.ratios.size(); ++k) {
      t.add({std::isinf(bound.p) ? -1.0 : bound.p, static_cast<double>(k), bound.ratios[k]});
    }
  }
  b.table(std::move(t));
  b.lap("bounds");
}

using SuiteFn = void (*)(Builder&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{
      {"gaussian-closed-form", suite_gaussian_closed_form},
      {"rho", suite_rho},
      {"doubling", suite_doubling},
      {"main-estimate", suite_main_estimate},
      {"diagonal", suite_diagonal},
      {"coarse", suite_coarse},
      {"distance-lemma", suite_distance_lemma},
      {"integrability", suite_integrability},
      {"submean", suite_submean},
      {"gadgets", suite_gadgets},
      {"dbar-kernel", suite_dbar_kernel},
      {"compact-probe", suite_compact_probe},
      {"lp-bounds", suite_lp_bounds},
  };
  return r;
}

std::size_t positive_count(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + ": missing");
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) throw ConfigError(where + "." + key + ": expected a positive integer");
  return v.get<std::size_t>();
}

std::map<std::string, double> named_reals(const json& j, const std::string& where,
                                          const std::map<std::string, double>& known, bool positive) {
  std::map<std::string, double> out;
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError(where + "." + k + ": unknown name");
    if (!v.is_number()) throw ConfigError(where + "." + k + ": expected a number");
    const double x = v.get<double>();
    if (positive && !(x > 0.0)) throw ConfigError(where + "." + k + ": must be positive");
    if (!std::isfinite(x)) throw ConfigError(where + "." + k + ": must be finite");
    out[k] = x;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"kernel_rel", 1e-6},
      {"gram_log", 1e-9},
      {"reproducing", 1e-6},
      {"rho_abs", 1e-6},
      {"rho_origin_abs", 1e-4},
      {"rho_far_rel", 0.1},
      {"growth_slope_abs", 0.1},
      {"near_constancy_max", 3.0},
      {"doubling_abs", 0.1},
      {"power_bound_constant", 50.0},
      {"eps_gauss_lower", 1.8},
      {"eps_gauss_upper", 2.2},
      {"coverage_kernel", 0.95},
      {"diagonal_spread", 5.0},
      {"diagonal_gauss_rel", 0.01},
      {"coarse_sep", 0.5},
      {"near_ratio", 0.02},
      {"near_ratio_spread", 3.0},
      {"integrability_spread", 10.0},
      {"submean_max", 10.0},
      {"gadget_rel", 0.02},
      {"regularized_lower", 0.1},
      {"regularized_upper", 10.0},
      {"regularized_sup_difference", 1.0},
      {"residual_max", 1e-2},
      {"halving", 0.5},
      {"G_residual", 5e-2},
      {"orthogonality", 1e-6},
      {"pythagoras", 1e-8},
      {"canonical_residual", 3e-2},
      {"near_slope_max_abs", 1.2},
      {"near_slope_min_abs", 0.8},
      {"coverage_G", 0.9},
      {"probe_spread", 1.5},
      {"probe_decay_lower", 0.2},
      {"probe_decay_upper", 0.6},
      {"lp_spread", 20.0},
  };
  return t;
}

const std::map<std::string, double>& default_params() {
  static const std::map<std::string, double> p{
      {"closed_form_radius", 1.5},
      {"pairs", 60},
      {"fit_sep_max", 8.0},
      {"holdout_sep_max", 6.0},
      {"pair_radius", 0.0},
      {"doubling_growth_threshold", 0.2},
      {"doubling_constant_cap", 1e4},
      {"distance_L", 4.0},
      {"distance_n", 129},
      {"distance_r", 1.5},
      {"distance_far_radius", 2.0},
      {"integrability_L", 12.0},
      {"integrability_n", 301},
      {"integrability_radius", 2.0},
      {"integrability_k", 2.0},
      {"integrability_eps", 1.0},
      {"submean_r", 0.5},
      {"submean_s", 1.0},
      {"gadget_L", 3.0},
      {"gadget_n", 97},
      {"manufactured_radius", 1.5},
      {"dbar_L", 3.0},
      {"dbar_n", 256},
      {"covering_n", 129},
      {"covering_r", 0.75},
      {"tensor_L", 6.0},
      {"tensor_n", 241},
      {"tensor_degree", 12},
      {"kernel_tensor_n", 481},
      {"probe_radius", 3.0},
      {"lp_bump_radius", 3.0},
  };
  return p;
}

double RunConfig::tol(const std::string& name) const {
  auto it = tolerances.find(name);
  return it != tolerances.end() ? it->second : default_tolerances().at(name);
}

double RunConfig::param(const std::string& name) const {
  auto it = params.find(name);
  return it != params.end() ? it->second : default_params().at(name);
}

bergman::ModelOptions RunConfig::model_options() const {
  bergman::ModelOptions o;
  o.degree = degree;
  o.L = L;
  o.mode = mode;
  o.quad_nodes = quad_nodes;
  return o;
}

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  static const std::vector<std::string> keys{"weight", "grid", "basis", "quad", "tolerances",
                                             "params", "suites", "output", "seed"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError(k + ": unknown field");
  }
  RunConfig c;
  if (!j.contains("weight")) throw ConfigError("weight: missing");
  c.weight = j.at("weight");
  c.spec = io::weight_from_json(c.weight, base_dir);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (!g.is_object()) throw ConfigError("grid: expected an object");
    if (!g.contains("L") || !g.at("L").is_number() || !(g.at("L").get<double>() > 0.0)) {
      throw ConfigError("grid.L: expected a positive number");
    }
    c.L = g.at("L").get<double>();
    c.n = positive_count(g, "n", "grid");
    if (c.n < 64) throw ConfigError("grid.n: must be at least 64");
  }
  if (j.contains("basis")) c.degree = positive_count(j.at("basis"), "degree", "basis");
  if (j.contains("quad")) {
    const auto& q = j.at("quad");
    if (!q.is_object()) throw ConfigError("quad: expected an object");
    if (q.contains("mode")) {
      if (!q.at("mode").is_string()) throw ConfigError("quad.mode: expected a string");
      try {
        c.mode = bergman::quad_mode_from_string(q.at("mode").get<std::string>());
      } catch (const Error&) {
        throw ConfigError("quad.mode: expected 'tensor' or 'radial'");
      }
    }
    if (q.contains("nodes")) c.quad_nodes = positive_count(q, "nodes", "quad");
  }
  if (j.contains("tolerances")) c.tolerances = named_reals(j.at("tolerances"), "tolerances", default_tolerances(), true);
  if (j.contains("params")) c.params = named_reals(j.at("params"), "params", default_params(), false);
  if (j.contains("suites")) {
    const auto& s = j.at("suites");
    if (!s.is_array()) throw ConfigError("suites: expected an array");
    for (const auto& name : s) {
      if (!name.is_string()) throw ConfigError("suites: expected suite names");
      const auto str = name.get<std::string>();
      if (std::find(suite_names().begin(), suite_names().end(), str) == suite_names().end()) {
        throw ConfigError("suites: unknown suite '" + str + "'");
      }
      c.suites.push_back(str);
    }
  } else {
    c.suites = suite_names();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output: expected a path");
    c.output = j.at("output").get<std::string>();
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  return c;
}

RunConfig load_config(const fs::path& path) { return parse_config(io::read_json(path), path.parent_path()); }

void apply_environment(RunConfig& config) {
  if (const char* s = std::getenv("FOCK_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used != std::string(s).size()) throw std::invalid_argument(s);
      config.seed = v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("FOCK_SEED: expected a nonnegative integer, got '") + s + "'");
    }
  }
}

json to_json(const RunConfig& c) {
  json tol = json::object(), par = json::object();
  for (const auto& [k, v] : default_tolerances()) tol[k] = c.tolerances.count(k) ? c.tolerances.at(k) : v;
  for (const auto& [k, v] : default_params()) par[k] = c.param(k);
  return {{"weight", c.weight},
          {"grid", {{"L", c.L}, {"n", c.n}}},
          {"basis", {{"degree", c.degree}}},
          {"quad", {{"mode", std::string(bergman::to_string(c.mode))}, {"nodes", c.quad_nodes}}},
          {"tolerances", tol},
          {"params", par},
          {"suites", c.suites},
          {"output", c.output},
          {"seed", c.seed}};
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 15]);
  }
  return out;
}

std::string config_hash(const RunConfig& config) { return sha256_hex(to_json(config).dump()); }

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

Check Check::make(std::string name, double value, double lower, double upper) {
  Check c{std::move(name), value, lower, upper, false};
  c.pass = c.recompute();
  return c;
}

bool Check::recompute() const { return value >= lower && value <= upper; }

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check& SuiteReport::check(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw DomainError("suite " + suite + " has no check '" + std::string(name) + "'");
}

const io::Table& SuiteReport::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw DomainError("suite " + suite + " has no table '" + std::string(name) + "'");
}

SuiteReport run_suite(const RunConfig& config, std::string_view suite) {
  const auto& r = registry();
  auto it = std::find_if(r.begin(), r.end(), [&](const auto& e) { return e.first == suite; });
  if (it == r.end()) throw ConfigError("unknown suite '" + std::string(suite) + "'");
  Builder b(config, it->first);
  try {
    it->second(b);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw SuiteError("suite " + it->first + ": " + e.what());
  }
  return b.finish();
}

std::vector<SuiteReport> run_suites(const RunConfig& config, const std::vector<std::string>& suites,
                                    bool parallel) {
  std::vector<SuiteReport> out;
  if (!parallel) {
    for (const auto& s : suites) out.push_back(run_suite(config, s));
    return out;
  }
  std::vector<std::future<SuiteReport>> jobs;
  for (const auto& s : suites) jobs.push_back(std::async(std::launch::async, [&config, s] { return run_suite(config, s); }));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

json to_json(const SuiteReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    const auto num = [](double v) -> json {
      if (std::isfinite(v)) return v;
      return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    };
    checks.push_back({{"name", c.name}, {"value", num(c.value)}, {"bound", {num(c.lower), num(c.upper)}}, {"pass", c.pass}});
  }
  json tables = json::array();
  for (const auto& t : r.tables) tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}});
  json artifacts = json::object();
  for (const auto& [k, v] : r.artifacts) artifacts[k] = v;
  return {{"suite", r.suite},
          {"weight", r.weight},
          {"checks", checks},
          {"tables", tables},
          {"artifacts", artifacts},
          {"passed", r.passed()},
          {"provenance", {{"config_hash", r.config_hash}}}};
}

fs::path write_report(const SuiteReport& r, const fs::path& dir) {
  const fs::path out = dir / r.suite;
  fs::create_directories(out);
  io::write_json(to_json(r), out / "report.json");
  json t = json::object();
  double total = 0.0;
  for (const auto& [phase, sec] : r.timings) {
    t[phase] = sec;
    total += sec;
  }
  t["total"] = total;
  io::write_json(t, out / "timings.json");
  for (const auto& table : r.tables) io::write_csv(table, out / (table.name + ".csv"));
  for (const auto& [name, j] : r.artifacts) io::write_json(j, out / (name + ".json"));
  return out;
}

fs::path emit_plot_data(const SuiteReport& r, std::string_view table, const fs::path& dir) {
  const auto& t = r.table(table);
  const fs::path path = dir / r.suite / (t.name + ".csv");
  io::write_csv(t, path);
  return path;
}

double rho_at(const weights::WeightSpec& spec, cplx z, double L, std::size_t n) {
  if (L <= 0.0) L = std::max(6.0, 2.0 * std::abs(z) + 2.0);
  return weights::rho(weights::laplacian(weights::sample_weight(spec, L, n)), z);
}

io::Table kernel_table(const RunConfig& config, const std::vector<std::pair<cplx, cplx>>& pairs) {
  const bergman::KernelModel model(config.spec, config.model_options());
  const weights::RhoMap rho(density(config.spec, config.L, config.n));
  return kernel_rows(model, rho, pairs, "kernel");
}

}  // namespace fock::harness
