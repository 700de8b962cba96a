#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fock/metric.hpp"
#include "fock/quadrature.hpp"
#include "fock/weights.hpp"

using namespace fock;
using namespace fock::metric;
namespace w = fock::weights;

namespace {
const double pi = std::numbers::pi;
const double sqrt_pi = std::sqrt(pi);

GridField rho_field(const w::WeightSpec& spec, double L, std::size_t n) {
  auto mu = w::laplacian(w::sample_weight(spec, L, n));
  return w::RhoMap(mu).sample(mu.grid());
}

std::size_t axis_offset(const MetricGraph& g) {
  for (std::size_t o = 0; o < g.offsets().size(); ++o) {
    if (g.offsets()[o] == std::pair{1, 0}) return o;
  }
  return 0;
}
}  // namespace

TEST_CASE("edge weights") {
  GridField one(Grid(5.0, 11), Meaning::rho, 1.0);
  MetricGraph unit(one, 1);
  CHECK(unit.offsets().size() == 8);
  CHECK(unit.edge_weight(unit.grid().index(3, 3), axis_offset(unit)) == doctest::Approx(1.0));

  auto gauss = build_metric_graph(rho_field(w::WeightSpec::gaussian(), 4.0, 129));
  const double h = gauss.grid().spacing();
  const auto o = axis_offset(gauss);
  for (std::size_t k = 0; k < gauss.grid().size(); k += 97) {
    if (gauss.grid().node(k).real() < 3.9) CHECK(gauss.edge_weight(k, o) == doctest::Approx(2.0 * sqrt_pi * h));
  }

  auto quartic = build_metric_graph(rho_field(w::WeightSpec::radial_power(4.0), 4.0, 129));
  const std::size_t j = 64;
  double prev = 0.0;
  for (std::size_t i = 70; i < 120; ++i) {
    const double wgt = quartic.edge_weight(quartic.grid().index(i, j), o);
    CHECK(wgt > prev);
    prev = wgt;
  }

  GridField bad(Grid(1.0, 5), Meaning::rho, 1.0);
  bad[3] = 0.0;
  CHECK_THROWS_AS(build_metric_graph(bad), DomainError);
}

TEST_CASE("stencil anisotropy") {
  CHECK(stencil_anisotropy(1) == doctest::Approx(1.0 / std::cos(pi / 8.0)));
  CHECK(stencil_anisotropy(3) < 1.02);
  CHECK(stencil_anisotropy(3) < stencil_anisotropy(2));
  // Brute-force oracle: the radius-1 metric in direction theta.
  double worst = 0.0;
  for (double t = 0.0; t < pi / 4; t += 1e-4) {
    worst = std::max(worst, std::cos(t) - std::sin(t) + std::sqrt(2.0) * std::sin(t));
  }
  CHECK(stencil_anisotropy(1) == doctest::Approx(worst).epsilon(1e-6));
}

TEST_CASE("graph distances") {
  auto gauss = build_metric_graph(rho_field(w::WeightSpec::gaussian(), 4.0, 129));
  CHECK(d_phi(gauss, 0.0, 0.0) == 0.0);
  CHECK(d_phi(gauss, 0.0, 1.0) == doctest::Approx(2.0 * sqrt_pi).epsilon(0.02));
  const Grid& gg = gauss.grid();
  const double chord = std::abs(gg.node(gg.snap({0.3, 0.7})) - gg.node(gg.snap({-1.1, 0.2})));
  CHECK(d_phi(gauss, {0.3, 0.7}, {-1.1, 0.2}) == doctest::Approx(chord * 2.0 * sqrt_pi).epsilon(0.02));
  CHECK_THROWS_AS(d_phi(gauss, 0.0, {3.95, 0.0}), DomainError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 5; ++t) {
    const cplx a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    CHECK(d_phi(gauss, a, b) == d_phi(gauss, b, a));
    CHECK(d_phi(gauss, a, c) <= d_phi(gauss, a, b) + d_phi(gauss, b, c) + 1e-12);
  }

  auto quartic = build_metric_graph(rho_field(w::WeightSpec::radial_power(4.0), 4.0, 129));
  const auto dist = quartic.distances_from(0.0);
  double prev = -1.0;
  for (double x = 0.0; x <= 3.0; x += quartic.grid().spacing()) {
    const double d = dist[quartic.grid().snap({x, 0.0})];
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("graph distances converge under refinement") {
  auto coarse = build_metric_graph(rho_field(w::WeightSpec::gaussian(), 3.0, 97));
  auto fine = build_metric_graph(rho_field(w::WeightSpec::gaussian(), 3.0, 193));
  for (cplx p : {cplx{1.0, 0.0}, cplx{1.25, 0.625}, cplx{-0.5, 2.0}}) {
    const double a = d_phi(coarse, 0.0, p), b = d_phi(fine, 0.0, p);
    CHECK(std::abs(a - b) / b < 0.03);
  }
}

TEST_CASE("distance bounds") {
  auto gauss = build_metric_graph(rho_field(w::WeightSpec::gaussian(), 4.0, 129));
  std::vector<cplx> far;
  for (int k = 0; k < 16; ++k) far.push_back(std::polar(0.5 + 0.15 * k, 0.4 * k));
  auto rep = distance_bounds_check(gauss, 0.0, 1.5, far);
  CHECK(rep.near_samples >= 8);
  CHECK(rep.near_min >= 0.98);
  CHECK(rep.near_max <= 1.02);
  CHECK(rep.far_lower_slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rep.far_upper_slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rep.common_delta);

  auto quartic = build_metric_graph(rho_field(w::WeightSpec::radial_power(4.0), 4.0, 129));
  std::vector<cplx> qfar;
  for (int k = 0; k < 16; ++k) qfar.push_back(std::polar(0.5 + 0.1 * k, 0.4 * k));
  auto q = distance_bounds_check(quartic, 0.0, 1.0, qfar);
  CHECK(q.far_lower_slope > 0.3);
  CHECK(q.far_upper_slope < 1.8);
  CHECK(q.far_lower_slope <= q.far_upper_slope);
  CHECK(std::isfinite(q.near_max));
  CHECK(q.near_min > 0.0);

  CHECK_THROWS_AS(distance_bounds_check(gauss, 0.0, 1.5, {far.begin(), far.begin() + 4}), DomainError);
  CHECK_THROWS_AS(distance_bounds_check(gauss, 0.0, 1.5, std::vector<cplx>(8, 0.1)), DomainError);
}

TEST_CASE("integrability of the metric exponential") {
  const double L = 12.0;
  auto mu = w::laplacian(w::sample_weight(w::WeightSpec::gaussian(), L, 301));
  auto graph = build_metric_graph(w::RhoMap(mu).sample(mu.grid()));
  // Radial oracle: 4 * 2 pi * int_0^inf t exp(-2 sqrt(pi) t) dt.
  auto rule = quad::gauss_legendre(200, 0.0, 30.0);
  double oracle = 0.0;
  for (std::size_t k = 0; k < 200; ++k) {
    oracle += rule.weights[k] * 8.0 * pi * rule.nodes[k] * std::exp(-2.0 * sqrt_pi * rule.nodes[k]);
  }
  CHECK(oracle == doctest::Approx(2.0).epsilon(1e-10));
  const double v0 = integrability_check(mu, graph, 0.0, 0.0, 1.0);
  CHECK(v0 == doctest::Approx(oracle).epsilon(0.03));
  CHECK(v0 >= std::exp(-1.0));

  std::vector<double> ratios;
  for (cplx z : {cplx{0, 0}, cplx{1, 0}, cplx{2, 0}}) {
    ratios.push_back(integrability_check(mu, graph, z, 2.0, 1.0) / integrability_check(mu, graph, z, 0.0, 1.0));
  }
  for (double r : ratios) CHECK(r == doctest::Approx(ratios[0]).epsilon(0.05));

  auto small = w::laplacian(w::sample_weight(w::WeightSpec::gaussian(), 3.0, 97));
  auto small_graph = build_metric_graph(w::RhoMap(small).sample(small.grid()));
  CHECK_THROWS_AS(integrability_check(small, small_graph, 0.0, 0.0, 1.0), BoxError);
}
