#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fock/quadrature.hpp"
#include "fock/weights.hpp"

using namespace fock;
using namespace fock::weights;

namespace {
const double pi = std::numbers::pi;

GridField gaussian_mu(double L = 6.0, std::size_t n = 129) {
  return laplacian(sample_weight(WeightSpec::gaussian(), L, n));
}
GridField quartic_mu(double L = 6.0, std::size_t n = 129) {
  return laplacian(sample_weight(WeightSpec::radial_power(4.0), L, n));
}
}  // namespace

TEST_CASE("sampled weights") {
  auto g = sample_weight(WeightSpec::gaussian(), 6.0, 241);
  CHECK(g.nearest({1.0, 0.0}) == 1.0);
  CHECK(g.exact()->at({1.0, 0.0}) == 1.0);
  auto q = sample_weight(WeightSpec::radial_power(4.0), 6.0, 241);
  CHECK(q.nearest({2.0, 0.0}) == 16.0);
  CHECK_THROWS_AS(sample_weight(WeightSpec::gaussian(), 6.0, 32), DomainError);
  CHECK_THROWS_AS(sample_weight(WeightSpec::radial_power(-1.0), 6.0, 64), DomainError);
  CHECK_THROWS_AS(sample_weight(WeightSpec::gaussian(), -1.0, 64), DomainError);
}

TEST_CASE("bumps that break subharmonicity are rejected") {
  PerturbedRadial p{{2.0, 1.0}, {Bump{{1.0, 1.0}, 1.0, 0.3}}};
  WeightSpec spec{p};
  // Discrete oracle: the stencil Laplacian of the sampled field goes negative.
  const Grid grid(4.0, 129);
  auto f = GridField::sample(grid, Meaning::weight, [&](cplx z) { return evaluate_phi(spec, z); });
  auto lap = stencil_laplacian(f);
  double worst = 0.0;
  for (double v : lap.values()) worst = std::min(worst, v);
  CHECK(worst < 0.0);
  CHECK_THROWS_AS(sample_weight(spec, 4.0, 129), SubharmonicityError);

  PerturbedRadial mild{{2.0, 1.0}, {Bump{{1.0, 1.0}, 0.05, 1.0}}};
  CHECK_NOTHROW(sample_weight(WeightSpec{mild}, 4.0, 129));
}

TEST_CASE("laplacian densities") {
  auto mu = gaussian_mu();
  for (double v : mu.values()) CHECK(v == doctest::Approx(4.0));
  auto q = quartic_mu(6.0, 121);
  CHECK(q.nearest({1.0, 0.0}) == doctest::Approx(16.0));
  CHECK(q.nearest({0.0, 0.0}) == doctest::Approx(0.0));
  // Stencil cross-check on a field without closed form attached.
  GridField raw(q.grid(), Meaning::weight);
  for (std::size_t k = 0; k < raw.grid().size(); ++k) raw[k] = std::pow(std::abs(raw.grid().node(k)), 4);
  auto s = stencil_laplacian(raw);
  CHECK(s.nearest({1.0, 0.0}) == doctest::Approx(16.0).epsilon(1e-2));
}

TEST_CASE("disk masses") {
  auto mu = gaussian_mu();
  CHECK(mass_in_disk(mu, 0.0, 1.0) == doctest::Approx(4.0 * pi).epsilon(1e-12));
  CHECK(mass_in_disk(mu, {0.3, -1.1}, 0.0) == 0.0);
  auto q = quartic_mu();
  // Radial oracle: integral of 16 t^2 over D(0,1) = 2 pi * 16 / 4.
  auto oracle = quad::gauss_legendre(16, 0.0, 1.0);
  double expect = 0.0;
  for (std::size_t k = 0; k < 16; ++k) expect += oracle.weights[k] * 2.0 * pi * 16.0 * std::pow(oracle.nodes[k], 3);
  CHECK(mass_in_disk(q, 0.0, 1.0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(8.0 * pi));
  CHECK_THROWS_AS(mass_in_disk(q, {5.5, 0.0}, 1.0), BoxError);
  CHECK_THROWS_AS(mass_in_disk(q, 0.0, -1.0), DomainError);

  // Cell rule on a density without closed form, against the exact value.
  GridField raw(q.grid(), Meaning::density, q.values());
  CHECK(mass_in_disk(raw, {0.5, 0.2}, 1.0) ==
        doctest::Approx(quad::disk_integral([](cplx u) { return 16.0 * std::norm(u); }, {0.5, 0.2}, 1.0, 32, 64)).epsilon(5e-3));
}

TEST_CASE("disk mass is nondecreasing in r") {
  auto q = quartic_mu();
  GridField raw(q.grid(), Meaning::density, q.values());
  for (cplx z : {cplx{0.0, 0.0}, cplx{1.3, -0.4}}) {
    double prev = 0.0;
    for (double r = 0.01; r < 2.0; r += 0.037) {
      const double m = mass_in_disk(q, z, r);
      const double mc = mass_in_disk(raw, z, r);
      CHECK(m >= prev);
      CHECK(mc >= 0.0);
      prev = m;
    }
  }
}

TEST_CASE("rho closed forms") {
  auto mu = gaussian_mu();
  for (cplx z : {cplx{0, 0}, cplx{1, 0.5}, cplx{-2, 1}, cplx{3, -3}}) {
    CHECK(std::abs(rho(mu, z) - 1.0 / (2.0 * std::sqrt(pi))) < 1e-8);
  }
  auto q = quartic_mu();
  CHECK(std::abs(rho(q, 0.0) - std::pow(8.0 * pi, -0.25)) < 1e-8);
  CHECK(rho(q, 3.0) == doctest::Approx(1.0 / (4.0 * std::sqrt(pi) * 3.0)).epsilon(0.1));

  auto small = laplacian(sample_weight(WeightSpec::radial_power(2.0, 0.001), 1.0, 64));
  CHECK_THROWS_AS(rho(small, 0.0), BoxError);
}

TEST_CASE("rho map agrees with pointwise root finding") {
  auto q = quartic_mu();
  RhoMap map(q);
  CHECK(map.radial());
  for (cplx z : {cplx{0, 0}, cplx{0.7, 0.1}, cplx{-2.2, 1.9}, cplx{4, 3}}) {
    CHECK(map(z) == doctest::Approx(rho(q, z)).epsilon(1e-7));
  }
  GridField raw(q.grid(), Meaning::density, q.values());
  RhoMap coarse(raw);
  CHECK_FALSE(coarse.radial());
  CHECK(coarse({1.5, 0.0}) == doctest::Approx(map({1.5, 0.0})).epsilon(0.03));
}

TEST_CASE("rho properties") {
  RhoMap map(quartic_mu());
  CHECK(rho_growth_slope(map, 2.0, 4.0) == doctest::Approx(-1.0).epsilon(0.1));
  std::vector<cplx> pts;
  for (double x = 0.05; x < 4.0; x += 0.11) pts.push_back({x, 0.3 * x});
  const double c = rho_near_constancy(map, pts);
  CHECK(c >= 1.0);
  CHECK(c < 3.0);
  auto fit = quotient_bound_fit(map, pts);
  CHECK(fit.pairs > 10);
  CHECK(fit.slope < 1.0);
}

TEST_CASE("doubling diagnostics") {
  const std::vector<double> radii{0.25, 0.5, 0.75, 1.0, 1.5};
  const std::vector<cplx> centers{{0, 0}, {1, 0}, {0, -1.5}};
  auto g = doubling_report(gaussian_mu(), radii, centers);
  CHECK(g.constant_estimate == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(g.verdict == DoublingVerdict::doubling);
  // Lebesgue scaling: mass ratio is the squared radius ratio.
  CHECK(g.gamma_estimate == doctest::Approx(0.5).epsilon(1e-6));

  auto q = doubling_report(quartic_mu(), radii, centers);
  CHECK(q.verdict == DoublingVerdict::doubling);
  CHECK(q.gamma_estimate > 0.0);
  CHECK(q.constant_estimate <= 16.0 + 1e-9);

  // Laplacian e^{2x}: ratio at 0 is 2 I1(4r) / I1(2r).
  const Grid grid(5.0, 257);
  auto phi = std::make_shared<GridField>(
      GridField::sample(grid, Meaning::weight, [](cplx z) { return std::exp(2.0 * z.real()) / 4.0; }));
  auto mu = laplacian(sample_weight(WeightSpec{GridSampled{phi}}, 5.0, 257));
  auto e = doubling_report(mu, {0.25, 0.5, 1.0, 1.5, 2.0}, {{0, 0}, {0.3, 0.3}});
  CHECK(e.verdict == DoublingVerdict::suspect_non_doubling);
  for (const auto& s : e.samples) {
    if (s.z != cplx{0, 0}) continue;
    const double oracle = 2.0 * std::cyl_bessel_i(1.0, 4.0 * s.r) / std::cyl_bessel_i(1.0, 2.0 * s.r);
    CHECK(s.ratio == doctest::Approx(oracle).epsilon(0.02));
  }
  CHECK_THROWS_AS(doubling_report(mu, {}, {{0, 0}}), DomainError);
}

TEST_CASE("power bounds around the doubling exponent") {
  auto mu = quartic_mu();
  RhoMap map(mu);
  auto d = doubling_report(mu, {0.25, 0.5, 1.0}, {{0, 0}, {1, 0}, {0, 1.5}});
  auto pb = power_bound_check(mu, map, {{0.5, 0}, {1, 1}, {0, 1.5}}, {1, 2, 4, 8}, d.gamma_estimate);
  CHECK(std::isfinite(pb.constant));
  CHECK(pb.min_slope > 0.0);
  CHECK(pb.min_slope <= pb.max_slope);
}

TEST_CASE("regularized weight") {
  const Grid grid(4.0, 129);
  auto gauss = regularize_weight(WeightSpec::gaussian(), grid);
  CHECK(gauss.sup_difference == doctest::Approx(1.0 / (8.0 * pi)).epsilon(1e-8));
  CHECK(gauss.lower == doctest::Approx(1.0 / pi).epsilon(1e-6));
  CHECK(gauss.upper == doctest::Approx(1.0 / pi).epsilon(1e-6));

  auto quartic = regularize_weight(WeightSpec::radial_power(4.0), grid);
  CHECK(quartic.lower >= 0.1);
  CHECK(quartic.upper <= 10.0);

  auto phi = std::make_shared<GridField>(
      GridField::sample(grid, Meaning::weight, [](cplx z) { return std::norm(z); }));
  auto sampled = regularize_weight(WeightSpec{GridSampled{phi}}, grid);
  const auto mask = interior_mask(grid, gauss.ring + grid.spacing());
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (mask[k]) worst = std::max(worst, std::abs(sampled.field[k] - gauss.field[k]));
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("power averages over disks") {
  // At the centre: 2 R^p / (p + 2).
  CHECK(power_disk_average(-1.0, 0.0, 0.5) == doctest::Approx(2.0 / 0.5));
  CHECK(power_disk_average(2.0, 0.7, 0.4) == doctest::Approx(0.49 + 0.08).epsilon(1e-12));
  const double brute = quad::disk_integral([](cplx u) { return std::pow(std::abs(u), 0.5); }, {2.0, 0.0}, 0.6, 32, 64) /
                       (pi * 0.36);
  CHECK(power_disk_average(0.5, 2.0, 0.6) == doctest::Approx(brute).epsilon(1e-10));
  CHECK_THROWS_AS(power_disk_average(-2.5, 1.0, 1.0), DomainError);
}

TEST_CASE("gadgets around a point") {
  const Grid grid(3.0, 97);
  auto half = proof_gadget_suite(WeightSpec::gaussian(), 0.0, 0.5, grid);
  CHECK(half.big_phi_at_zeta_scaled == doctest::Approx(0.125).epsilon(1e-6));
  auto quarter = proof_gadget_suite(WeightSpec::gaussian(), 0.0, 0.25, grid);
  CHECK(quarter.big_phi_at_zeta_scaled == doctest::Approx(0.0625).epsilon(1e-6));

  CHECK(half.psi_minus_phi_min >= -1e-12);
  CHECK(half.psi_minus_phi_max_near <= std::pow(3.0, 0.5));
  for (double v : half.big_phi.values()) CHECK(v >= 0.0);

  // Brute-force oracle for the averaged squared derivative at an off-centre node.
  const double R = half.rho_zeta;
  const std::size_t k = grid.index(70, 55);
  const cplx w = grid.node(k);
  const double oracle =
      quad::disk_integral([&](cplx u) { return 0.0625 * std::pow(std::abs(u), -1.0) / R; }, w, R, 48, 96) / (pi * R * R);
  CHECK(half.big_phi[k] == doctest::Approx(oracle).epsilon(1e-8));

  auto tiny = proof_gadget_suite(WeightSpec::gaussian(), 0.0, 0.05, grid);
  CHECK(tiny.c1 < half.c1);
  CHECK(tiny.c2 < half.c2);
  CHECK_THROWS_AS(proof_gadget_suite(WeightSpec::gaussian(), 0.0, 1.0, grid), DomainError);
  CHECK_THROWS_AS(proof_gadget_suite(WeightSpec::gaussian(), {2.9, 0.0}, 0.5, grid), DomainError);
}
