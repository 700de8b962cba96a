#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fock/dbar.hpp"
#include "fock/metric.hpp"
#include "fock/quadrature.hpp"

using namespace fock;
using namespace fock::dbar;
namespace w = fock::weights;
namespace b = fock::bergman;

namespace {
const double pi = std::numbers::pi;
const double gauss_rho = 1.0 / (2.0 * std::sqrt(pi));

// Tensor Gauss-Legendre integral of 1/zeta over a rectangle away from 0.
cplx brute_cell(double x0, double x1, double y0, double y1) {
  const auto rx = quad::gauss_legendre(40, x0, x1);
  const auto ry = quad::gauss_legendre(40, y0, y1);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
    for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
      acc += rx.weights[i] * ry.weights[j] / cplx{rx.nodes[i], ry.nodes[j]};
    }
  }
  return acc;
}

// chi(z) = exp(-1/(1-|z|^2)) on the unit disk.
double chi_disk(cplx z) {
  const double s = std::norm(z);
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}
// u0 = chi(z/R) conj(z) and f = dbar u0 = chi(z/R) (1 - s / (1 - s)^2), s = |z|^2/R^2.
constexpr double kR = 1.5;
cplx manufactured_u(cplx z) { return chi_disk(z / kR) * std::conj(z); }
cplx manufactured_f(cplx z) {
  const double s = std::norm(z) / (kR * kR);
  if (s >= 1.0) return 0.0;
  return chi_disk(z / kR) * (1.0 - s / ((1.0 - s) * (1.0 - s)));
}

b::KernelModel gaussian_radial(std::size_t N = 40, double L = 6.0) {
  b::ModelOptions o;
  o.degree = N;
  o.L = L;
  return b::KernelModel(w::WeightSpec::gaussian(), o);
}

b::KernelModel gaussian_tensor(std::size_t N = 12, double L = 6.0, std::size_t n = 241) {
  b::ModelOptions o;
  o.degree = N;
  o.L = L;
  o.mode = b::QuadMode::tensor;
  o.quad_nodes = n;
  return b::KernelModel(w::WeightSpec::gaussian(), o);
}

GridField constant_rho(const Grid& g) {
  return GridField(g, Meaning::rho, gauss_rho);
}
}  // namespace

TEST_CASE("closed-form cell integrals of 1/zeta") {
  const cplx a = cell_integral_inverse(0.3, 0.5, -0.1, 0.2);
  CHECK(std::abs(a - brute_cell(0.3, 0.5, -0.1, 0.2)) < 1e-12);
  const cplx c = cell_integral_inverse(-0.1, 0.1, 0.2, 0.4);
  CHECK(std::abs(c - brute_cell(-0.1, 0.1, 0.2, 0.4)) < 1e-12);
  CHECK(std::abs(cell_integral_inverse(-0.1, 0.1, -0.1, 0.1)) < 1e-15);
  // Singular off-centre cell: the symmetric core integrates to 0, the rest is regular.
  const cplx s = cell_integral_inverse(-0.1, 0.3, -0.2, 0.1);
  const cplx oracle = brute_cell(0.1, 0.3, -0.2, 0.1) + brute_cell(-0.1, 0.1, -0.2, -0.1);
  CHECK(std::abs(s - oracle) < 1e-12);
  // Far cells approach h^2 / zeta.
  const cplx far = cell_integral_inverse(2.99, 3.01, 0.99, 1.01);
  CHECK(std::abs(far - 4e-4 / cplx{3.0, 1.0}) < 1e-10);
}

TEST_CASE("Cauchy transform of the unit disk indicator") {
  const Grid g(3.0, 257);
  const double h = g.spacing();
  auto f = ComplexField::sample(g, Meaning::function, [&](cplx z) {
    return cplx{quad::disk_rect_area(0.0, 1.0, z.real() - h / 2, z.real() + h / 2, z.imag() - h / 2,
                                     z.imag() + h / 2) / (h * h), 0.0};
  });
  const auto u = cauchy_transform(f);
  const cplx inside{0.3, 0.2};
  CHECK(std::abs(u.nearest(inside) - std::conj(g.node(g.snap(inside)))) < 2e-3);
  // Outside the disk u = 1/z, compared at the nodes nearest the probes.
  for (cplx probe : {cplx{2.0, 0.0}, cplx{0.0, -2.5}}) {
    const cplx node = g.node(g.snap(probe));
    CHECK(std::abs(u.nearest(probe) - 1.0 / node) < 1e-3);
  }

  ComplexField zero(g, Meaning::function);
  const auto u0 = cauchy_transform(zero);
  for (const cplx& v : u0.values()) CHECK(v == cplx{0.0, 0.0});

  ComplexField edge(g, Meaning::function);
  edge(0, 100) = 1.0;
  CHECK_THROWS_AS(cauchy_transform(edge), BoxError);
}

TEST_CASE("Cauchy transform reproduces a compactly supported solution") {
  double err_prev = 0.0;
  for (std::size_t n : {129, 257}) {
    const Grid g(3.0, n);
    auto f = ComplexField::sample(g, Meaning::function, manufactured_f);
    const auto u = cauchy_transform(f);
    double err = 0.0, size = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      err = std::max(err, std::abs(u[k] - manufactured_u(g.node(k))));
      size = std::max(size, std::abs(manufactured_u(g.node(k))));
    }
    CHECK(err < 1e-2 * size);
    if (err_prev > 0.0) CHECK(err < 0.55 * err_prev);
    err_prev = err;
    const GridField zero_phi(g, Meaning::weight, 0.0);
    // Central differences of the exact u0 set the floor of the residual.
    const auto exact = ComplexField::sample(g, Meaning::function, manufactured_u);
    const double floor = dbar_residual(exact, f, zero_phi);
    CHECK(dbar_residual(u, f, zero_phi) < 2.0 * floor);
  }
}

TEST_CASE("partition of unity") {
  const Grid g(3.0, 129);
  auto cov = build_covering(constant_rho(g), 0.75);
  CHECK(cov.centers.size() > 50);
  CHECK(cov.max_overlap <= 9);
  CHECK(cov.gradient_constant > 0.0);
  CHECK(std::isfinite(cov.gradient_constant));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.9, 2.9);
  for (int k = 0; k < 100; ++k) {
    double sum = 0.0;
    for (const auto& [c, chi] : cov.partition_at({u(rng), u(rng)})) {
      sum += chi;
      CHECK(chi >= 0.0);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
  // Node sums and supports.
  std::vector<double> sum(g.size(), 0.0);
  for (std::size_t c = 0; c < cov.centers.size(); ++c) {
    for (const auto& e : cov.partition[c]) {
      sum[e.node] += e.chi;
      CHECK(std::abs(g.node(e.node) - cov.centers[c]) < cov.r * cov.center_rho[c]);
    }
  }
  for (double s : sum) CHECK(s == doctest::Approx(1.0).epsilon(1e-10));

  // Separation oracle: maximality means every node is close to a centre.
  auto wide = build_covering(constant_rho(g), 1.5);
  double worst_gap = 0.0, min_nn = 1e9, max_nn = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    double best = 1e9;
    for (cplx c : wide.centers) best = std::min(best, std::abs(g.node(k) - c));
    worst_gap = std::max(worst_gap, best);
  }
  CHECK(worst_gap < wide.separation * wide.r * gauss_rho + 1e-12);
  for (std::size_t i = 0; i < wide.centers.size(); ++i) {
    if (std::abs(wide.centers[i]) > 2.0) continue;
    double nn = 1e9;
    for (std::size_t j = 0; j < wide.centers.size(); ++j) {
      if (i != j) nn = std::min(nn, std::abs(wide.centers[i] - wide.centers[j]));
    }
    min_nn = std::min(min_nn, nn);
    max_nn = std::max(max_nn, nn);
  }
  CHECK(min_nn >= gauss_rho);
  CHECK(max_nn <= 2.0 * gauss_rho);

  CHECK_THROWS_AS(build_covering(constant_rho(g), 0.3), DomainError);
  CHECK_THROWS_AS(build_covering(constant_rho(g), 2.5), DomainError);
}

TEST_CASE("covering density follows rho") {
  const auto spec = w::WeightSpec::radial_power(4.0);
  auto mu = w::laplacian(w::sample_weight(spec, 2.5, 201));
  w::RhoMap rho(mu);
  auto cov = build_covering(rho.sample(mu.grid()), 0.75);
  auto density = [&](double a, double bnd) {
    std::size_t count = 0;
    for (cplx c : cov.centers) {
      if (std::abs(c) >= a && std::abs(c) < bnd) ++count;
    }
    return static_cast<double>(count) / (pi * (bnd * bnd - a * a));
  };
  const double d1 = density(0.0, 0.7);
  const double d2 = density(0.7, 1.4);
  const double d3 = density(1.4, 2.1);
  CHECK(d1 < d2);
  CHECK(d2 < d3);
}

TEST_CASE("nonvanishing certificates") {
  const Grid g(3.0, 129);
  auto cov = build_covering(constant_rho(g), 0.75);
  auto model = gaussian_radial();
  certify_covering(cov, model);
  REQUIRE(cov.certified());
  for (double c : cov.certificates) CHECK(c > 0.0);
  // Gaussian oracle: |k_w(z)| e^{-|z|^2} = sqrt(2/pi) e^{-|z-w|^2}, smallest at |z - w| = r rho.
  const double oracle = std::sqrt(2.0 / pi) * std::exp(-std::pow(0.75 * gauss_rho, 2)) * gauss_rho;
  for (std::size_t c = 0; c < cov.centers.size(); ++c) {
    if (std::abs(cov.centers[c]) < 2.0) CHECK(cov.certificates[c] >= oracle * (1.0 - 1e-6));
  }
  CHECK_THROWS_AS(certify_covering(cov, model, 10.0), CertificateError);
}

TEST_CASE("covering solution operator") {
  auto model = gaussian_radial();
  double prev = 0.0;
  for (std::size_t n : {129, 257}) {
    const Grid g(3.0, n);
    auto cov = build_covering(constant_rho(g), 0.75);
    auto f = ComplexField::sample(g, Meaning::function, manufactured_f);
    auto [u, rep] = apply_G(cov, model, f);
    CHECK(rep.method == SolveMethod::covering_G);
    CHECK(rep.active_centers > 0);
    CHECK(rep.residual < 5e-2);
    CHECK(std::isfinite(rep.norm_u));
    if (prev > 0.0) CHECK(rep.residual < 0.55 * prev);
    prev = rep.residual;
  }
  const Grid g(2.5, 129);
  auto cov = build_covering(constant_rho(g), 0.75);
  ComplexField zero(g, Meaning::function);
  auto [u0, rep0] = apply_G(cov, model, zero);
  for (const cplx& v : u0.values()) CHECK(v == cplx{0.0, 0.0});
}

TEST_CASE("assembled kernel G") {
  const Grid g(3.0, 129);
  auto cov = build_covering(constant_rho(g), 0.75);
  auto model = gaussian_radial();
  certify_covering(cov, model);
  const cplx zeta{0.3, -0.2};
  // Cauchy singularity: G(z, zeta)(z - zeta) -> 1/pi.
  const double d = 1e-5;
  CHECK(std::abs(G_kernel(cov, model, zeta + d, zeta) * d) == doctest::Approx(1.0 / pi).epsilon(1e-3));
  CHECK_THROWS_AS(G_kernel(cov, model, zeta, zeta), DomainError);
  // Gaussian oracle: each summand is e^{|zeta-z_i|^2 - |z-z_i|^2} / (pi |z - zeta|) in size,
  // with |zeta - z_i| <= a = r rho.
  const double a = 0.75 * gauss_rho;
  for (double dist : {2.0 * gauss_rho, 6.0 * gauss_rho}) {
    const cplx z = zeta + cplx{0.6, 0.8} * dist;
    const double g = std::abs(G_kernel(cov, model, z, zeta)) * pi * dist;
    CHECK(g <= std::exp(a * a - (dist - a) * (dist - a)) * (1.0 + 1e-6));
    CHECK(g >= std::exp(-(dist + a) * (dist + a)) * (1.0 - 1e-6));
  }
}

TEST_CASE("canonical solutions") {
  auto model = gaussian_tensor();
  const Grid& g = model.quad_grid();
  auto z3 = ComplexField::sample(g, Meaning::function, [](cplx z) { return z * z * z; });
  auto [u, rep] = canonical_solve(model, z3);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(u[k]) * std::exp(-model.quad_phi()[k]));
  CHECK(worst < 1e-6);

  // conj(z) times a radial factor is orthogonal to every monomial.
  auto perp = ComplexField::sample(g, Meaning::function, [](cplx z) { return std::conj(z) * std::exp(-std::norm(z)); });
  auto [up, repp] = canonical_solve(model, perp);
  double diff = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) diff = std::max(diff, std::abs(up[k] - perp[k]));
  CHECK(diff < 1e-8);

  // Pythagoras and minimality on a generic u0.
  auto gen = ComplexField::sample(g, Meaning::function,
                                  [](cplx z) { return manufactured_u(z - 0.4) + 0.3 * z * chi_disk(z / 1.5); });
  auto [ug, repg] = canonical_solve(model, gen);
  CHECK(repg.orthogonality_defect < 1e-6);
  CHECK(repg.norm_u < repg.norm_u0);
  const double lhs = repg.norm_u0 * repg.norm_u0;
  const double rhs = repg.norm_u * repg.norm_u + repg.norm_projection * repg.norm_projection;
  CHECK(std::abs(lhs - rhs) < 1e-8 * lhs);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXcd c(model.degree() - 4);
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = cplx{nd(rng), nd(rng)} * 0.1 / std::sqrt(std::exp(model.log_gram_diagonal()[k]));
    auto hfield = b::polynomial_field(g, c);
    ComplexField alt(g, Meaning::function);
    for (std::size_t k = 0; k < g.size(); ++k) alt[k] = ug[k] + hfield[k];
    double na = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) na += std::norm(alt[k]) * std::exp(-2.0 * model.quad_phi()[k]);
    na = std::sqrt(na * g.cell_area());
    CHECK(na > repg.norm_u);
  }

  // Residual carried through from the Cauchy transform.
  auto f = ComplexField::sample(g, Meaning::function, manufactured_f);
  auto u0 = cauchy_transform(f);
  auto [uc, repc] = canonical_solve(model, u0, &f);
  CHECK(repc.residual < 3e-2);

  auto radial = gaussian_radial();
  CHECK_THROWS_AS(canonical_solve(radial, u0), DomainError);
  CHECK_THROWS_AS(canonical_solve(model, ComplexField(Grid(6.0, 97), Meaning::function)), DomainError);
}

TEST_CASE("two-regime kernel estimates") {
  const Grid g(3.0, 129);
  auto cov = build_covering(constant_rho(g), 0.75);
  auto model = gaussian_radial();
  auto mu = w::laplacian(w::sample_weight(w::WeightSpec::gaussian(), 3.0, 129));
  w::RhoMap rho(mu);
  auto graph = metric::build_metric_graph(rho.sample(mu.grid()));
  KernelEstimateOptions opt;
  opt.canonical_sources = 1;
  auto tensor = gaussian_tensor(12, 6.0, 481);
  auto rep = kernel_estimate_check(cov, model, rho, graph, {cplx{0.0, 0.0}, cplx{0.4, 0.3}}, opt, &tensor);
  CHECK(rep.G.near_slope >= -1.2);
  CHECK(rep.G.near_slope <= -0.8);
  CHECK(rep.G.far.eps_fit > 0.0);
  CHECK(rep.G.far.coverage >= 0.9);
  REQUIRE(rep.has_canonical);
  CHECK(rep.canonical.near_samples > 10);
  CHECK(rep.canonical.far.eps_fit > 0.0);
  CHECK(rep.canonical.far.coverage >= 0.9);
  CHECK(rep.mollifier_scale == doctest::Approx(1.5 * tensor.quad_grid().spacing()));
  CHECK_THROWS_AS(kernel_estimate_check(cov, model, rho, graph, {}, opt), DomainError);
}

TEST_CASE("compactness probe") {
  auto model = gaussian_radial(120, 6.0);
  auto mu = w::laplacian(w::sample_weight(w::WeightSpec::gaussian(), 6.0, 129));
  w::RhoMap rho(mu);
  auto rep = compactness_probe(model, rho, {cplx{0.0, 0.0}, cplx{1.0, 0.0}, cplx{0.0, 2.0}, cplx{-2.1, 2.1}});
  CHECK(rep.verdict == ProbeVerdict::non_compact_signature);
  CHECK(rep.spread <= 1.5);
  for (const auto& row : rep.rows) {
    // Gaussian: ||u_j||^2 = (2/pi) int |z|^2 e^{-2|z|^2} = 1/2, so ratio = sqrt(2 pi).
    CHECK(row.ratio == doctest::Approx(std::sqrt(2.0 * pi)).epsilon(1e-3));
    CHECK(row.kernel_norm == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(row.orthogonality < 1e-6);
    REQUIRE(row.concentration.size() == 3);
    CHECK(row.concentration[0] < row.concentration[1]);
    CHECK(row.concentration[1] < row.concentration[2]);
  }
  CHECK_THROWS_AS(compactness_probe(model, rho, {cplx{5.0, 0.0}}), DomainError);
  auto low = gaussian_radial(20, 6.0);
  CHECK_THROWS_AS(compactness_probe(low, rho, {cplx{3.0, 0.0}}), CertificateError);
}

TEST_CASE("L^p bounds for the canonical solution") {
  auto model = gaussian_tensor(12, 6.0, 241);
  auto mu = w::laplacian(w::sample_weight(w::WeightSpec::gaussian(), 6.0, 129));
  w::RhoMap rho(mu);
  const Grid& g = model.quad_grid();
  std::vector<ComplexField> samples;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-1.5, 1.5);
  for (int k = 0; k < 4; ++k) {
    const cplx center{c(rng), c(rng)};
    samples.push_back(ComplexField::sample(g, Meaning::function, [&](cplx z) {
      return cplx{chi_disk((z - center) / 0.8), 0.0} * std::exp(std::norm(z));
    }));
  }
  samples.emplace_back(g, Meaning::function);
  auto out = minimal_solution_bound_check(model, rho, samples, {1.0, 2.0, INFINITY});
  REQUIRE(out.size() == 3);
  for (const auto& bnd : out) {
    CHECK(bnd.ratios.size() == 4);
    CHECK(std::isfinite(bnd.max_ratio));
    CHECK(bnd.min_ratio > 0.0);
    CHECK(bnd.max_ratio / bnd.min_ratio < 20.0);
  }
  CHECK_THROWS_AS(minimal_solution_bound_check(model, rho, samples, {3.0}), DomainError);
}
