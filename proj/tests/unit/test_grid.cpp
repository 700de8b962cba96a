#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fock/grid.hpp"
#include "fock/quadrature.hpp"

using namespace fock;

TEST_CASE("grid spacing and node layout") {
  Grid g(6.0, 241);
  CHECK(g.spacing() == doctest::Approx(0.05));
  CHECK(g.node(0, 0) == cplx{-6.0, -6.0});
  CHECK(g.node(240, 240).real() == doctest::Approx(6.0));
  CHECK(g.node(g.snap({1.0, 0.5})) == cplx{1.0, 0.5});
  CHECK_THROWS_AS(Grid(-1.0, 10), DomainError);
  CHECK_THROWS_AS(Grid(1.0, 2), DomainError);
}

TEST_CASE("bilinear interpolation reproduces affine functions") {
  Grid g(2.0, 41);
  auto f = GridField::sample(g, Meaning::function, [](cplx z) { return 3.0 * z.real() - z.imag() + 1.0; });
  for (cplx z : {cplx{0.013, -1.77}, cplx{1.99, 1.99}, cplx{-0.5, 0.25}}) {
    CHECK(f.interpolate(z) == doctest::Approx(3.0 * z.real() - z.imag() + 1.0));
  }
  CHECK_THROWS_AS(f.interpolate({2.5, 0.0}), BoxError);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  auto rule = quad::gauss_legendre(10, 0.0, 2.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < 10; ++k) acc += rule.weights[k] * std::pow(rule.nodes[k], 19);
  CHECK(acc == doctest::Approx(std::pow(2.0, 20) / 20.0).epsilon(1e-13));
}

TEST_CASE("disk quadratures agree with closed forms") {
  const double pi = std::numbers::pi;
  // Integral of |u|^2 over D(c, R) is pi R^2 (|c|^2 + R^2 / 2).
  auto g = [](double t) { return t * t; };
  for (double s : {0.0, 0.3, 1.0, 2.5}) {
    const double expect = pi * 0.64 * (s * s + 0.32);
    CHECK(quad::radial_disk_integral(g, s, 0.8, 64) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(quad::disk_integral([](cplx u) { return std::norm(u); }, {s, 0.0}, 0.8) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("disk-rectangle overlap areas") {
  const double pi = std::numbers::pi;
  CHECK(quad::disk_rect_area({0, 0}, 1.0, -2, 2, -2, 2) == doctest::Approx(pi));
  CHECK(quad::disk_rect_area({0, 0}, 1.0, 0, 2, 0, 2) == doctest::Approx(pi / 4));
  CHECK(quad::disk_rect_area({0, 0}, 1.0, -0.1, 0.1, -0.1, 0.1) == doctest::Approx(0.04));
  CHECK(quad::disk_rect_area({0, 0}, 1.0, 1.0, 2, 0, 2) == doctest::Approx(0.0));
  // Split a disk into four arbitrary rectangles.
  double total = 0.0;
  for (auto [x0, x1] : {std::pair{-3.0, 0.37}, std::pair{0.37, 3.0}}) {
    for (auto [y0, y1] : {std::pair{-3.0, -0.61}, std::pair{-0.61, 3.0}}) {
      total += quad::disk_rect_area({0.2, -0.1}, 1.3, x0, x1, y0, y1);
    }
  }
  CHECK(total == doctest::Approx(pi * 1.69));
}
