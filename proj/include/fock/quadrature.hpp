#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fock/grid.hpp"

namespace fock::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points on [a, b].
Rule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// Integral of g over the disk D(center, r) using a polar product rule
/// (Gauss-Legendre in radius, trapezoid in angle).
double disk_integral(const std::function<double(cplx)>& g, cplx center, double r,
                     std::size_t radial_nodes = 32, std::size_t angular_nodes = 64);

/// Integral over D(c, R), |c| = s, of a rotation-invariant function g(|u|).
///
/// The disk is sliced into circles about the origin; each circle contributes
/// g(t) times the length of its arc inside the disk. When s < R the full
/// circles t < R - s are handled by `inner` (the integral of g over D(0, a)),
/// which lets callers pass closed forms for integrable singularities at 0.
double radial_disk_integral(const std::function<double(double)>& g, double s, double R,
                            const std::function<double(double)>& inner,
                            std::size_t nodes = 64);

/// Same, with the inner disk integrated by Gauss-Legendre (g bounded at 0).
double radial_disk_integral(const std::function<double(double)>& g, double s, double R,
                            std::size_t nodes = 64);

/// Exact area of D(c, r) intersected with the rectangle [x0,x1] x [y0,y1].
double disk_rect_area(cplx c, double r, double x0, double x1, double y0, double y1);

/// log(sum exp(v)) without overflow; returns -inf for an empty or all -inf input.
double log_sum_exp(const std::vector<double>& v);

}  // namespace fock::quad
