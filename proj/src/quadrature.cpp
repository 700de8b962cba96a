#include "fock/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fock::quad {

namespace {

constexpr double kPi = std::numbers::pi;

// Legendre P_n and its derivative at x by the three-term recurrence.
std::pair<double, double> legendre(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = pk;
  }
  const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

Rule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw DomainError("Gauss-Legendre rule needs at least one node");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = 0.5 * (a + b);
    rule.weights[0] = b - a;
    return rule;
  }
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton.
    const double k = static_cast<double>(i) + 1.0;
    const double nn = static_cast<double>(n);
    double x = std::cos(kPi * (k - 0.25) / (nn + 0.5)) *
               (1.0 - (nn - 1.0) / (8.0 * nn * nn * nn));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      auto [p, d] = legendre(n, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  const double mid = 0.5 * (a + b);
  const double half_len = 0.5 * (b - a);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half_len * rule.nodes[i];
    rule.weights[i] *= half_len;
  }
  return rule;
}

double disk_integral(const std::function<double(cplx)>& g, cplx center, double r,
                     std::size_t radial_nodes, std::size_t angular_nodes) {
  if (r <= 0.0) return 0.0;
  const Rule radial = gauss_legendre(radial_nodes, 0.0, r);
  const double dtheta = 2.0 * kPi / static_cast<double>(angular_nodes);
  double acc = 0.0;
  for (std::size_t a = 0; a < angular_nodes; ++a) {
    const cplx dir = std::polar(1.0, dtheta * (static_cast<double>(a) + 0.5));
    for (std::size_t k = 0; k < radial_nodes; ++k) {
      const double t = radial.nodes[k];
      acc += radial.weights[k] * t * g(center + t * dir);
    }
  }
  return acc * dtheta;
}

double radial_disk_integral(const std::function<double(double)>& g, double s, double R,
                            const std::function<double(double)>& inner, std::size_t nodes) {
  if (R <= 0.0) return 0.0;
  s = std::abs(s);
  double total = 0.0;
  if (s < R) total += inner(R - s);
  if (s == 0.0) return total;
  // Arc part: circles of radius t in [|s - R|, s + R] cut the disk in an arc
  // of half-angle acos((t^2 + s^2 - R^2) / (2 t s)).
  const double lo = std::abs(s - R);
  const double hi = s + R;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  // t = mid - half cos(theta) smooths the square-root behaviour at both ends.
  static thread_local std::vector<Rule> cache;
  const Rule* rule = nullptr;
  for (const auto& r : cache) {
    if (r.nodes.size() == nodes) rule = &r;
  }
  if (rule == nullptr) {
    cache.push_back(gauss_legendre(nodes, 0.0, kPi));
    rule = &cache.back();
  }
  double arc = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double theta = rule->nodes[k];
    const double t = mid - half * std::cos(theta);
    if (t <= 0.0) continue;
    const double dt = half * std::sin(theta);
    const double c = std::clamp((t * t + s * s - R * R) / (2.0 * t * s), -1.0, 1.0);
    arc += rule->weights[k] * dt * 2.0 * t * std::acos(c) * g(t);
  }
  return total + arc;
}

double radial_disk_integral(const std::function<double(double)>& g, double s, double R,
                            std::size_t nodes) {
  auto inner = [&](double a) {
    const Rule r = gauss_legendre(nodes, 0.0, a);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      acc += r.weights[k] * 2.0 * kPi * r.nodes[k] * g(r.nodes[k]);
    }
    return acc;
  };
  return radial_disk_integral(g, s, R, inner, nodes);
}

namespace {

// Antiderivative of sqrt(r^2 - u^2).
double chord_primitive(double u, double r) {
  u = std::clamp(u, -r, r);
  return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) + r * r * std::asin(u / r));
}

}  // namespace

double disk_rect_area(cplx c, double r, double x0, double x1, double y0, double y1) {
  if (r <= 0.0 || x1 <= x0 || y1 <= y0) return 0.0;
  // Work in coordinates centred on the disk.
  const double a0 = std::max(x0 - c.real(), -r);
  const double a1 = std::min(x1 - c.real(), r);
  if (a1 <= a0) return 0.0;
  const double b0 = y0 - c.imag();
  const double b1 = y1 - c.imag();
  // Breakpoints where the chord half-height sqrt(r^2-u^2) crosses |b0| or |b1|.
  std::vector<double> cuts{a0, a1};
  for (double b : {b0, b1}) {
    if (std::abs(b) < r) {
      const double u = std::sqrt(r * r - b * b);
      for (double v : {-u, u}) {
        if (v > a0 && v < a1) cuts.push_back(v);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double u0 = cuts[k];
    const double u1 = cuts[k + 1];
    if (u1 <= u0) continue;
    const double um = 0.5 * (u0 + u1);
    const double sm = std::sqrt(std::max(0.0, r * r - um * um));
    // On this slab the clipped chord is [max(b0,-s), min(b1,s)]; each end is
    // either a constant or +-s(u) throughout the slab.
    const bool top_is_circle = sm < b1;
    const bool bottom_is_circle = -sm > b0;
    if (std::min(b1, sm) <= std::max(b0, -sm)) continue;
    const double S = chord_primitive(u1, r) - chord_primitive(u0, r);
    const double width = u1 - u0;
    const double top = top_is_circle ? S : b1 * width;
    const double bottom = bottom_is_circle ? -S : b0 * width;
    area += top - bottom;
  }
  return std::max(0.0, area);
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace fock::quad
