#include "fock/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace fock::metric {

namespace {

std::vector<std::pair<int, int>> primitive_offsets(int radius) {
  std::vector<std::pair<int, int>> out;
  for (int dj = -radius; dj <= radius; ++dj) {
    for (int di = -radius; di <= radius; ++di) {
      if ((di != 0 || dj != 0) && std::gcd(di, dj) == 1) out.emplace_back(di, dj);
    }
  }
  return out;
}

}  // namespace

double stencil_anisotropy(int stencil_radius) {
  if (stencil_radius < 1) throw DomainError("stencil radius must be at least 1");
  auto offs = primitive_offsets(stencil_radius);
  std::sort(offs.begin(), offs.end(), [](auto a, auto b) {
    return std::atan2(a.second, a.first) < std::atan2(b.second, b.first);
  });
  double worst = 1.0;
  for (std::size_t k = 0; k < offs.size(); ++k) {
    const auto [ax, ay] = offs[k];
    const auto [bx, by] = offs[(k + 1) % offs.size()];
    // g with g.a = |a|, g.b = |b|; the worst ratio inside the cone is |g|.
    const double la = std::hypot(ax, ay), lb = std::hypot(bx, by);
    const double det = static_cast<double>(ax * by - ay * bx);
    const double gx = (la * by - lb * ay) / det;
    const double gy = (lb * ax - la * bx) / det;
    worst = std::max(worst, std::hypot(gx, gy));
  }
  return worst;
}

MetricGraph::MetricGraph(const GridField& rho_field, int stencil_radius)
    : rho_(rho_field), radius_(stencil_radius), offsets_(primitive_offsets(stencil_radius)) {
  const Grid& g = rho_.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!(rho_[k] > 0.0) || !std::isfinite(rho_[k])) {
      std::ostringstream os;
      os << "rho must be positive and finite; node (" << g.node(k).real() << ", "
         << g.node(k).imag() << ") holds " << rho_[k];
      throw DomainError(os.str());
    }
    ring_ = std::max(ring_, rho_[k]);
  }
  anisotropy_ = stencil_anisotropy(stencil_radius);
  const auto n = static_cast<long>(g.n());
  const double h = g.spacing();
  weights_.assign(g.size() * offsets_.size(), std::numeric_limits<double>::infinity());
  for (long j = 0; j < n; ++j) {
    for (long i = 0; i < n; ++i) {
      const std::size_t k = g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      for (std::size_t o = 0; o < offsets_.size(); ++o) {
        const long ti = i + offsets_[o].first, tj = j + offsets_[o].second;
        if (ti < 0 || tj < 0 || ti >= n || tj >= n) continue;
        const std::size_t t = g.index(static_cast<std::size_t>(ti), static_cast<std::size_t>(tj));
        const double len = h * std::hypot(offsets_[o].first, offsets_[o].second);
        const double mid = rho_.interpolate(0.5 * (g.node(k) + g.node(t)));
        weights_[k * offsets_.size() + o] =
            len * (1.0 / rho_[k] + 4.0 / mid + 1.0 / rho_[t]) / 6.0;
      }
    }
  }
}

bool MetricGraph::interior(std::size_t k) const {
  return grid().edge_distance(grid().node(k)) > ring_;
}

std::vector<double> MetricGraph::distances_from(cplx z) const {
  if (!grid().contains(z)) throw DomainError("source point lies outside the box");
  return distances_from_node(grid().snap(z));
}

std::vector<double> MetricGraph::distances_from_node(std::size_t source) const {
  const Grid& g = grid();
  const auto n = static_cast<long>(g.n());
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  const std::size_t no = offsets_.size();
  while (!queue.empty()) {
    const auto [d, k] = queue.top();
    queue.pop();
    if (d > dist[k]) continue;
    const long i = static_cast<long>(k % g.n()), j = static_cast<long>(k / g.n());
    for (std::size_t o = 0; o < no; ++o) {
      const double w = weights_[k * no + o];
      if (!std::isfinite(w)) continue;
      const auto t = static_cast<std::size_t>((j + offsets_[o].second) * n + i + offsets_[o].first);
      const double nd = d + w;
      if (nd < dist[t]) {
        dist[t] = nd;
        queue.emplace(nd, t);
      }
    }
  }
  return dist;
}

MetricGraph build_metric_graph(const GridField& rho_field, int stencil_radius) {
  return MetricGraph(rho_field, stencil_radius);
}

double d_phi(const MetricGraph& graph, cplx z, cplx zeta) {
  const Grid& g = graph.grid();
  if (!g.contains(z) || !g.contains(zeta)) throw DomainError("distance endpoint lies outside the box");
  std::size_t a = g.snap(z), b = g.snap(zeta);
  if (!graph.interior(a) || !graph.interior(b)) {
    throw DomainError("distance endpoint snaps to a node in the boundary ring");
  }
  if (a == b) return 0.0;
  if (b < a) std::swap(a, b);
  return graph.distances_from_node(a)[b];
}

DistanceBoundsReport distance_bounds_check(const MetricGraph& graph, cplx z, double r,
                                           const std::vector<cplx>& far_points) {
  if (!(r > 0.0)) throw DomainError("near-regime multiplier must be positive");
  if (far_points.size() < 8) throw DomainError("distance bounds need at least 8 far points");
  const Grid& g = graph.grid();
  const std::size_t src = g.snap(z);
  if (!graph.interior(src)) throw DomainError("centre snaps to a node in the boundary ring");
  const cplx z0 = g.node(src);
  const double rz = graph.rho_field()[src];
  const auto dist = graph.distances_from_node(src);

  DistanceBoundsReport rep;
  rep.anisotropy_bound = graph.anisotropy_bound();
  rep.near_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double s = std::abs(g.node(k) - z0);
    if (k == src || s > r * rz) continue;
    const double ratio = dist[k] / (s / rz);
    rep.near_min = std::min(rep.near_min, ratio);
    rep.near_max = std::max(rep.near_max, ratio);
    ++rep.near_samples;
  }
  if (rep.near_samples < 8) throw DomainError("fewer than 8 nodes inside D^r(z); refine the grid");

  std::vector<std::pair<double, double>> pts;
  for (const cplx p : far_points) {
    const std::size_t k = g.snap(p);
    if (!graph.interior(k)) throw DomainError("far point snaps to a node in the boundary ring");
    const double s = std::abs(g.node(k) - z0) / rz;
    if (s < r) throw DomainError("far point lies inside D^r(z)");
    pts.emplace_back(std::log(s), std::log(dist[k]));
  }
  std::sort(pts.begin(), pts.end());
  // Chord slopes measured from the nearest far point absorb the constant at
  // the reference separation.
  rep.far_lower_slope = std::numeric_limits<double>::infinity();
  rep.far_upper_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double dx = pts[k].first - pts[0].first;
    if (dx < 0.1) continue;
    const double s = (pts[k].second - pts[0].second) / dx;
    rep.far_lower_slope = std::min(rep.far_lower_slope, s);
    rep.far_upper_slope = std::max(rep.far_upper_slope, s);
  }
  if (!std::isfinite(rep.far_lower_slope)) {
    throw DomainError("far points do not span distinct separations");
  }
  rep.delta_fit = std::min({rep.far_lower_slope, 2.0 - rep.far_upper_slope, 1.0});
  rep.common_delta = rep.delta_fit > 0.0;
  return rep;
}

double integrability_check(const GridField& mu, const MetricGraph& graph, cplx zeta, double k,
                           double epsilon) {
  if (!(k >= 0.0)) throw DomainError("integrability exponent k must be non-negative");
  if (!(epsilon > 0.0)) throw DomainError("integrability exponent epsilon must be positive");
  const Grid& g = graph.grid();
  if (!(mu.grid() == g)) throw DomainError("density and metric graph live on different grids");
  const std::size_t src = g.snap(zeta);
  const cplx z0 = g.node(src);
  const double rz = graph.rho_field()[src];
  const auto dist = graph.distances_from_node(src);
  const std::size_t n = g.n();
  double acc = 0.0;
  double edge_max = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = g.index(i, j);
      const double s = std::abs(g.node(idx) - z0) / rz;
      const double v = std::pow(s, k) * std::exp(-std::pow(dist[idx], epsilon)) * mu[idx];
      acc += v;
      if (i == 0 || j == 0 || i + 1 == n || j + 1 == n) edge_max = std::max(edge_max, v);
    }
  }
  if (edge_max > 1e-10) {
    std::ostringstream os;
    os << "integrand is " << edge_max << " on the box boundary (needs < 1e-10); enlarge the box";
    throw BoxError(os.str());
  }
  return acc * g.cell_area();
}

}  // namespace fock::metric
