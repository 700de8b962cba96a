#include "fock/grid.hpp"

#include <algorithm>
#include <cmath>

namespace fock {

Grid::Grid(double half_width, std::size_t nodes) : L_(half_width), n_(nodes) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw DomainError("grid half-width must be positive and finite");
  }
  if (nodes < 3) throw DomainError("grid needs at least 3 nodes per side");
  h_ = 2.0 * L_ / static_cast<double>(n_ - 1);
}

std::size_t Grid::snap(cplx z) const {
  auto clamp_index = [&](double t) {
    double k = std::round((t + L_) / h_);
    k = std::clamp(k, 0.0, static_cast<double>(n_ - 1));
    return static_cast<std::size_t>(k);
  };
  return index(clamp_index(z.real()), clamp_index(z.imag()));
}

bool Grid::contains(cplx z) const {
  return std::abs(z.real()) <= L_ && std::abs(z.imag()) <= L_;
}

bool Grid::contains_disk(cplx z, double r) const { return edge_distance(z) >= r; }

double Grid::edge_distance(cplx z) const {
  return std::min({L_ - z.real(), L_ + z.real(), L_ - z.imag(), L_ + z.imag()});
}

std::string_view to_string(Meaning m) {
  switch (m) {
    case Meaning::weight: return "weight";
    case Meaning::density: return "density";
    case Meaning::rho: return "rho";
    case Meaning::regularized: return "regularized";
    case Meaning::gadget: return "gadget";
    case Meaning::function: return "function";
  }
  return "function";
}

Meaning meaning_from_string(std::string_view s) {
  for (Meaning m : {Meaning::weight, Meaning::density, Meaning::rho, Meaning::regularized,
                    Meaning::gadget, Meaning::function}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown field meaning '" + std::string(s) + "'");
}

cplx weighted_inner(const ComplexField& f, const ComplexField& g, const GridField& phi) {
  if (!(f.grid() == g.grid()) || !(f.grid() == phi.grid())) {
    throw DomainError("inner product of fields on different grids");
  }
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < f.grid().size(); ++k) {
    acc += f[k] * std::conj(g[k]) * std::exp(-2.0 * phi[k]);
  }
  return acc * f.grid().cell_area();
}

double weighted_norm(const ComplexField& f, const GridField& phi) {
  return std::sqrt(std::max(0.0, weighted_inner(f, f, phi).real()));
}

}  // namespace fock
