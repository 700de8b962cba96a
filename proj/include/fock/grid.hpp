#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fock/error.hpp"

namespace fock {

using cplx = std::complex<double>;

/// Uniform node grid on the square [-L, L]^2 with n nodes per side.
///
/// Node (i, j) sits at x = -L + i*h, y = -L + j*h with h = 2L/(n-1).
/// Storage is row-major in j (index = j*n + i).
class Grid {
 public:
  Grid() = default;
  Grid(double half_width, std::size_t nodes);

  double half_width() const { return L_; }
  std::size_t n() const { return n_; }
  std::size_t size() const { return n_ * n_; }
  double spacing() const { return h_; }
  double cell_area() const { return h_ * h_; }

  cplx node(std::size_t i, std::size_t j) const {
    return {-L_ + static_cast<double>(i) * h_, -L_ + static_cast<double>(j) * h_};
  }
  cplx node(std::size_t index) const { return node(index % n_, index / n_); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * n_ + i; }

  /// Nearest node to z, clamped to the grid.
  std::size_t snap(cplx z) const;
  bool contains(cplx z) const;
  /// True when the closed disk D(z, r) lies inside the box.
  bool contains_disk(cplx z, double r) const;
  /// Distance from z to the nearest box edge.
  double edge_distance(cplx z) const;

  bool operator==(const Grid& other) const { return L_ == other.L_ && n_ == other.n_; }

 private:
  double L_ = 1.0;
  std::size_t n_ = 2;
  double h_ = 2.0;
};

enum class Meaning { weight, density, rho, regularized, gadget, function };

std::string_view to_string(Meaning m);
Meaning meaning_from_string(std::string_view s);

/// Exact evaluator attached to a sampled field when a closed form exists.
///
/// `radial` is set only for fields that are rotation invariant about 0,
/// `radial_mass` (optional) returns the integral of the field over D(0, a).
/// `laplacian` maps a weight profile to the profile of its Laplacian.
struct ExactProfile {
  std::function<double(cplx)> at;
  std::function<double(double)> radial;
  std::function<double(double)> radial_mass;
  std::shared_ptr<const ExactProfile> laplacian;
  std::string description;

  bool is_radial() const { return static_cast<bool>(radial); }
};

template <typename T>
class Field {
 public:
  Field() = default;
  Field(Grid grid, Meaning meaning, T fill = T{})
      : grid_(grid), meaning_(meaning), values_(grid.size(), fill) {}
  Field(Grid grid, Meaning meaning, std::vector<T> values);

  const Grid& grid() const { return grid_; }
  Meaning meaning() const { return meaning_; }
  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }

  T& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
  const T& operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }

  /// Value at the node nearest to z.
  T nearest(cplx z) const { return values_[grid_.snap(z)]; }
  /// Bilinear interpolation; z must lie inside the box.
  T interpolate(cplx z) const;

  const std::shared_ptr<const ExactProfile>& exact() const { return exact_; }
  void set_exact(std::shared_ptr<const ExactProfile> p) { exact_ = std::move(p); }

  template <typename F>
  static Field sample(Grid grid, Meaning meaning, F&& f) {
    Field out(grid, meaning);
    for (std::size_t k = 0; k < grid.size(); ++k) out.values_[k] = f(grid.node(k));
    return out;
  }

 private:
  Grid grid_;
  Meaning meaning_ = Meaning::function;
  std::vector<T> values_;
  std::shared_ptr<const ExactProfile> exact_;
};

using GridField = Field<double>;
using ComplexField = Field<cplx>;

template <typename T>
Field<T>::Field(Grid grid, Meaning meaning, std::vector<T> values)
    : grid_(grid), meaning_(meaning), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("field value count " + std::to_string(values_.size()) +
                      " does not match grid size " + std::to_string(grid_.size()));
  }
}

template <typename T>
T Field<T>::interpolate(cplx z) const {
  const double h = grid_.spacing();
  const double L = grid_.half_width();
  const std::size_t n = grid_.n();
  double fx = (z.real() + L) / h;
  double fy = (z.imag() + L) / h;
  if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(n - 1) || fy > static_cast<double>(n - 1)) {
    throw BoxError("interpolation point outside the grid box");
  }
  auto i = static_cast<std::size_t>(fx);
  auto j = static_cast<std::size_t>(fy);
  if (i >= n - 1) i = n - 2;
  if (j >= n - 1) j = n - 2;
  const double tx = fx - static_cast<double>(i);
  const double ty = fy - static_cast<double>(j);
  const T& a = (*this)(i, j);
  const T& b = (*this)(i + 1, j);
  const T& c = (*this)(i, j + 1);
  const T& d = (*this)(i + 1, j + 1);
  return (1 - tx) * (1 - ty) * a + tx * (1 - ty) * b + (1 - tx) * ty * c + tx * ty * d;
}

/// Discrete inner product sum f * conj(g) * e^{-2 phi} * h^2 over all nodes.
cplx weighted_inner(const ComplexField& f, const ComplexField& g, const GridField& phi);
double weighted_norm(const ComplexField& f, const GridField& phi);

}  // namespace fock
