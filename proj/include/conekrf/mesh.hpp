#pragma once

// Graded 1-D grid in u with a flux-form second difference.
//
// The operator is built from cell fluxes (f[i+1] - f[i]) / h[i] divided by the
// trapezoid control volume w[i]. Interior rows reduce to the usual 3-point
// non-uniform second difference; the end rows are the mirror-ghost (zero
// derivative) rows. Because the fluxes telescope, sum_i w[i] (D2 f)[i] = 0 for
// every f.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "conekrf/errors.hpp"

namespace conekrf {

enum class BoundaryPolicy { NeumannBothEnds };

/// Tridiagonal rows of the second-difference operator.
struct Stencil {
  std::vector<double> lower;  // coefficient of f[i-1]; lower[0] == 0
  std::vector<double> diag;
  std::vector<double> upper;  // coefficient of f[i+1]; upper[n-1] == 0
};

class Mesh {
 public:
  /// Mesh on explicit nodes (at least 3, strictly increasing).
  static Mesh from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 3) throw ConfigError("mesh needs at least 3 nodes", "mesh.n");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1])) throw ConfigError("mesh nodes must be strictly increasing", "mesh");
    return Mesh(std::move(nodes));
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  double u_min() const noexcept { return nodes_.front(); }
  double u_max() const noexcept { return nodes_.back(); }
  BoundaryPolicy boundary_policy() const noexcept { return BoundaryPolicy::NeumannBothEnds; }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> spacing() const noexcept { return spacing_; }
  std::span<const double> quad_weights() const noexcept { return weights_; }
  const Stencil& stencil() const noexcept { return stencil_; }

  double operator[](std::size_t i) const { return nodes_[i]; }

  bool operator==(const Mesh& o) const { return nodes_ == o.nodes_; }

 private:
  explicit Mesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    spacing_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) spacing_[i] = nodes_[i + 1] - nodes_[i];

    weights_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      weights_[i] += 0.5 * spacing_[i];
      weights_[i + 1] += 0.5 * spacing_[i];
    }

    stencil_.lower.assign(n, 0.0);
    stencil_.diag.assign(n, 0.0);
    stencil_.upper.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) stencil_.lower[i] = 1.0 / (spacing_[i - 1] * weights_[i]);
      if (i + 1 < n) stencil_.upper[i] = 1.0 / (spacing_[i] * weights_[i]);
      stencil_.diag[i] = -(stencil_.lower[i] + stencil_.upper[i]);
    }
  }

  std::vector<double> nodes_;
  std::vector<double> spacing_;
  std::vector<double> weights_;
  Stencil stencil_;
};

/// Cells grow geometrically by `grading` from u_min to u_max; grading 1 is uniform.
inline Mesh build_mesh(double u_min, double u_max, std::size_t n, double grading = 1.0) {
  if (!(u_min < u_max) || !std::isfinite(u_min) || !std::isfinite(u_max))
    throw ConfigError("mesh bounds must satisfy u_min < u_max", "mesh.u_min");
  if (n < 8) throw ConfigError("mesh needs at least 8 nodes", "mesh.n");
  if (!(grading >= 1.0)) throw ConfigError("mesh grading must be >= 1", "mesh.grading");

  const std::size_t cells = n - 1;
  const double length = u_max - u_min;
  std::vector<double> nodes(n);
  nodes[0] = u_min;
  if (grading == 1.0) {
    const double h = length / static_cast<double>(cells);
    for (std::size_t i = 1; i < n; ++i) nodes[i] = u_min + h * static_cast<double>(i);
  } else {
    const double h0 = length * (grading - 1.0) / (std::pow(grading, static_cast<double>(cells)) - 1.0);
    double h = h0;
    for (std::size_t i = 1; i < n; ++i) {
      nodes[i] = nodes[i - 1] + h;
      h *= grading;
    }
  }
  nodes[n - 1] = u_max;
  return Mesh::from_nodes(std::move(nodes));
}

/// Flux-form second difference. The end fluxes are prescribed derivatives at
/// u_min and u_max; the defaults give the Neumann operator.
inline void second_difference_into(const Mesh& mesh, std::span<const double> f, std::span<double> out,
                                   double left_flux = 0.0, double right_flux = 0.0) {
  const std::size_t n = mesh.size();
  if (f.size() != n || out.size() != n) throw std::invalid_argument("second_difference: length mismatch");
  const auto h = mesh.spacing();
  const auto w = mesh.quad_weights();
  // flux form keeps the telescoping sum exact up to rounding
  double flux_left = left_flux;
  for (std::size_t i = 0; i < n; ++i) {
    const double flux_right = i + 1 < n ? (f[i + 1] - f[i]) / h[i] : right_flux;
    out[i] = (flux_right - flux_left) / w[i];
    flux_left = flux_right;
  }
}

inline std::vector<double> second_difference(const Mesh& mesh, std::span<const double> f,
                                             double left_flux = 0.0, double right_flux = 0.0) {
  std::vector<double> out(mesh.size());
  second_difference_into(mesh, f, out, left_flux, right_flux);
  return out;
}

/// Quadrature sum_i w[i] f[i] (trapezoid).
inline double integrate(const Mesh& mesh, std::span<const double> f) {
  if (f.size() != mesh.size()) throw std::invalid_argument("integrate: length mismatch");
  const auto w = mesh.quad_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i];
  return acc;
}

}  // namespace conekrf
