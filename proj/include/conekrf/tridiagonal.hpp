#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "conekrf/errors.hpp"

namespace conekrf {

/// Thomas elimination for lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// No pivoting: intended for the diagonally dominant M-matrices the solvers build.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                             std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw std::invalid_argument("solve_tridiagonal: length mismatch");
  std::vector<double> c(n), d(n), x(n);
  double denom = diag[0];
  if (denom == 0.0) throw SolverError("solve_tridiagonal: zero pivot");
  c[0] = n > 1 ? upper[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    if (denom == 0.0) throw SolverError("solve_tridiagonal: zero pivot");
    c[i] = i + 1 < n ? upper[i] / denom : 0.0;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace conekrf
