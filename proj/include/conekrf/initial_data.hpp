#pragma once

// Bounded omega-psh initial potentials on a mesh.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conekrf/geometry.hpp"
#include "conekrf/mesh.hpp"

namespace conekrf {

/// 4 A g(u); omega-psh exactly when A <= 1/2.
inline std::vector<double> bump_profile(const Mesh& mesh, const ModelGeometry& geom, double amplitude) {
  std::vector<double> out(mesh.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 4.0 * amplitude * geom.g(mesh[i]);
  return out;
}

/// Discretely degenerate data: g + D2 phi0 = eta g away from the node nearest
/// u_c, which carries the remaining mass (a ring current). sup phi0 = 0.
inline std::vector<double> ring_profile(const Mesh& mesh, const ModelGeometry& geom, double eta, double u_c = 0.0) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("ring_profile: eta must lie in (0, 1]");
  const std::size_t n = mesh.size();
  const auto w = mesh.quad_weights();
  const auto h = mesh.spacing();
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(mesh[i] - u_c) < std::abs(mesh[k] - u_c)) k = i;
  std::vector<double> source(n);
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    source[i] = -(1.0 - eta) * geom.g(mesh[i]) * w[i];
    mass -= source[i];
  }
  source[k] += mass;
  std::vector<double> phi(n, 0.0);
  double flux = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    flux += source[i];
    phi[i + 1] = phi[i] + h[i] * flux;
  }
  const double top = *std::max_element(phi.begin(), phi.end());
  for (double& v : phi) v -= top;
  return phi;
}

/// min_i (g + D2 phi0)_i / g_i, the discrete strict-psh margin at t = 0.
inline double psh_margin(const Mesh& mesh, const ModelGeometry& geom, std::span<const double> phi0) {
  const auto d2 = second_difference(mesh, phi0);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d2.size(); ++i) {
    const double g = geom.g(mesh[i]);
    worst = std::min(worst, (g + d2[i]) / g);
  }
  return worst;
}

/// Seeded random bounded data: sum of three logistic steps, a shifted bump and
/// a constant, redrawn until the discrete psh margin is at least `margin`.
inline std::vector<double> random_psh_data(const Mesh& mesh, const ModelGeometry& geom, std::mt19937_64& rng,
                                           double margin = 0.05) {
  std::uniform_real_distribution<double> step(-0.3, 0.3), shift(-3.0, 3.0), bump(-0.15, 0.15), level(-1.0, 1.0);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    double a[3], s[3];
    for (int k = 0; k < 3; ++k) {
      a[k] = step(rng);
      s[k] = shift(rng);
    }
    const double b = bump(rng), sb = shift(rng), c = level(rng);
    std::vector<double> phi(mesh.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double u = mesh[i];
      double v = c + 4.0 * b * geom.g(u - sb);
      for (int k = 0; k < 3; ++k) v += a[k] * detail::logistic(u - s[k]);
      phi[i] = v;
    }
    if (psh_margin(mesh, geom, phi) >= margin) return phi;
  }
  throw std::runtime_error("random_psh_data: no admissible sample in 10000 draws");
}

/// Independent random data A, B; when `ordered`, B is lifted by a random
/// nonnegative amount so that A <= B with contact at the worst node.
inline std::pair<std::vector<double>, std::vector<double>> random_psh_pair(const Mesh& mesh,
                                                                           const ModelGeometry& geom,
                                                                           std::uint64_t seed, bool ordered) {
  std::mt19937_64 rng(seed);
  auto a = random_psh_data(mesh, geom, rng);
  auto b = random_psh_data(mesh, geom, rng);
  if (ordered) {
    double lift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) lift = std::max(lift, a[i] - b[i]);
    lift += std::uniform_real_distribution<double>(0.0, 0.1)(rng);
    for (double& v : b) v += lift;
  }
  return {std::move(a), std::move(b)};
}

}  // namespace conekrf
