#pragma once

// Closed-form background geometry of the S^1-symmetric model on CP^1.
//
// Everything is reduced to the radial coordinate u = log|z|^2. A (1,1)-form
// is stored as its density with respect to beta = i dz^dzbar / |z|^2, so for
// an S^1-invariant function f(u) the form i ddbar f has density f''(u).
// With this convention:
//
//   omega (Fubini-Study)     g(u)   = e^u / (1 + e^u)^2,  total mass 1
//   Ric(omega)               2 g(u)
//   theta = curvature of h   deg * g(u)
//   log|s|_h^2               ell(u),  ell'' = -theta off the divisor
//   nu_gamma                 (c - 2 + deg (1 - gamma)) g(u)
//
// and Omega = omega, so the volume-form correction h vanishes.

#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include "conekrf/errors.hpp"
#include "conekrf/scalar.hpp"

namespace conekrf {

enum class DivisorKind {
  OnePoint,  ///< D = {z = 0}, s a section of O(1)
  TwoPoint,  ///< D = {0, inf}, s a section of O(2); not covered by the one-divisor theory
};

inline std::string to_string(DivisorKind k) {
  return k == DivisorKind::OnePoint ? "one_point" : "two_point";
}

struct DivisorConfig {
  DivisorKind kind = DivisorKind::OnePoint;
  double twist_c = 1.0;          ///< eta = twist_c * omega
  double rescale_lambda = 0.005; ///< sup |s|_h^2
  double delta_cap = 0.01;       ///< smallness cap on |s|_h^2

  void validate() const {
    if (!(rescale_lambda > 0.0))
      throw ConfigError("rescale_lambda must be positive", "geometry.rescale_lambda");
    if (!(rescale_lambda < delta_cap))
      throw ConfigError("rescale_lambda must be below delta_cap", "geometry.rescale_lambda");
    if (!(delta_cap < 1.0))
      throw ConfigError("delta_cap must be below 1", "geometry.delta_cap");
    if (!std::isfinite(twist_c)) throw ConfigError("twist_c must be finite", "geometry.twist_c");
  }

  bool operator==(const DivisorConfig&) const = default;
};

struct ConeParams {
  double gamma = 0.5;      ///< cone angle is 2 pi gamma
  double epsilon = 0.0;    ///< regularization of log|s|^2 -> log(eps^2 + |s|^2)
  double horizon_T = 1.0;  ///< end of the run

  bool operator==(const ConeParams&) const = default;
};

class ModelGeometry {
 public:
  explicit ModelGeometry(DivisorConfig divisor = {}) : divisor_(divisor) { divisor_.validate(); }

  const DivisorConfig& divisor() const noexcept { return divisor_; }
  int degree() const noexcept { return divisor_.kind == DivisorKind::OnePoint ? 1 : 2; }

  /// Fubini-Study density.
  template <class Real>
  Real g(const Real& u) const {
    using std::abs;
    using std::exp;
    const Real e = exp(-abs(u));
    return e / ((Real(1) + e) * (Real(1) + e));
  }

  /// ell(u) = log |s|_h^2, rescaled so that sup ell = log(rescale_lambda).
  template <class Real>
  Real ell(const Real& u) const {
    using std::log;
    const Real log_lambda = log(Real(divisor_.rescale_lambda));
    if (divisor_.kind == DivisorKind::OnePoint) return log_lambda + u - detail::softplus(u);
    return log_lambda + log(Real(4)) + u - Real(2) * detail::softplus(u);
  }

  template <class Real>
  Real ell_du(const Real& u) const {
    const Real s = detail::logistic(u);
    if (divisor_.kind == DivisorKind::OnePoint) return Real(1) - s;
    return Real(1) - Real(2) * s;
  }

  template <class Real>
  Real ell_duu(const Real& u) const {
    return -Real(degree()) * g(u);
  }

  double section_norm_sq(double u) const { return std::exp(ell(u)); }

  double theta_density(double u) const { return degree() * g(u); }
  double ricci_density(double u) const { return 2.0 * g(u); }
  double h_density(double /*u*/) const { return 0.0; }

  /// nu_gamma = -Ric(omega) + (1 - gamma) theta + c omega, as a multiple of omega.
  double class_slope(double gamma) const {
    return divisor_.twist_c - 2.0 + degree() * (1.0 - gamma);
  }

  double nu_gamma_density(double u, double gamma) const { return class_slope(gamma) * g(u); }

  /// omega_{gamma t} = class_factor * omega.
  double class_factor(double t, double gamma) const { return 1.0 + t * class_slope(gamma); }

  bool operator==(const ModelGeometry& o) const { return divisor_ == o.divisor_; }

 private:
  DivisorConfig divisor_;
};

/// First time the class [omega] + t(-c1(X) + (1-gamma) c1(L_D) + [eta]) stops
/// being positive; +inf when it never does.
inline double tmax(const ModelGeometry& geom, double gamma) {
  const double slope = geom.class_slope(gamma);
  if (slope >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / slope;
}

inline void validate_params(const ModelGeometry& geom, const ConeParams& p) {
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]", "flow.gamma");
  if (!(p.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0", "flow.epsilon");
  if (!(p.horizon_T > 0.0)) throw ConfigError("horizon_T must be positive", "flow.horizon_T");
  const double tm = tmax(geom, p.gamma);
  if (!(p.horizon_T < tm))
    throw ConfigError("horizon_T must be below T_max = " + std::to_string(tm) +
                          " (class [omega] + t(-c1(X) + (1-gamma) c1(L_D) + [eta]) must stay positive)",
                      "flow.horizon_T");
}

// ---------------------------------------------------------------------------
// Guenancia potential and its cusp limit
// ---------------------------------------------------------------------------

/// psi_gamma = -log(((1 - r^gamma) / gamma)^2) for r = |s|_h^2.
template <class Real = double>
Real psi_gamma(double gamma, const Real& r) {
  using std::log;
  if (!(gamma > 0.0) || gamma > 1.0) throw DomainError("psi_gamma: gamma must lie in (0, 1]");
  if (!(r >= Real(0)) || !(r < Real(1))) throw DomainError("psi_gamma: r must lie in [0, 1)");
  if (r == Real(0)) return Real(2) * log(Real(gamma));
  const Real one_minus = -detail::expm1(Real(gamma) * log(r));
  return -Real(2) * log(one_minus / Real(gamma));
}

/// psi_o = -log(log^2 r), the cusp potential.
template <class Real = double>
Real psi_cusp(const Real& r) {
  using std::log;
  if (!(r > Real(0)) || !(r < Real(1))) throw DomainError("psi_cusp: r must lie in (0, 1)");
  const Real l = log(r);
  return -log(l * l);
}

// Radial versions in terms of ell = log r. These never form r itself, so they
// stay finite where e^ell underflows.

template <class Real>
Real psi_gamma_of_ell(double gamma, const Real& ell) {
  using std::log;
  return -Real(2) * log(-detail::expm1(Real(gamma) * ell) / Real(gamma));
}

namespace detail {
// q = r^gamma / (1 - r^gamma)
template <class Real>
Real guenancia_q(double gamma, const Real& ell) {
  return Real(1) / detail::expm1(-Real(gamma) * ell);
}
}  // namespace detail

template <class Real>
Real psi_gamma_u(const ModelGeometry& geom, double gamma, const Real& u) {
  if (!(gamma > 0.0)) throw DomainError("psi_gamma: gamma must be positive");
  return psi_gamma_of_ell(gamma, geom.ell(u));
}

template <class Real>
Real psi_gamma_du(const ModelGeometry& geom, double gamma, const Real& u) {
  const Real q = detail::guenancia_q(gamma, geom.ell(u));
  return Real(2 * gamma) * geom.ell_du(u) * q;
}

/// Closed-form chain rule: psi'' = 2 gamma ell'' q + 2 gamma^2 ell'^2 q (1 + q).
template <class Real>
Real psi_gamma_duu(const ModelGeometry& geom, double gamma, const Real& u) {
  if (!(gamma > 0.0)) throw DomainError("psi_gamma'': gamma must be positive");
  const Real q = detail::guenancia_q(gamma, geom.ell(u));
  const Real d1 = geom.ell_du(u);
  return Real(2 * gamma) * geom.ell_duu(u) * q + Real(2 * gamma * gamma) * d1 * d1 * q * (Real(1) + q);
}

/// Five-point finite-difference cross-check of psi_gamma_duu.
inline double psi_gamma_duu_fd(const ModelGeometry& geom, double gamma, double u, double step = 1e-3) {
  const quad h = step;
  const quad x = u;
  auto f = [&](const quad& v) { return psi_gamma_u(geom, gamma, v); };
  const quad d = -f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h);
  return static_cast<double>(d / (12 * h * h));
}

template <class Real>
Real psi_cusp_u(const ModelGeometry& geom, const Real& u) {
  using std::log;
  const Real l = geom.ell(u);
  return -log(l * l);
}

template <class Real>
Real psi_cusp_du(const ModelGeometry& geom, const Real& u) {
  return -Real(2) * geom.ell_du(u) / geom.ell(u);
}

template <class Real>
Real psi_cusp_duu(const ModelGeometry& geom, const Real& u) {
  const Real l = geom.ell(u);
  const Real d1 = geom.ell_du(u);
  return -Real(2) * geom.ell_duu(u) / l + Real(2) * d1 * d1 / (l * l);
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

/// Density of omega_{gamma t} = omega + t nu_gamma.
inline double background_density(const ModelGeometry& geom, const ConeParams& p, double t, double u) {
  const double d = geom.class_factor(t, p.gamma) * geom.g(u);
  if (!(d > 0.0)) throw DomainError("background density is not positive (class condition violated)");
  return d;
}

template <class Real>
Real model_metric_density_t(const ModelGeometry& geom, double gamma, const Real& u) {
  return geom.g(u) + psi_gamma_duu(geom, gamma, u);
}

/// Density of omega_gamma = omega + i ddbar psi_gamma (closed-form chain rule).
inline double model_metric_density(const ModelGeometry& geom, const ConeParams& p, double u) {
  if (!(p.gamma > 0.0)) throw DomainError("model metric needs gamma > 0; use cusp_metric_density at gamma = 0");
  const double d = model_metric_density_t(geom, p.gamma, u);
  if (!(d > 0.0)) throw DomainError("model metric density is not positive: delta_cap too large");
  return d;
}

template <class Real>
Real cusp_metric_density_t(const ModelGeometry& geom, const Real& u) {
  return geom.g(u) + psi_cusp_duu(geom, u);
}

inline double cusp_metric_density(const ModelGeometry& geom, double u) {
  return cusp_metric_density_t(geom, u);
}

/// log(omega_gamma / omega) + (1 - gamma) log|s|^2 - psi_gamma; bounded
/// uniformly in gamma.
inline double model_ratio_defect(const ModelGeometry& geom, const ConeParams& p, double u) {
  if (!std::isfinite(u) || geom.section_norm_sq(u) == 0.0)
    throw DomainError("model_ratio_defect: |s|^2 vanishes at this u");
  const double dens = model_metric_density(geom, p, u);
  return std::log(dens / geom.g(u)) + (1.0 - p.gamma) * geom.ell(u) - psi_gamma_u(geom, p.gamma, u);
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

/// Gauss curvature -(log w)''/w of the metric w(u) beta, five-point stencil.
///
/// Differences are taken as log(w(u + kh) / w(u)) so that the absolute size of
/// log w never enters. When `w` accepts `quad` the stencil runs in quad
/// precision: (log w)'' is of order e^u at the tails, far below double
/// cancellation at step 1e-3.
template <class F>
double curvature_density(F&& w, double u, double step = 1e-3,
                         double lo = -std::numeric_limits<double>::infinity(),
                         double hi = std::numeric_limits<double>::infinity()) {
  if (!(step > 0.0)) throw DomainError("curvature_density: step must be positive");
  if (u - 2 * step < lo || u + 2 * step > hi) throw DomainError("curvature_density: stencil leaves domain");

  auto run = [&](auto zero) -> double {
    using Real = decltype(zero);
    using std::log;
    const Real h = step;
    const Real x = u;
    const Real w0 = w(x);
    Real d[5];
    for (int k = -2; k <= 2; ++k) {
      const Real wk = k == 0 ? w0 : Real(w(x + Real(k) * h));
      if (!(wk > Real(0))) throw DomainError("curvature_density: metric density not positive on stencil");
      d[k + 2] = log(wk / w0);
    }
    const Real second = (-d[0] + 16 * d[1] + 16 * d[3] - d[4]) / (12 * h * h);
    return static_cast<double>(-second / w0);
  };
  if constexpr (std::is_invocable_v<F, quad>) {
    return run(quad(0));
  } else {
    return run(0.0);
  }
}

}  // namespace conekrf
