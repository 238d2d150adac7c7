#pragma once

// Comparison oracles, the sub-solution barrier and its elliptic solve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conekrf/errors.hpp"
#include "conekrf/flow.hpp"
#include "conekrf/tridiagonal.hpp"

namespace conekrf {

/// One entry of a violation dump.
struct ViolationRow {
  double t;
  double u;
  double lhs;
  double rhs;
};

// ---------------------------------------------------------------------------
// Elliptic Monge-Ampere
// ---------------------------------------------------------------------------

/// g + D2 u = g exp(coeff * u + source + weight), weight = -(1 - gamma) ell,
/// solved in the bounded unknown v = u - kappa psi_ref (psi_gamma, or psi_o at
/// gamma = 0) with Neumann ends.
struct EllipticProblem {
  ModelGeometry geom{};
  double gamma = 0.0;
  double rhs_potential_coeff = 1.0;
  double reference_coeff = 1.0;  ///< kappa
  std::vector<double> source_field;
  std::vector<double> weight_field;  ///< empty: -(1 - gamma) ell on the mesh
};

struct EllipticSolution {
  std::vector<double> u;
  std::vector<double> v;        ///< u - kappa psi_ref
  std::vector<double> density;  ///< g + kappa D2~ psi_ref + D2 v
  std::size_t iterations = 0;
  double residual = 0.0;  ///< max_i |R_i| / J_ii, R = log(density / g) - (coeff u + source + weight)
};

namespace detail {

inline FlowConfig reference_config(const ModelGeometry& geom, const Mesh& mesh, double gamma) {
  FlowConfig cfg;
  cfg.geom = geom;
  cfg.mesh = mesh;
  cfg.variant = gamma > 0.0 ? Variant::Conical : Variant::Cusp;
  cfg.params.gamma = gamma;
  cfg.params.horizon_T = std::min(1.0, 0.5 * tmax(geom, gamma));
  return cfg;
}

}  // namespace detail

inline EllipticSolution solve_elliptic(const EllipticProblem& prob, const Mesh& mesh, double tol = 1e-12,
                                       std::size_t max_iter = 100) {
  const std::size_t n = mesh.size();
  if (prob.source_field.size() != n) throw std::invalid_argument("solve_elliptic: source length mismatch");
  if (!prob.weight_field.empty() && prob.weight_field.size() != n)
    throw std::invalid_argument("solve_elliptic: weight length mismatch");
  if (!(prob.rhs_potential_coeff > 0.0))
    throw std::invalid_argument("solve_elliptic: rhs_potential_coeff must be positive (monotone problem)");
  const NodalModel ref = make_nodal_model(detail::reference_config(prob.geom, mesh, prob.gamma));
  const double kappa = prob.reference_coeff, c = prob.rhs_potential_coeff;

  std::vector<double> base(n), target(n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = ref.g[i] + kappa * ref.psi_dd[i];
    if (!((1.0 - kappa) * ref.g[i] + kappa * ref.ref_density[i] > 0.0))
      throw DomainError("solve_elliptic: omega + kappa i ddbar psi is not positive at node " + std::to_string(i));
    const double weight = prob.weight_field.empty() ? -(1.0 - prob.gamma) * ref.ell[i] : prob.weight_field[i];
    target[i] = prob.source_field[i] + weight + c * kappa * ref.psi[i];
  }
  // residual R(v) = log(m / g) - c v - target, m = base + D2 v
  std::vector<double> v(n), m(n), r(n), vt(n), mt(n), rt(n), lo(n), di(n), up(n), neg(n);
  const Stencil& st = mesh.stencil();
  // initial v: density = base clipped at g / 2 (boundary rows of D2~ psi can
  // make base non-positive) and rescaled to the same mass, plus the constant
  // that zeroes the mean residual
  const auto w = mesh.quad_weights();
  const auto h = mesh.spacing();
  double mass = 0.0, clipped = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = std::max(base[i], 0.5 * ref.g[i]);
    mass += w[i] * base[i];
    clipped += w[i] * m[i];
  }
  if (!(mass > 0.0)) throw DomainError("solve_elliptic: reference class has no positive mass");
  for (double& x : m) x *= mass / clipped;
  double flux = 0.0;
  v[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    flux += w[i] * (m[i] - base[i]);
    v[i + 1] = v[i] + h[i] * flux;
  }
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    shift += std::log(m[i] / ref.g[i]) - c * v[i] - target[i];
  for (double& x : v) x += shift / (c * static_cast<double>(n));
  auto eval = [&](std::span<const double> x, std::span<double> mm, std::span<double> rr) {
    second_difference_into(mesh, x, mm);
    for (std::size_t i = 0; i < n; ++i) {
      mm[i] += base[i];
      if (!(mm[i] > 0.0)) return false;
      rr[i] = std::log(mm[i] / ref.g[i]) - c * x[i] - target[i];
    }
    return true;
  };
  auto norm = [](std::span<const double> x) {
    double a = 0.0;
    for (double e : x) a = std::max(a, std::abs(e));
    return a;
  };
  // |R_i| / J_ii: near the divisor J_ii ~ 1 / (h^2 m) and R itself cannot drop below J_ii ulp(v)
  auto scaled = [&](std::span<const double> rr, std::span<const double> mm) {
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a = std::max(a, std::abs(rr[i]) / (c - st.diag[i] / mm[i]));
    return a;
  };
  if (!eval(v, m, r)) throw SolverError("solve_elliptic: initial guess not admissible");
  double res = scaled(r, m);
  std::size_t it = 0;
  while (res > tol) {
    if (++it > max_iter) throw SolverError("solve_elliptic: Newton did not converge (residual " + std::to_string(res) + ")");
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = st.lower[i] / m[i];
      di[i] = st.diag[i] / m[i] - c;
      up[i] = st.upper[i] / m[i];
      neg[i] = -r[i];
    }
    const auto delta = solve_tridiagonal(lo, di, up, neg);
    const double step = norm(delta);
    double alpha = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) vt[i] = v[i] + alpha * delta[i];
      if (!eval(vt, mt, rt)) continue;
      const double rn = scaled(rt, mt);
      if (rn < (1.0 - 1e-4 * alpha) * res || alpha * step <= 1e-3 * tol) {
        v.swap(vt);
        m.swap(mt);
        r.swap(rt);
        res = rn;
        ok = true;
        break;
      }
    }
    if (!ok) throw SolverError("solve_elliptic: line search failed");
    if (alpha * step <= 1e-3 * tol) break;
  }
  EllipticSolution out;
  out.v = v;
  out.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.u[i] = v[i] + kappa * ref.psi[i];
  out.density = m;
  out.iterations = it;
  out.residual = res;
  return out;
}

/// The cusp reference problem (omega + i ddbar u) = e^u omega / |s|^2 and
/// its fitted C = max |u - psi_o| on the grid.
struct CuspReference {
  EllipticSolution solution;
  double fitted_C;
};

inline CuspReference cusp_reference(const ModelGeometry& geom, const Mesh& mesh) {
  EllipticProblem prob;
  prob.geom = geom;
  prob.gamma = 0.0;
  prob.source_field.assign(mesh.size(), 0.0);
  CuspReference out{solve_elliptic(prob, mesh), 0.0};
  for (double x : out.solution.v) out.fitted_C = std::max(out.fitted_C, std::abs(x));
  return out;
}

// ---------------------------------------------------------------------------
// Sub-solution barrier
// ---------------------------------------------------------------------------

/// M(t) = (1 - 2lt) phi(t0) + t u + n (t log t - t) on the trajectory's steps
/// after t0, where u solves the elliptic problem with source -2l phi(t0) and
/// reference coefficient kappa = 1 + 2l t0.
struct Subsolution {
  double t0 = 0.0;
  double l = 0.0;
  std::size_t start = 0;       ///< trajectory index of t0
  std::vector<double> times;   ///< t (relative to t0), starting at 0
  std::vector<std::vector<double>> values;
  EllipticSolution elliptic;
};

namespace detail {

inline void check_subsolution_admissible(const NodalModel& model, double t0, double l) {
  if (!(t0 > 0.0)) throw DomainError("build_subsolution: t0 must be positive");
  if (!(2.0 * l - 1.0 > 0.0 && 1.0 / (2.0 * l - 1.0) < model.horizon))
    throw DomainError("build_subsolution: l must satisfy 1/(2l - 1) < T");
  if (!(2.0 * l - 1.0 + model.class_slope >= 0.5))
    throw DomainError("build_subsolution: l violates (2l - 1) omega + nu_gamma >= omega / 2");
  if (!(t0 < 1.0 / (2.0 * l))) throw DomainError("build_subsolution: horizon 1/(2l) - t0 is empty");
  const double kappa = 1.0 + 2.0 * l * t0;
  for (std::size_t i = 0; i < model.g.size(); ++i) {
    const double nu = model.twist_shift * model.g[i] + model.ell_coeff * model.theta[i];
    if (!((2.0 * l - 1.0) * model.g[i] + kappa * nu >= 0.0))
      throw DomainError("build_subsolution: (2l - 1) omega + (1 + 2l t0) nu_gamma >= 0 fails");
    if (!((1.0 - kappa) * model.g[i] + kappa * model.ref_density[i] > 0.0))
      throw DomainError("build_subsolution: omega + (1 + 2l t0) i ddbar psi is not positive");
  }
}

}  // namespace detail

inline Subsolution build_subsolution(const Trajectory& traj, double t0, double l, int dim = 1) {
  if (traj.model.variant != Variant::Conical && traj.model.variant != Variant::Cusp)
    throw std::invalid_argument("build_subsolution: needs a conical or cusp trajectory");
  detail::check_subsolution_admissible(traj.model, t0, l);
  const std::size_t k0 = traj.index_at(t0, 1e-12);
  if (k0 == Trajectory::npos) throw std::invalid_argument("build_subsolution: t0 is not a step time of the trajectory");

  Subsolution sub;
  sub.t0 = traj.states[k0].t;
  sub.l = l;
  sub.start = k0;
  const std::vector<double> phi_t0 = traj.phi(k0);
  const std::size_t n = phi_t0.size();

  EllipticProblem prob;
  prob.geom = traj.geom;
  prob.gamma = traj.model.gamma;
  prob.reference_coeff = 1.0 + 2.0 * l * sub.t0;
  prob.source_field.resize(n);
  for (std::size_t i = 0; i < n; ++i) prob.source_field[i] = -2.0 * l * phi_t0[i];
  sub.elliptic = solve_elliptic(prob, traj.mesh);

  const double t_end = 1.0 / (2.0 * l) - sub.t0;
  for (std::size_t k = k0; k < traj.states.size(); ++k) {
    const double t = traj.states[k].t - sub.t0;
    if (t > t_end * (1.0 + 1e-12)) break;
    const double profile = t > 0.0 ? dim * (t * std::log(t) - t) : 0.0;
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i)
      m[i] = (1.0 - 2.0 * l * t) * phi_t0[i] + t * sub.elliptic.u[i] + profile;
    sub.times.push_back(t);
    sub.values.push_back(std::move(m));
  }
  return sub;
}

struct CheckReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double max_defect = -std::numeric_limits<double>::infinity();  ///< max lhs - rhs
  std::vector<ViolationRow> dump;
  bool pass = false;
};

namespace detail {

inline void record(CheckReport& rep, double t, double u, double lhs, double rhs, double tol,
                   std::size_t dump_cap = 10000) {
  ++rep.checked;
  rep.max_defect = std::max(rep.max_defect, lhs - rhs);
  if (lhs > rhs + tol) {
    ++rep.violations;
    if (rep.dump.size() < dump_cap) rep.dump.push_back({t, u, lhs, rhs});
  }
}

inline void require_same_grid(const Trajectory& a, const Trajectory& b, const char* who) {
  if (!(a.mesh == b.mesh)) throw std::invalid_argument(std::string(who) + ": meshes differ");
  if (!(a.geom == b.geom)) throw std::invalid_argument(std::string(who) + ": geometries differ");
}

}  // namespace detail

/// M(t) <= phi(t0 + t) + tol at every node and every step of the barrier.
inline CheckReport check_subsolution(const Trajectory& traj, const Subsolution& sub, double tol = 1e-8) {
  CheckReport rep;
  for (std::size_t k = 0; k < sub.times.size(); ++k) {
    const std::size_t idx = sub.start + k;
    const auto phi = traj.phi(idx);
    for (std::size_t i = 0; i < phi.size(); ++i)
      detail::record(rep, traj.states[idx].t, traj.mesh[i], sub.values[k][i], phi[i], tol);
  }
  rep.pass = rep.violations == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Contraction and orderings
// ---------------------------------------------------------------------------

struct ContractionReport {
  std::vector<double> times;
  std::vector<double> curve;  ///< max over the grid of phi_A(t) - phi_B(t)
  double bound = 0.0;         ///< max over the grid of phi_A(0) - phi_B(0)
  CheckReport check;
};

/// sup(phi_A(t) - phi_B(t)) <= sup(phi_A(0) - phi_B(0)) + tol at every step.
inline ContractionReport contraction_test(const Trajectory& a, const Trajectory& b, double tol = 1e-8) {
  detail::require_same_grid(a, b, "contraction_test");
  if (a.model.variant != b.model.variant || a.model.gamma != b.model.gamma || a.model.ell_eff != b.model.ell_eff)
    throw std::invalid_argument("contraction_test: configurations differ");
  if (a.states.size() != b.states.size()) throw std::invalid_argument("contraction_test: step counts differ");
  ContractionReport rep;
  rep.bound = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.phi0.size(); ++i) rep.bound = std::max(rep.bound, a.phi0[i] - b.phi0[i]);
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    if (a.states[k].t != b.states[k].t) throw std::invalid_argument("contraction_test: time grids differ");
    const auto pa = a.phi(k), pb = b.phi(k);
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < pa.size(); ++i)
      if (pa[i] - pb[i] > worst) {
        worst = pa[i] - pb[i];
        arg = i;
      }
    rep.times.push_back(a.states[k].t);
    rep.curve.push_back(worst);
    detail::record(rep.check, a.states[k].t, a.mesh[arg], worst, rep.bound, tol);
  }
  rep.check.pass = rep.check.violations == 0;
  return rep;
}

/// phi_lower(t) + t lift ell <= phi_upper(t) + tol at every node and every
/// time present in both trajectories.
inline CheckReport nodal_ordering(const Trajectory& lower, const Trajectory& upper, double lift, double tol = 1e-8) {
  detail::require_same_grid(lower, upper, "nodal_ordering");
  CheckReport rep;
  std::size_t j = 0;
  for (std::size_t k = 0; k < lower.states.size(); ++k) {
    const double t = lower.states[k].t;
    const double slack = 1e-12 * std::max(1.0, t);
    while (j < upper.states.size() && upper.states[j].t < t - slack) ++j;
    if (j == upper.states.size()) break;
    if (upper.states[j].t > t + slack) continue;
    const auto pl = lower.phi(k), pu = upper.phi(j);
    for (std::size_t i = 0; i < pl.size(); ++i)
      detail::record(rep, t, lower.mesh[i], pl[i] + t * lift * lower.model.ell[i], pu[i], tol);
  }
  rep.pass = rep.violations == 0 && rep.checked > 0;
  return rep;
}

/// phi_gamma(t) + t gamma ell <= phi_upper(t) + tol. The lift is gamma for a
/// conical lower run and 0 otherwise, so a cusp lower run against a gamma = 0
/// regularized run gives the cusp link of the sandwich.
inline CheckReport ordering_vs_regularized(const Trajectory& lower, const Trajectory& upper, double tol = 1e-8) {
  const double lift = lower.model.variant == Variant::Conical ? lower.model.gamma : 0.0;
  return nodal_ordering(lower, upper, lift, tol);
}

}  // namespace conekrf
