#pragma once

// Implicit time integration of the radial parabolic Monge-Ampere equation
//
//   d phi/dt = log((omega_{gamma t} + i ddbar phi) / omega) + h + (1 - gamma) ell_eff
//
// in the bounded unknown chi = phi - t psi_ref, where psi_ref is psi_gamma
// (conical), psi_o (cusp) or 0 (regularized / smoke). In radial densities
//
//   m   = (1 + t slope) g + t psi_ref'' + D2 chi
//   rhs = log(m / g) + (1 - gamma) ell_eff          (= d phi / dt)
//   d chi / dt = rhs - psi_ref (+ manufactured forcing)
//
// The known fields psi_ref and ell are differenced with the same flux-form
// operator as chi, except that their exact derivative enters at each end
// where a divisor sits (u_min; also u_max for two points):
//
//   psi_ref'' -> D2~ psi_ref,   theta -> -D2~ ell.
//
// The continuum identity omega_{0t} + i ddbar(phi + t gamma ell) = omega_{gamma t} + i ddbar phi
// then holds node by node, so the conical, cusp and regularized runs compare
// without O(h^2) consistency defects.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conekrf/errors.hpp"
#include "conekrf/geometry.hpp"
#include "conekrf/mesh.hpp"
#include "conekrf/tridiagonal.hpp"

namespace conekrf {

enum class Variant {
  Conical,      ///< cone angle 2 pi gamma, reference psi_gamma
  Regularized,  ///< log|s|^2 -> log(eps^2 + |s|^2), evolves phi directly
  Cusp,         ///< gamma = 0, reference psi_o
  Smoke,        ///< no divisor, no twist: d phi/dt = log((omega + i ddbar phi)/omega)
};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Conical: return "conical";
    case Variant::Regularized: return "regularized";
    case Variant::Cusp: return "cusp";
    case Variant::Smoke: return "smoke";
  }
  return "?";
}

struct DtSegment {
  double t_end;
  double dt;
  bool operator==(const DtSegment&) const = default;
};

/// dt = t/10 per decade from 1e-7 up to t = 1e-2, then dt = 1e-3 to the horizon.
inline std::vector<DtSegment> default_dt_schedule(double horizon) {
  std::vector<DtSegment> s;
  for (double end = 1e-6; end <= 1e-2 * (1 + 1e-12); end *= 10.0) {
    if (end >= horizon) break;
    s.push_back({end, end / 10.0});
  }
  s.push_back({horizon, std::min(1e-3, horizon / 10.0)});
  return s;
}

struct FlowConfig {
  ModelGeometry geom{};
  ConeParams params{};
  Mesh mesh = build_mesh(-20.0, 12.0, 513, 1.0);
  Variant variant = Variant::Conical;
  int mollify_j = 4;
  std::vector<DtSegment> dt_schedule{};  ///< empty: default_dt_schedule(horizon)
  double newton_tol = 1e-11;
  std::size_t newton_max_iter = 50;
  double positivity_floor = 0.0;  ///< <= 0: 1e-14 * min g over the mesh
  double dt_floor = 1e-12;
  /// Extra source in d chi/dt (manufactured solutions); empty means none.
  std::function<double(double t, double u)> forcing{};

  /// gamma as it enters the equation: 0 for cusp and smoke.
  double effective_gamma() const {
    return (variant == Variant::Cusp || variant == Variant::Smoke) ? 0.0 : params.gamma;
  }

  std::vector<DtSegment> schedule() const {
    return dt_schedule.empty() ? default_dt_schedule(params.horizon_T) : dt_schedule;
  }

  void validate() const {
    if (variant == Variant::Conical && !(params.gamma > 0.0))
      throw ConfigError("Conical requires gamma > 0", "flow.gamma");
    if (variant == Variant::Regularized && !(params.epsilon > 0.0))
      throw ConfigError("Regularized requires epsilon > 0", "flow.epsilon");
    if (variant == Variant::Regularized && mollify_j < 1)
      throw ConfigError("mollify_j must be >= 1", "flow.mollify_j");
    ConeParams eff = params;
    eff.gamma = effective_gamma();
    if (variant == Variant::Smoke) {
      if (!(params.horizon_T > 0.0)) throw ConfigError("horizon_T must be positive", "flow.horizon_T");
    } else {
      validate_params(geom, eff);
    }
    if (!(newton_tol > 0.0)) throw ConfigError("newton_tol must be positive", "flow.newton_tol");
    if (newton_max_iter < 1) throw ConfigError("newton_max_iter must be >= 1", "flow.newton_max_iter");
    if (!(dt_floor > 0.0)) throw ConfigError("dt_floor must be positive", "flow.dt_floor");
    double prev = 0.0;
    for (const auto& seg : schedule()) {
      if (!(seg.dt > 0.0)) throw ConfigError("dt must be positive", "flow.dt_schedule");
      if (!(seg.t_end > prev)) throw ConfigError("dt_schedule t_end must increase", "flow.dt_schedule");
      prev = seg.t_end;
    }
    if (prev < params.horizon_T * (1 - 1e-12))
      throw ConfigError("dt_schedule does not cover (0, horizon_T]", "flow.dt_schedule");
  }
};

/// Per-point coefficients of the equation at radial coordinate u.
struct PointTerms {
  double g;
  double ell;      ///< log|s|^2 (0 for smoke)
  double ell_eff;  ///< ell, or log(eps^2 + |s|^2) for the regularized flow
  double psi;      ///< reference potential
  double psi_dd;   ///< its second u-derivative
};

inline PointTerms point_terms(const FlowConfig& cfg, double u) {
  const auto& geom = cfg.geom;
  PointTerms p{geom.g(u), 0.0, 0.0, 0.0, 0.0};
  if (cfg.variant == Variant::Smoke) return p;
  p.ell = geom.ell(u);
  p.ell_eff = p.ell;
  switch (cfg.variant) {
    case Variant::Conical:
      p.psi = psi_gamma_u(geom, cfg.params.gamma, u);
      p.psi_dd = psi_gamma_duu(geom, cfg.params.gamma, u);
      break;
    case Variant::Cusp:
      p.psi = psi_cusp_u(geom, u);
      p.psi_dd = psi_cusp_duu(geom, u);
      break;
    case Variant::Regularized: {
      const double eps2 = cfg.params.epsilon * cfg.params.epsilon;
      p.ell_eff = std::log(eps2) + std::log1p(std::exp(p.ell) / eps2);
      break;
    }
    case Variant::Smoke: break;
  }
  return p;
}

/// Nodal copy of everything the discrete equation and the validators need.
struct NodalModel {
  Variant variant = Variant::Conical;
  double gamma = 0.0;        ///< effective gamma
  double horizon = 0.0;
  double ell_coeff = 0.0;    ///< (1 - gamma) in front of ell_eff; 0 for smoke
  double class_slope = 0.0;  ///< omega_{gamma t} = (1 + t class_slope) omega
  double twist_shift = 0.0;  ///< c - 2: the part of nu_gamma proportional to omega
  std::vector<double> u;
  std::vector<double> g;
  std::vector<double> ell;
  std::vector<double> ell_eff;
  std::vector<double> psi;
  std::vector<double> psi_dd;  ///< D2~ psi_ref
  std::vector<double> theta;   ///< -D2~ ell, 0 for smoke
  /// omega_ref = omega + i ddbar psi_ref (closed form): omega_gamma, omega_o, or omega.
  std::vector<double> ref_density;

  double class_factor(double t) const { return 1.0 + t * class_slope; }

  /// Nodal density of omega_{gamma t} = omega + t((c - 2) omega + (1 - gamma) theta).
  double background(std::size_t i, double t) const {
    return g[i] + t * (twist_shift * g[i] + ell_coeff * theta[i]);
  }
};

inline NodalModel make_nodal_model(const FlowConfig& cfg) {
  NodalModel m;
  m.variant = cfg.variant;
  m.gamma = cfg.effective_gamma();
  m.horizon = cfg.params.horizon_T;
  m.ell_coeff = cfg.variant == Variant::Smoke ? 0.0 : 1.0 - m.gamma;
  m.class_slope = cfg.variant == Variant::Smoke ? 0.0 : cfg.geom.class_slope(m.gamma);
  m.twist_shift = cfg.variant == Variant::Smoke ? 0.0 : cfg.geom.divisor().twist_c - 2.0;
  const auto nodes = cfg.mesh.nodes();
  const std::size_t n = nodes.size();
  m.u.assign(nodes.begin(), nodes.end());
  m.g.resize(n);
  m.ell.resize(n);
  m.ell_eff.resize(n);
  m.psi.resize(n);
  m.psi_dd.resize(n);
  m.ref_density.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PointTerms p = point_terms(cfg, nodes[i]);
    m.g[i] = p.g;
    m.ell[i] = p.ell;
    m.ell_eff[i] = p.ell_eff;
    m.psi[i] = p.psi;
    m.psi_dd[i] = p.psi_dd;
    m.ref_density[i] = p.g + p.psi_dd;
  }
  m.theta.assign(n, 0.0);
  if (cfg.variant == Variant::Smoke) return m;
  const bool both = cfg.geom.divisor().kind == DivisorKind::TwoPoint;
  auto psi_du = [&](double u) {
    if (cfg.variant == Variant::Conical) return psi_gamma_du(cfg.geom, cfg.params.gamma, u);
    if (cfg.variant == Variant::Cusp) return psi_cusp_du(cfg.geom, u);
    return 0.0;
  };
  const double u0 = nodes.front(), u1 = nodes.back();
  m.psi_dd = second_difference(cfg.mesh, m.psi, psi_du(u0), both ? psi_du(u1) : 0.0);
  m.theta = second_difference(cfg.mesh, m.ell, cfg.geom.ell_du(u0), both ? cfg.geom.ell_du(u1) : 0.0);
  for (double& v : m.theta) v = -v;
  return m;
}

struct FlowState {
  double t = 0.0;
  std::vector<double> chi;
  std::vector<double> phidot;          ///< d phi/dt at (t, chi); NaN where undefined at t = 0
  std::vector<double> metric_density;  ///< density of omega_{gamma t} + i ddbar phi
};

struct StepRecord {
  double t;                      ///< time reached
  double dt;
  std::size_t newton_iterations;
  std::size_t halvings;          ///< failed attempts before this step was accepted
};

struct Trajectory {
  ModelGeometry geom{};
  Mesh mesh = build_mesh(-1.0, 1.0, 8);
  NodalModel model;
  std::vector<double> phi0;
  std::vector<FlowState> states;  ///< states[0] is t = 0
  std::vector<StepRecord> steps;
  bool aborted = false;
  std::string abort_reason;

  /// phi = chi + t psi_ref at state k.
  std::vector<double> phi(std::size_t k) const {
    const FlowState& s = states.at(k);
    std::vector<double> out(s.chi.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.chi[i] + s.t * model.psi[i];
    return out;
  }

  /// Index of the state whose time is within `tol` of t, or npos.
  std::size_t index_at(double t, double tol = 1e-9) const {
    for (std::size_t k = 0; k < states.size(); ++k)
      if (std::abs(states[k].t - t) <= tol * std::max(1.0, std::abs(t))) return k;
    return npos;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

class FlowSolver {
 public:
  explicit FlowSolver(FlowConfig config) : cfg_(std::move(config)) {
    cfg_.validate();
    model_ = make_nodal_model(cfg_);
    floor_ = cfg_.positivity_floor;
    if (!(floor_ > 0.0)) floor_ = 1e-14 * *std::min_element(model_.g.begin(), model_.g.end());
    forcing_.assign(cfg_.mesh.size(), 0.0);
  }

  const FlowConfig& config() const noexcept { return cfg_; }
  const NodalModel& model() const noexcept { return model_; }
  double positivity_floor() const noexcept { return floor_; }

  void metric_density_into(double t, std::span<const double> chi, std::span<double> out) const {
    second_difference_into(cfg_.mesh, chi, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += model_.background(i, t) + t * model_.psi_dd[i];
  }

  std::vector<double> metric_density(double t, std::span<const double> chi) const {
    std::vector<double> m(chi.size());
    metric_density_into(t, chi, m);
    return m;
  }

  /// d phi/dt at (t, chi). Throws PositivityError listing nodes with m <= floor.
  std::vector<double> rhs(double t, std::span<const double> chi) const {
    const std::vector<double> m = metric_density(t, chi);
    check_positive(m);
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = rhs_at(i, m[i]);
    return out;
  }

  FlowState initial_state(std::span<const double> chi0) const {
    FlowState s;
    s.t = 0.0;
    s.chi.assign(chi0.begin(), chi0.end());
    s.metric_density = metric_density(0.0, chi0);
    s.phidot.assign(chi0.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < chi0.size(); ++i)
      if (s.metric_density[i] > floor_) s.phidot[i] = rhs_at(i, s.metric_density[i]);
    return s;
  }

  /// One backward Euler step chi+ = chi + dt (rhs(t + dt, chi+) - psi_ref + f) by damped Newton.
  ///
  /// Convergence is measured by the Jacobian-scaled residual max_i |G_i| / J_ii,
  /// i.e. the size of a diagonal Newton correction. Near the divisor J_ii grows
  /// like dt / (h^2 m), and the unscaled residual cannot drop below J_ii * ulp(chi).
  FlowState step(const FlowState& s, double dt, std::size_t* iterations = nullptr) const {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    const std::size_t n = s.chi.size();
    if (n != cfg_.mesh.size()) throw std::invalid_argument("step: state/mesh size mismatch");
    const double t1 = s.t + dt;
    const Stencil& st = cfg_.mesh.stencil();

    std::vector<double> base(n);
    fill_forcing(t1);
    for (std::size_t i = 0; i < n; ++i) base[i] = s.chi[i] + dt * (forcing_[i] - model_.psi[i]);

    std::vector<double> x = s.chi, m(n), G(n), lo(n), di(n), up(n), neg(n), xt(n), mt(n), Gt(n);

    auto residual = [&](std::span<const double> xv, std::span<const double> mv, std::span<double> out) {
      for (std::size_t i = 0; i < n; ++i) out[i] = xv[i] - base[i] - dt * rhs_at(i, mv[i]);
    };
    auto scaled_norm = [&](std::span<const double> r, std::span<const double> mv) {
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double jii = 1.0 - dt * st.diag[i] / mv[i];
        worst = std::max(worst, std::abs(r[i]) / jii);
      }
      return worst;
    };

    metric_density_into(t1, x, m);
    check_positive(m);
    residual(x, m, G);
    double merit = scaled_norm(G, m);

    std::size_t it = 0;
    while (merit > cfg_.newton_tol) {
      if (++it > cfg_.newton_max_iter)
        throw SolverError("Newton did not converge in " + std::to_string(cfg_.newton_max_iter) +
                          " iterations (residual " + std::to_string(merit) + ")");
      for (std::size_t i = 0; i < n; ++i) {
        const double s_i = dt / m[i];
        lo[i] = -s_i * st.lower[i];
        di[i] = 1.0 - s_i * st.diag[i];
        up[i] = -s_i * st.upper[i];
        neg[i] = -G[i];
      }
      const std::vector<double> delta = solve_tridiagonal(lo, di, up, neg);
      double step_size = 0.0;
      for (double d : delta) step_size = std::max(step_size, std::abs(d));

      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + alpha * delta[i];
        metric_density_into(t1, xt, mt);
        if (!all_positive(mt)) continue;
        residual(xt, mt, Gt);
        const double merit_t = scaled_norm(Gt, mt);
        // at the rounding floor the merit stalls; a correction below tol is convergence
        if (merit_t < (1.0 - 1e-4 * alpha) * merit || alpha * step_size <= cfg_.newton_tol) {
          x.swap(xt);
          m.swap(mt);
          G.swap(Gt);
          merit = alpha * step_size <= cfg_.newton_tol ? std::min(merit_t, cfg_.newton_tol) : merit_t;
          accepted = true;
          break;
        }
      }
      if (!accepted) throw SolverError("Newton line search failed to keep the metric positive");
    }
    if (iterations) *iterations = it;

    FlowState out;
    out.t = t1;
    out.chi = std::move(x);
    out.metric_density = std::move(m);
    out.phidot.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.phidot[i] = rhs_at(i, out.metric_density[i]);
    return out;
  }

  /// Integrates from chi0 to the horizon. Failures halve dt down to dt_floor,
  /// after which the run stops with `aborted` set and the partial trajectory kept.
  Trajectory run(std::span<const double> chi0) const {
    Trajectory traj;
    traj.geom = cfg_.geom;
    traj.mesh = cfg_.mesh;
    traj.model = model_;
    traj.phi0.assign(chi0.begin(), chi0.end());
    traj.states.push_back(initial_state(chi0));

    const auto schedule = cfg_.schedule();
    const double T = cfg_.params.horizon_T;
    double t = 0.0;
    std::size_t seg = 0;
    while (t < T * (1 - 1e-14)) {
      while (seg + 1 < schedule.size() && t >= schedule[seg].t_end * (1 - 1e-12)) ++seg;
      const double seg_end = std::min(schedule[seg].t_end, T);
      double dt = std::min(schedule[seg].dt, seg_end - t);
      if (seg_end - (t + dt) < 1e-9 * dt) dt = seg_end - t;

      std::size_t halvings = 0;
      for (;;) {
        try {
          std::size_t iters = 0;
          FlowState next = step(traj.states.back(), dt, &iters);
          if (std::abs(next.t - seg_end) < 1e-12 * std::max(1.0, seg_end)) next.t = seg_end;
          t = next.t;
          traj.states.push_back(std::move(next));
          traj.steps.push_back({t, dt, iters, halvings});
          break;
        } catch (const SolverError& e) {
          traj.abort_reason = e.what();
        } catch (const PositivityError& e) {
          traj.abort_reason = e.what();
        }
        dt *= 0.5;
        ++halvings;
        if (dt < cfg_.dt_floor) {
          traj.aborted = true;
          traj.abort_reason = "dt fell below dt_floor at t = " + std::to_string(t) + ": " + traj.abort_reason;
          return traj;
        }
      }
      traj.abort_reason.clear();
    }
    return traj;
  }

 private:
  double rhs_at(std::size_t i, double m) const {
    return std::log(m / model_.g[i]) + model_.ell_coeff * model_.ell_eff[i];
  }

  bool all_positive(std::span<const double> m) const {
    return std::all_of(m.begin(), m.end(), [&](double v) { return v > floor_; });
  }

  void check_positive(std::span<const double> m) const {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (!(m[i] > floor_)) bad.push_back(i);
    if (bad.empty()) return;
    const std::string what =
        "metric density not above the positivity floor at " + std::to_string(bad.size()) + " node(s)";
    throw PositivityError(what, std::move(bad));
  }

  void fill_forcing(double t) const {
    if (!cfg_.forcing) return;
    const auto nodes = cfg_.mesh.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) forcing_[i] = cfg_.forcing(t, nodes[i]);
  }

  FlowConfig cfg_;
  NodalModel model_;
  double floor_ = 0.0;
  mutable std::vector<double> forcing_;
};

// Free-function surface.

inline std::vector<double> rhs(const FlowConfig& cfg, double t, std::span<const double> chi) {
  return FlowSolver(cfg).rhs(t, chi);
}

inline FlowState step_backward_euler(const FlowConfig& cfg, const FlowState& state, double dt) {
  return FlowSolver(cfg).step(state, dt);
}

/// For conical and cusp runs chi0 = phi0 (t = 0); regularized runs start from
/// mollify_initial(phi0, mollify_j), which the caller supplies.
inline Trajectory run_flow(const FlowConfig& cfg, std::span<const double> phi0) {
  return FlowSolver(cfg).run(phi0);
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Smoothing from above: a sup over a window of k = floor(reach / j) nodes
/// followed by a k-window average. The result is >= phi0, nonincreasing in j,
/// and equal to phi0 once k = 0.
inline std::vector<double> mollify_initial(std::span<const double> phi0, int j, int reach = 32) {
  if (j < 1) throw std::invalid_argument("mollify_initial: j must be >= 1");
  const std::size_t n = phi0.size();
  const std::size_t k = static_cast<std::size_t>(reach / j);
  if (k == 0) return {phi0.begin(), phi0.end()};
  std::vector<double> sup(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i >= k ? i - k : 0, b = std::min(n - 1, i + k);
    sup[i] = *std::max_element(phi0.begin() + static_cast<std::ptrdiff_t>(a),
                               phi0.begin() + static_cast<std::ptrdiff_t>(b) + 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i >= k ? i - k : 0, b = std::min(n - 1, i + k);
    double acc = 0.0;
    for (std::size_t p = a; p <= b; ++p) acc += sup[p];
    out[i] = std::max(acc / static_cast<double>(b - a + 1), phi0[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

/// chi*(t, u) with its t-derivative and second u-derivative in closed form.
struct ManufacturedSolution {
  std::function<double(double t, double u)> value;
  std::function<double(double t, double u)> dt;
  std::function<double(double t, double u)> duu;
};

/// Forcing that makes chi* an exact solution of the continuum chi-equation:
/// f = d chi*/dt - (log(m*/g) + (1 - gamma) ell_eff - psi_ref).
inline std::function<double(double, double)> manufactured_forcing(const FlowConfig& cfg,
                                                                  const ManufacturedSolution& exact) {
  const double slope = cfg.variant == Variant::Smoke ? 0.0 : cfg.geom.class_slope(cfg.effective_gamma());
  const double coeff = cfg.variant == Variant::Smoke ? 0.0 : 1.0 - cfg.effective_gamma();
  return [cfg, exact, slope, coeff](double t, double u) {
    const PointTerms p = point_terms(cfg, u);
    const double m = (1.0 + t * slope) * p.g + t * p.psi_dd + exact.duu(t, u);
    return exact.dt(t, u) - (std::log(m / p.g) + coeff * p.ell_eff - p.psi);
  };
}

struct MmsLevel {
  double dt;
  std::size_t n;
  double h;      ///< largest cell
  double error;  ///< sup over accepted states and counted nodes of |chi - chi*|
};

struct MmsTable {
  std::vector<MmsLevel> levels;
  std::vector<double> dt_orders;  ///< log(e_k / e_{k+1}) / log(dt_k / dt_{k+1}); NaN when dt is unchanged
  std::vector<double> h_orders;   ///< same against h
};

/// Runs the forced flow on each (dt, n) level: uniform n-node mesh on the base
/// mesh's interval, constant step dt, initial data chi*(0, .). `skip` boundary
/// rows at each end are left out of the error.
inline MmsTable mms_run(const FlowConfig& base, const ManufacturedSolution& exact,
                        const std::vector<std::pair<double, std::size_t>>& ladder, std::size_t skip = 0) {
  MmsTable table;
  for (const auto& [dt, n] : ladder) {
    FlowConfig cfg = base;
    cfg.mesh = build_mesh(base.mesh.u_min(), base.mesh.u_max(), n, 1.0);
    cfg.dt_schedule = {{cfg.params.horizon_T, dt}};
    cfg.forcing = manufactured_forcing(cfg, exact);
    const auto nodes = cfg.mesh.nodes();
    std::vector<double> chi0(n);
    for (std::size_t i = 0; i < n; ++i) chi0[i] = exact.value(0.0, nodes[i]);
    const Trajectory traj = FlowSolver(cfg).run(chi0);
    if (traj.aborted) throw SolverError("mms_run: run aborted: " + traj.abort_reason);
    double err = 0.0;
    for (const FlowState& st : traj.states)
      for (std::size_t i = skip; i + skip < n; ++i)
        err = std::max(err, std::abs(st.chi[i] - exact.value(st.t, nodes[i])));
    const auto h = cfg.mesh.spacing();
    table.levels.push_back({dt, n, *std::max_element(h.begin(), h.end()), err});
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k + 1 < table.levels.size(); ++k) {
    const MmsLevel& a = table.levels[k];
    const MmsLevel& b = table.levels[k + 1];
    const double le = std::log(a.error / b.error);
    table.dt_orders.push_back(a.dt != b.dt ? le / std::log(a.dt / b.dt) : nan);
    table.h_orders.push_back(a.n != b.n ? le / std::log(a.h / b.h) : nan);
  }
  return table;
}

}  // namespace conekrf
