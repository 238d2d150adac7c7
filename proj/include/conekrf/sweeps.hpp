#pragma once

// Parameter sweeps: gamma -> 0, epsilon -> 0, t -> 0, mesh refinement and
// domain truncation. Independent runs go through parallel_map.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conekrf/compare.hpp"
#include "conekrf/errors.hpp"
#include "conekrf/flow.hpp"
#include "conekrf/geometry.hpp"
#include "conekrf/mesh.hpp"

namespace conekrf {

enum class SweepAxis { Gamma, Epsilon, TimeZero, MeshRefine, DomainSize };

inline std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Gamma: return "gamma";
    case SweepAxis::Epsilon: return "epsilon";
    case SweepAxis::TimeZero: return "time_zero";
    case SweepAxis::MeshRefine: return "mesh_refine";
    case SweepAxis::DomainSize: return "domain_size";
  }
  return "unknown";
}

struct SweepPoint {
  double parameter;
  double value;
};

/// value ~ constant * parameter^rate
struct SweepFit {
  double rate;
  double constant;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::Gamma;
  std::vector<SweepPoint> points;  ///< sorted by parameter
  bool pass = false;
  std::string verdict;             ///< "pass", "fail" or a guard message
  std::optional<SweepFit> fit;
  std::map<std::string, double> aux;
  std::map<std::string, std::vector<SweepPoint>> series;  ///< secondary curves, same ordering rule
  std::vector<ViolationRow> dump;
};

struct Window {
  double lo;
  double hi;
};

/// Runs fn(0..count-1) on up to `jobs` threads; results keep index order and
/// the first exception is rethrown.
template <class F>
auto parallel_map(std::size_t count, std::size_t jobs, F&& fn) {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  if (jobs <= 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) out[k] = fn(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  for (std::size_t w = 0; w < std::min(jobs, count); ++w)
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t k = next++; k < count; k = next++) out[k] = fn(k);
    }));
  for (auto& f : workers) f.get();
  return out;
}

namespace detail {

inline void sort_points(std::vector<SweepPoint>& pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.parameter < b.parameter; });
}

/// Least squares of log value = log constant + rate log parameter over positive entries.
inline std::optional<SweepFit> loglog_fit(std::span<const SweepPoint> pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& p : pts) {
    if (!(p.parameter > 0.0 && p.value > 0.0)) continue;
    const double x = std::log(p.parameter), y = std::log(p.value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  const double rate = (n * sxy - sx * sy) / den;
  return SweepFit{rate, std::exp((sy - rate * sx) / n)};
}

inline Trajectory checked_run(const FlowConfig& cfg, std::span<const double> phi0, const std::string& label) {
  Trajectory traj = run_flow(cfg, phi0);
  if (traj.aborted) throw SolverError(label + " aborted: " + traj.abort_reason);
  return traj;
}

inline std::size_t require_time(const Trajectory& traj, double t, const char* who) {
  const std::size_t k = traj.index_at(t, 1e-9 * std::max(1.0, t));
  if (k == Trajectory::npos)
    throw std::invalid_argument(std::string(who) + ": t = " + std::to_string(t) + " is not a step time");
  return k;
}

/// max over window nodes and the given step indices of |phi_a - phi_b|, with
/// node i of a matched to node i + offset of b.
inline double window_gap(const Trajectory& a, const Trajectory& b, std::span<const std::size_t> ka,
                         std::span<const std::size_t> kb, const Window& w, std::size_t offset = 0) {
  double gap = 0.0;
  for (std::size_t s = 0; s < ka.size(); ++s) {
    const auto pa = a.phi(ka[s]), pb = b.phi(kb[s]);
    for (std::size_t i = 0; i < pa.size(); ++i)
      if (a.mesh[i] >= w.lo && a.mesh[i] <= w.hi) gap = std::max(gap, std::abs(pa[i] - pb[i + offset]));
  }
  return gap;
}

inline bool strictly_decreasing(std::span<const double> v) {
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    if (!(v[k + 1] < v[k])) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// gamma -> 0
// ---------------------------------------------------------------------------

/// Conical runs for each gamma plus one cusp run, all from phi0 on base.mesh.
/// points: (gamma_k, e_k), e_k = max over window x times |phi_gamma_k - phi_cusp|;
/// series "d": (gamma_{k+1}, max |phi_gamma_k - phi_gamma_{k+1}|).
inline SweepResult gamma_sweep(const FlowConfig& base, std::span<const double> gammas, const Window& window,
                               std::span<const double> times, std::span<const double> phi0, std::size_t jobs = 1) {
  if (gammas.empty()) throw std::invalid_argument("gamma_sweep: empty gamma list");
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] > 0.0 && gammas[k] <= 1.0)) throw std::invalid_argument("gamma_sweep: gammas must lie in (0, 1]");
    if (k > 0 && !(gammas[k] < gammas[k - 1])) throw std::invalid_argument("gamma_sweep: gammas must be strictly decreasing");
  }
  if (times.empty()) throw std::invalid_argument("gamma_sweep: empty time list");
  if (!(window.lo < window.hi)) throw std::invalid_argument("gamma_sweep: empty window");

  const std::size_t runs = gammas.size() + 1;
  auto trajs = parallel_map(runs, jobs, [&](std::size_t k) {
    FlowConfig cfg = base;
    if (k < gammas.size()) {
      cfg.variant = Variant::Conical;
      cfg.params.gamma = gammas[k];
    } else {
      cfg.variant = Variant::Cusp;
      cfg.params.gamma = 0.0;
    }
    return detail::checked_run(cfg, phi0, "gamma_sweep: " + to_string(cfg.variant) + " run");
  });
  const Trajectory& cusp = trajs.back();
  auto indices = [&](const Trajectory& tr) {
    std::vector<std::size_t> ks;
    for (double t : times) ks.push_back(detail::require_time(tr, t, "gamma_sweep"));
    return ks;
  };
  const auto kc = indices(cusp);

  SweepResult res;
  res.axis = SweepAxis::Gamma;
  std::vector<double> e, d;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const auto kk = indices(trajs[k]);
    e.push_back(detail::window_gap(trajs[k], cusp, kk, kc, window));
    res.points.push_back({gammas[k], e.back()});
    if (k > 0) {
      d.push_back(detail::window_gap(trajs[k - 1], trajs[k], indices(trajs[k - 1]), kk, window));
      res.series["d"].push_back({gammas[k], d.back()});
    }
  }
  double psi_gap = 0.0;
  for (std::size_t i = 0; i < base.mesh.size(); ++i) {
    const double u = base.mesh[i];
    if (u >= window.lo && u <= window.hi)
      psi_gap = std::max(psi_gap, psi_gamma_u(base.geom, gammas.back(), u) - psi_cusp_u(base.geom, u));
  }
  res.aux["e_first"] = e.front();
  res.aux["e_last"] = e.back();
  res.aux["e_last_over_e_first"] = e.back() / e.front();
  res.aux["psi_gap_last"] = psi_gap;
  res.aux["e_last_over_psi_gap"] = e.back() / psi_gap;
  res.fit = detail::loglog_fit(res.points);

  const bool decreasing = detail::strictly_decreasing(e) && detail::strictly_decreasing(d);
  const bool touches = window.lo <= base.mesh.u_min() || window.hi >= base.mesh.u_max();
  res.aux["window_touches_boundary"] = touches ? 1.0 : 0.0;
  if (touches) {
    res.pass = false;
    res.verdict = "window touches boundary";
  } else {
    res.pass = decreasing;
    res.verdict = decreasing ? "pass" : "fail";
  }
  detail::sort_points(res.points);
  detail::sort_points(res.series["d"]);
  return res;
}

// ---------------------------------------------------------------------------
// epsilon -> 0
// ---------------------------------------------------------------------------

/// The ordering chain between conical, cusp and regularized runs:
///   phi_gamma + t gamma ell <= phi_cusp,
///   phi_gamma + t gamma ell <= phi_{eps,j} (regularized at gamma),
///   phi_cusp <= phi_{eps,j} (regularized at gamma = 0),
///   phi_{eps',j} <= phi_{eps,j} for eps' < eps, phi_{eps,j'} <= phi_{eps,j} for j' > j.
/// points: (eps, max gap phi_{eps,j_last}(gamma = 0) - phi_cusp).
inline SweepResult epsilon_sweep(const FlowConfig& base, double gamma, std::span<const double> epsilons,
                                 std::span<const int> j_list, std::span<const double> phi0, std::size_t jobs = 1,
                                 double tol = 1e-8) {
  if (epsilons.empty() || j_list.empty()) throw std::invalid_argument("epsilon_sweep: empty epsilon or j list");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) throw std::invalid_argument("epsilon_sweep: epsilons must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) throw std::invalid_argument("epsilon_sweep: epsilons must be decreasing");
  }
  for (std::size_t k = 0; k < j_list.size(); ++k) {
    if (j_list[k] < 1) throw std::invalid_argument("epsilon_sweep: j must be >= 1");
    if (k > 0 && !(j_list[k] > j_list[k - 1])) throw std::invalid_argument("epsilon_sweep: j list must be increasing");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("epsilon_sweep: gamma must be positive");

  const std::size_t ne = epsilons.size(), nj = j_list.size();
  // run layout: [conical, cusp, reg(gamma, e, j)..., reg(0, e, j)...]
  const std::size_t runs = 2 + 2 * ne * nj;
  auto reg_index = [&](int which, std::size_t e, std::size_t j) { return 2 + which * ne * nj + e * nj + j; };
  auto trajs = parallel_map(runs, jobs, [&](std::size_t k) {
    FlowConfig cfg = base;
    if (k == 0) {
      cfg.variant = Variant::Conical;
      cfg.params.gamma = gamma;
      return detail::checked_run(cfg, phi0, "epsilon_sweep: conical run");
    }
    if (k == 1) {
      cfg.variant = Variant::Cusp;
      cfg.params.gamma = 0.0;
      return detail::checked_run(cfg, phi0, "epsilon_sweep: cusp run");
    }
    const std::size_t r = k - 2, which = r / (ne * nj), e = (r % (ne * nj)) / nj, j = r % nj;
    cfg.variant = Variant::Regularized;
    cfg.params.gamma = which == 0 ? gamma : 0.0;
    cfg.params.epsilon = epsilons[e];
    cfg.mollify_j = j_list[j];
    const auto data = mollify_initial(phi0, j_list[j]);
    return detail::checked_run(cfg, data, "epsilon_sweep: regularized run");
  });

  SweepResult res;
  res.axis = SweepAxis::Epsilon;
  std::size_t violations = 0, checked = 0;
  double worst = -std::numeric_limits<double>::infinity();
  auto absorb = [&](const CheckReport& r, const std::string& link) {
    violations += r.violations;
    checked += r.checked;
    worst = std::max(worst, r.max_defect);
    res.aux["max_defect/" + link] = std::max(res.aux.count("max_defect/" + link) ? res.aux["max_defect/" + link]
                                                                                 : -std::numeric_limits<double>::infinity(),
                                             r.max_defect);
    for (const auto& row : r.dump)
      if (res.dump.size() < 10000) res.dump.push_back(row);
  };
  const Trajectory& conical = trajs[0];
  const Trajectory& cusp = trajs[1];
  absorb(nodal_ordering(conical, cusp, gamma, tol), "conical_cusp");
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t j = 0; j < nj; ++j) {
      const Trajectory& rg = trajs[reg_index(0, e, j)];
      const Trajectory& r0 = trajs[reg_index(1, e, j)];
      absorb(nodal_ordering(conical, rg, gamma, tol), "conical_regularized");
      absorb(nodal_ordering(cusp, r0, 0.0, tol), "cusp_regularized");
      if (e + 1 < ne) {
        absorb(nodal_ordering(trajs[reg_index(0, e + 1, j)], rg, 0.0, tol), "epsilon_monotone");
        absorb(nodal_ordering(trajs[reg_index(1, e + 1, j)], r0, 0.0, tol), "epsilon_monotone");
      }
      if (j + 1 < nj) {
        absorb(nodal_ordering(trajs[reg_index(0, e, j + 1)], rg, 0.0, tol), "j_monotone");
        absorb(nodal_ordering(trajs[reg_index(1, e, j + 1)], r0, 0.0, tol), "j_monotone");
      }
    }
  for (std::size_t e = 0; e < ne; ++e) {
    const Trajectory& r0 = trajs[reg_index(1, e, nj - 1)];
    const CheckReport gap = nodal_ordering(r0, cusp, 0.0, std::numeric_limits<double>::infinity());
    res.points.push_back({epsilons[e], gap.max_defect});
  }
  res.aux["violations"] = static_cast<double>(violations);
  res.aux["checked"] = static_cast<double>(checked);
  res.aux["max_defect"] = worst;
  res.aux["gamma"] = gamma;
  res.fit = detail::loglog_fit(res.points);
  res.pass = violations == 0 && checked > 0;
  res.verdict = res.pass ? "pass" : "fail";
  detail::sort_points(res.points);
  return res;
}

// ---------------------------------------------------------------------------
// t -> 0
// ---------------------------------------------------------------------------

struct TimeZeroOptions {
  double t_start = 1e-2;
  double threshold = 1e-3;      ///< stop once L1 <= threshold * ||phi0||_L1
  double max_deviation = 0.2;   ///< allowed max |L1 / (A t (1 + |log t|)) - 1|
};

/// The 1-3 geometric ladder t_start, t_start * 3/10, t_start / 10, ...
/// restricted to step times of the trajectory.
inline std::vector<double> time_ladder(const Trajectory& traj, double t_start) {
  std::vector<double> out;
  double decade = t_start;
  const double t_min = traj.states.size() > 1 ? traj.states[1].t : 0.0;
  for (int k = 0; k < 64 && decade >= t_min; ++k, decade /= 10.0) {
    for (double t : {decade, 0.3 * decade})
      if (t >= t_min && traj.index_at(t, 1e-9 * t) != Trajectory::npos) out.push_back(t);
  }
  return out;
}

/// L1(t) = int |phi(t) - phi0| g du along the ladder, down to threshold *
/// ||phi0||_L1. A is the log-space least-squares fit of A t (1 + |log t|);
/// points: (t, L1), series "profile": (t, A t (1 + |log t|)).
inline SweepResult time_zero_study(const Trajectory& traj, std::span<const double> phi0, const TimeZeroOptions& opt = {}) {
  if (phi0.size() != traj.mesh.size()) throw std::invalid_argument("time_zero_study: phi0 length mismatch");
  const std::size_t n = phi0.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::abs(phi0[i]) * traj.model.g[i];
  const double norm0 = integrate(traj.mesh, f);

  SweepResult res;
  res.axis = SweepAxis::TimeZero;
  std::vector<double> ts, ls;
  for (double t : time_ladder(traj, opt.t_start)) {
    const auto phi = traj.phi(traj.index_at(t, 1e-9 * t));
    for (std::size_t i = 0; i < n; ++i) f[i] = std::abs(phi[i] - phi0[i]) * traj.model.g[i];
    ts.push_back(t);
    ls.push_back(integrate(traj.mesh, f));
    if (ls.back() <= opt.threshold * norm0) break;
  }
  res.aux["phi0_L1"] = norm0;
  res.aux["ladder_points"] = static_cast<double>(ts.size());
  if (ts.empty()) {
    res.verdict = "fail: no ladder times in the trajectory";
    return res;
  }
  auto profile = [](double t) { return t * (1.0 + std::abs(std::log(t))); };
  double s = 0.0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (ls[k] > 0.0) {
      s += std::log(ls[k] / profile(ts[k]));
      ++m;
    }
  const double A = m > 0 ? std::exp(s / static_cast<double>(m)) : 0.0;
  double rms = 0.0, dev = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    res.points.push_back({ts[k], ls[k]});
    res.series["profile"].push_back({ts[k], A * profile(ts[k])});
    if (ls[k] > 0.0) {
      const double r = std::log(ls[k] / (A * profile(ts[k])));
      rms += r * r;
      dev = std::max(dev, std::abs(std::expm1(r)));
    }
  }
  rms = m > 0 ? std::sqrt(rms / static_cast<double>(m)) : 0.0;
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < ls.size(); ++k)
    if (!(ls[k + 1] < ls[k]) && !(ls[k] == 0.0 && ls[k + 1] == 0.0)) decreasing = false;
  const bool reached = ls.back() <= opt.threshold * norm0;
  res.fit = SweepFit{1.0, A};
  res.aux["A"] = A;
  res.aux["rms_log_residual"] = rms;
  res.aux["max_deviation"] = dev;
  res.aux["t_last"] = ts.back();
  res.aux["L1_last"] = ls.back();
  res.aux["reached_threshold"] = reached ? 1.0 : 0.0;
  res.aux["decreasing"] = decreasing ? 1.0 : 0.0;
  res.pass = decreasing && reached && dev <= opt.max_deviation;
  res.verdict = res.pass ? "pass" : "fail";
  detail::sort_points(res.points);
  detail::sort_points(res.series["profile"]);
  return res;
}

// ---------------------------------------------------------------------------
// Domain truncation
// ---------------------------------------------------------------------------

/// Uniform meshes [u_min_k, base.mesh.u_max()] with the base mesh's largest
/// spacing, data initial(u). points: (u_min_{k+1}, max over window x steps of
/// |phi_k - phi_{k+1}|), matched from the right end.
inline SweepResult truncation_study(const FlowConfig& base, std::span<const double> u_mins, const Window& window,
                                    const std::function<double(double)>& initial, std::size_t jobs = 1,
                                    double final_gap = 1e-5) {
  if (u_mins.size() < 2) throw std::invalid_argument("truncation_study: need at least two domains");
  for (std::size_t k = 1; k < u_mins.size(); ++k)
    if (u_mins[k] > u_mins[k - 1]) throw std::invalid_argument("truncation_study: u_mins must be decreasing");
  const double u_max = base.mesh.u_max();
  if (window.lo <= u_mins.front() || window.hi >= u_max)
    throw std::invalid_argument("truncation_study: window is wider than the smallest domain");
  const auto hs = base.mesh.spacing();
  const double h = *std::max_element(hs.begin(), hs.end());

  auto trajs = parallel_map(u_mins.size(), jobs, [&](std::size_t k) {
    FlowConfig cfg = base;
    const auto cells = static_cast<std::size_t>(std::llround((u_max - u_mins[k]) / h));
    cfg.mesh = build_mesh(u_max - static_cast<double>(cells) * h, u_max, cells + 1, 1.0);
    std::vector<double> phi0(cfg.mesh.size());
    for (std::size_t i = 0; i < phi0.size(); ++i) phi0[i] = initial(cfg.mesh[i]);
    return detail::checked_run(cfg, phi0, "truncation_study: run on u_min = " + std::to_string(u_mins[k]));
  });

  SweepResult res;
  res.axis = SweepAxis::DomainSize;
  std::vector<double> gaps;
  for (std::size_t k = 0; k + 1 < trajs.size(); ++k) {
    const Trajectory& a = trajs[k];
    const Trajectory& b = trajs[k + 1];
    const std::size_t offset = b.mesh.size() - a.mesh.size();
    for (std::size_t i = 0; i < a.mesh.size(); ++i)
      if (std::abs(a.mesh[i] - b.mesh[i + offset]) > 1e-9 * std::max(1.0, std::abs(a.mesh[i])))
        throw std::logic_error("truncation_study: meshes do not nest");
    if (a.states.size() != b.states.size()) throw std::logic_error("truncation_study: step counts differ");
    std::vector<std::size_t> ks(a.states.size());
    for (std::size_t s = 0; s < ks.size(); ++s) ks[s] = s;
    gaps.push_back(detail::window_gap(a, b, ks, ks, window, offset));
    res.points.push_back({b.mesh.u_min(), gaps.back()});
  }
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k)
    if (gaps[k + 1] > gaps[k]) decreasing = false;
  res.aux["final_gap"] = gaps.back();
  res.aux["spacing"] = h;
  res.pass = decreasing && gaps.back() < final_gap;
  res.verdict = res.pass ? "pass" : "fail";
  detail::sort_points(res.points);
  return res;
}

// ---------------------------------------------------------------------------
// Scheme order
// ---------------------------------------------------------------------------

struct OrderStudy {
  SweepResult spatial;   ///< points (h, error), fit rate = observed order
  SweepResult temporal;  ///< points (dt, error)
  MmsTable spatial_table;
  MmsTable temporal_table;
};

struct OrderOptions {
  std::vector<std::size_t> spatial_nodes{33, 65, 129, 257, 513};
  double spatial_dt = 0.01;
  std::vector<double> temporal_dts{0.01, 0.005, 0.0025, 0.00125, 0.000625};
  std::size_t temporal_nodes = 2049;
  double horizon = 0.1;
  double half_width = 4.0 * std::numbers::pi;
  double spatial_target = 2.0, spatial_band = 0.3;
  double temporal_target = 1.0, temporal_band = 0.2;
};

namespace detail {

inline SweepResult order_result(const MmsTable& table, bool spatial, double target, double band) {
  SweepResult r;
  r.axis = SweepAxis::MeshRefine;
  for (const auto& l : table.levels) r.points.push_back({spatial ? l.h : l.dt, l.error});
  const auto& orders = spatial ? table.h_orders : table.dt_orders;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double o : orders) {
    lo = std::min(lo, o);
    hi = std::max(hi, o);
  }
  r.fit = loglog_fit(r.points);
  r.aux["order_min"] = lo;
  r.aux["order_max"] = hi;
  r.aux["target"] = target;
  r.aux["band"] = band;
  r.pass = !orders.empty() && lo >= target - band && hi <= target + band;
  r.verdict = r.pass ? "pass" : "fail";
  sort_points(r.points);
  return r;
}

}  // namespace detail

/// Manufactured-solution ladders on [-W, W]: spatial with chi* = t cos(u/4) at a
/// fixed dt (exact in time), temporal with chi* = t^2 cos(u/4) on a fine mesh.
inline OrderStudy order_study(const FlowConfig& config, const OrderOptions& opt = {}) {
  if (config.variant != Variant::Smoke && config.variant != Variant::Conical)
    throw std::invalid_argument("order_study: needs a smoke or conical config");
  FlowConfig base = config;
  base.params.horizon_T = opt.horizon;
  base.mesh = build_mesh(-opt.half_width, opt.half_width, 8);
  const ManufacturedSolution lin{[](double t, double u) { return t * std::cos(u / 4); },
                                 [](double, double u) { return std::cos(u / 4); },
                                 [](double t, double u) { return -t * std::cos(u / 4) / 16; }};
  const ManufacturedSolution sq{[](double t, double u) { return t * t * std::cos(u / 4); },
                                [](double t, double u) { return 2 * t * std::cos(u / 4); },
                                [](double t, double u) { return -t * t * std::cos(u / 4) / 16; }};
  std::vector<std::pair<double, std::size_t>> sl, tl;
  for (std::size_t n : opt.spatial_nodes) sl.emplace_back(opt.spatial_dt, n);
  for (double dt : opt.temporal_dts) tl.emplace_back(dt, opt.temporal_nodes);
  OrderStudy out;
  out.spatial_table = mms_run(base, lin, sl);
  out.temporal_table = mms_run(base, sq, tl);
  out.spatial = detail::order_result(out.spatial_table, true, opt.spatial_target, opt.spatial_band);
  out.temporal = detail::order_result(out.temporal_table, false, opt.temporal_target, opt.temporal_band);
  return out;
}

}  // namespace conekrf
