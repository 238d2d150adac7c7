#pragma once

// Fitted-constant validators. Each one turns an a-priori inequality into an
// exact max-scan of its defect over the trajectory grid (t > 0, all nodes),
// so rerunning on the same trajectory reproduces the constant bit for bit.
//
// The reference potential is the trajectory's own psi_ref (psi_gamma for
// conical runs, psi_o for cusp runs) and osc / sup / inf of phi0 are taken
// over the truncated grid.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conekrf/flow.hpp"

namespace conekrf {

struct EstimateReport {
  std::string name;
  double fitted_C = 0.0;
  double gamma = 0.0;
  std::map<std::string, double> aux;
  bool pass = false;  ///< every fitted constant finite
  std::string notes;
};

struct EstimateOptions {
  double sigma = 0.05;  ///< weight of (phidot - psi) in the log-form lower bound
  double delta = 0.1;   ///< start of the window for the late-time phidot upper bound
  int dim = 1;          ///< complex dimension n
};

namespace detail {

inline void require_states(const Trajectory& traj, const char* who) {
  if (traj.states.size() < 2) throw std::invalid_argument(std::string(who) + ": trajectory has no t > 0 states");
}

inline double running_max() { return -std::numeric_limits<double>::infinity(); }

inline bool all_finite(const EstimateReport& r) {
  if (!std::isfinite(r.fitted_C)) return false;
  return std::all_of(r.aux.begin(), r.aux.end(), [](const auto& kv) { return std::isfinite(kv.second); });
}

inline EstimateReport finish(EstimateReport r) {
  r.pass = all_finite(r);
  return r;
}

struct Phi0Stats {
  double sup, inf, osc;
};

inline Phi0Stats phi0_stats(const Trajectory& traj) {
  const auto [lo, hi] = std::minmax_element(traj.phi0.begin(), traj.phi0.end());
  return {*hi, *lo, *hi - *lo};
}

}  // namespace detail

/// phi <= sup phi0 + t psi + C t:  C = max (phi - sup phi0 - t psi) / t.
inline EstimateReport check_upper_bound(const Trajectory& traj) {
  detail::require_states(traj, "check_upper_bound");
  const auto s0 = detail::phi0_stats(traj);
  double c = detail::running_max();
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double t = traj.states[k].t;
    const auto phi = traj.phi(k);
    for (std::size_t i = 0; i < phi.size(); ++i) c = std::max(c, (phi[i] - s0.sup - t * traj.model.psi[i]) / t);
  }
  return detail::finish({"upper_bound", c, traj.model.gamma, {}, false, ""});
}

/// phi >= inf phi0 + t psi - C_flat  and  phi >= phi0 + t psi + n (t log t - t) - C_log t,
/// scanned on t in (0, min(1, T)].
inline EstimateReport check_lower_bound_short(const Trajectory& traj, const EstimateOptions& opt = {}) {
  detail::require_states(traj, "check_lower_bound_short");
  const auto s0 = detail::phi0_stats(traj);
  const double t_end = std::min(1.0, traj.model.horizon);
  double flat = detail::running_max(), logc = detail::running_max();
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double t = traj.states[k].t;
    if (t > t_end) break;
    const double profile = opt.dim * (t * std::log(t) - t);
    const auto phi = traj.phi(k);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double tp = t * traj.model.psi[i];
      flat = std::max(flat, s0.inf + tp - phi[i]);
      logc = std::max(logc, (traj.phi0[i] + tp + profile - phi[i]) / t);
    }
  }
  return detail::finish({"lower_bound_short", flat, traj.model.gamma, {{"C_log", logc}}, false, ""});
}

/// phidot <= (phi - phi0)/t + n  (defect reported in aux) and, on [delta, T],
/// phidot <= psi + C (fitted_C).
inline EstimateReport check_phidot_upper(const Trajectory& traj, const EstimateOptions& opt = {}) {
  detail::require_states(traj, "check_phidot_upper");
  double first = detail::running_max(), second = detail::running_max();
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const FlowState& st = traj.states[k];
    const auto phi = traj.phi(k);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      first = std::max(first, st.phidot[i] - (phi[i] - traj.phi0[i]) / st.t - opt.dim);
      if (st.t >= opt.delta) second = std::max(second, st.phidot[i] - traj.model.psi[i]);
    }
  }
  EstimateReport r{"phidot_upper", second, traj.model.gamma, {{"first_form_defect", first}, {"delta", opt.delta}},
                   false, ""};
  if (!std::isfinite(second)) r.notes = "no states in [delta, T]";
  return detail::finish(r);
}

/// sigma (phidot - psi) >= -2 osc phi0 + n log t - C  (fitted_C) and
/// (T - t)(phidot - psi) >= -C_T.
inline EstimateReport check_phidot_lower(const Trajectory& traj, const EstimateOptions& opt = {}) {
  detail::require_states(traj, "check_phidot_lower");
  if (!(opt.sigma > 0.0)) throw std::invalid_argument("check_phidot_lower: sigma must be positive");
  const auto s0 = detail::phi0_stats(traj);
  const double T = traj.model.horizon;
  double logc = detail::running_max(), tc = detail::running_max();
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const FlowState& st = traj.states[k];
    for (std::size_t i = 0; i < st.phidot.size(); ++i) {
      const double d = st.phidot[i] - traj.model.psi[i];
      logc = std::max(logc, -2.0 * s0.osc + opt.dim * std::log(st.t) - opt.sigma * d);
      tc = std::max(tc, -(T - st.t) * d);
    }
  }
  return detail::finish(
      {"phidot_lower", logc, traj.model.gamma, {{"C_T", tc}, {"sigma", opt.sigma}, {"osc_phi0", s0.osc}}, false, ""});
}

/// |log(omega(t) / omega_ref)| <= C / t^2 (in dimension one the trace is the density ratio).
inline EstimateReport check_trace_sandwich(const Trajectory& traj) {
  detail::require_states(traj, "check_trace_sandwich");
  double c = detail::running_max();
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const FlowState& st = traj.states[k];
    for (std::size_t i = 0; i < st.metric_density.size(); ++i)
      c = std::max(c, st.t * st.t * std::abs(std::log(st.metric_density[i] / traj.model.ref_density[i])));
  }
  return detail::finish({"trace_sandwich", c, traj.model.gamma, {}, false, ""});
}

/// phi >= t psi - C.
inline EstimateReport check_global_lower(const Trajectory& traj) {
  detail::require_states(traj, "check_global_lower");
  double c = detail::running_max();
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double t = traj.states[k].t;
    const auto phi = traj.phi(k);
    for (std::size_t i = 0; i < phi.size(); ++i) c = std::max(c, t * traj.model.psi[i] - phi[i]);
  }
  return detail::finish({"global_lower", c, traj.model.gamma, {}, false, ""});
}

/// The cusp-limit bullets against the trajectory's reference psi / omega_ref:
///   e^{-C/t^2} omega_ref <= omega(t) (fitted_C)
///   phidot - psi <= C / t            (aux C_up)
///   |phi - t psi| <= C               (aux C_potential)
///   phidot - psi >= a log t - C      (aux a, C_a)
/// For the last one C_a is first fitted on t >= delta with a = 0, then a is the
/// smallest nonnegative slope covering t < delta, and C_a is refitted with it.
inline EstimateReport check_cusp_bullets(const Trajectory& traj, const EstimateOptions& opt = {}) {
  detail::require_states(traj, "check_cusp_bullets");
  double up = detail::running_max(), metric = detail::running_max(), pot = detail::running_max();
  std::vector<double> times, lows;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const FlowState& st = traj.states[k];
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < st.phidot.size(); ++i) {
      const double d = st.phidot[i] - traj.model.psi[i];
      up = std::max(up, st.t * d);
      metric = std::max(metric, st.t * st.t * std::log(traj.model.ref_density[i] / st.metric_density[i]));
      pot = std::max(pot, std::abs(st.chi[i]));
      low = std::min(low, d);
    }
    times.push_back(st.t);
    lows.push_back(low);
  }
  double c_late = detail::running_max();
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= opt.delta) c_late = std::max(c_late, -lows[k]);
  if (!std::isfinite(c_late)) c_late = 0.0;
  double a = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] < opt.delta && times[k] < 1.0) a = std::max(a, -(lows[k] + c_late) / std::abs(std::log(times[k])));
  double c_a = detail::running_max();
  for (std::size_t k = 0; k < times.size(); ++k) c_a = std::max(c_a, a * std::log(times[k]) - lows[k]);
  return detail::finish({"cusp_bullets",
                         metric,
                         traj.model.gamma,
                         {{"C_up", up}, {"C_potential", pot}, {"a", a}, {"C_a", c_a}},
                         false,
                         ""});
}

/// All seven validators on one trajectory, in a fixed order.
inline std::vector<EstimateReport> run_all_validators(const Trajectory& traj, const EstimateOptions& opt = {}) {
  return {check_upper_bound(traj),   check_lower_bound_short(traj, opt), check_phidot_upper(traj, opt),
          check_phidot_lower(traj, opt), check_trace_sandwich(traj),     check_global_lower(traj),
          check_cusp_bullets(traj, opt)};
}

/// max |C| / min |C| over a sweep; 1 when every constant is zero, +inf when
/// only some are, NaN if any is not finite.
inline double uniformity_ratio(std::span<const double> constants) {
  if (constants.empty()) return std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double c : constants) {
    if (!std::isfinite(c)) return std::numeric_limits<double>::quiet_NaN();
    lo = std::min(lo, std::abs(c));
    hi = std::max(hi, std::abs(c));
  }
  if (hi == 0.0) return 1.0;
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace conekrf
