// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "conekrf/conekrf.hpp"

using namespace conekrf;

namespace {

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) ++failures;
  fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

void info(const std::string& name, const std::string& detail) { fmt::print("INFO {}: {}\n", name, detail); }

std::vector<double> gamma_ladder(int k_max) {
  std::vector<double> g;
  for (int k = 1; k <= k_max; ++k) g.push_back(std::ldexp(1.0, -k));
  return g;
}

void calibration() {
  const FlowConfig c;
  auto w = [&](const auto& u) { return c.geom.g(u); };
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < c.mesh.size(); ++i) worst = std::max(worst, std::abs(curvature_density(w, c.mesh[i]) - 2.0));
  verdict(worst <= 1e-6, "calibration", fmt::format("max |K - 2| = {:.3g} over interior nodes (tol 1e-6)", worst));
}

void model_identity() {
  const FlowConfig c;
  std::vector<double> sups;
  bool finite = true;
  for (double gamma : gamma_ladder(10)) {
    ConeParams p;
    p.gamma = gamma;
    double sup = 0.0;
    for (std::size_t i = 0; i < c.mesh.size(); ++i) sup = std::max(sup, std::abs(model_ratio_defect(c.geom, p, c.mesh[i])));
    finite = finite && std::isfinite(sup);
    sups.push_back(sup);
  }
  const double ratio = uniformity_ratio(sups);
  verdict(finite && ratio <= 3.0, "model identity",
          fmt::format("sup |defect| in [{:.4g}, {:.4g}] over gamma = 2^-1..2^-10, max/min = {:.3f} (tol 3)",
                      *std::min_element(sups.begin(), sups.end()), *std::max_element(sups.begin(), sups.end()), ratio));
}

void potential_sandwich() {
  const ModelGeometry geom;
  const double delta = geom.divisor().delta_cap;
  const int nr = 1000, ng = 1000;
  std::size_t violations = 0;
  for (int i = 0; i < nr; ++i) {
    const double r = delta * std::pow(1e-15, i / double(nr - 1));
    const double floor = psi_cusp(r);
    double prev = psi_gamma(1.0, r);
    for (int k = 0; k < ng; ++k) {
      const double v = psi_gamma(std::pow(1e-8, k / double(ng - 1)), r);
      if (v > prev + 1e-12 || v < floor - 1e-12) ++violations;
      prev = v;
    }
  }
  verdict(violations == 0, "potential sandwich",
          fmt::format("{} violations of psi_o <= psi_g' <= psi_g <= psi_1 on a {}x{} (gamma, r) grid (tol 1e-12)", violations,
                      ng, nr));
}

void scheme_correctness() {
  bool ok = true;
  std::string detail;
  for (Variant v : {Variant::Smoke, Variant::Conical}) {
    FlowConfig c;
    c.variant = v;
    const OrderStudy s = order_study(c);
    ok = ok && s.spatial.pass && s.temporal.pass;
    detail += fmt::format("{} space [{:.3f}, {:.3f}] time [{:.3f}, {:.3f}]; ", to_string(v), s.spatial.aux.at("order_min"),
                          s.spatial.aux.at("order_max"), s.temporal.aux.at("order_min"), s.temporal.aux.at("order_max"));
  }
  const FlowConfig c;
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  auto shifted = phi0;
  for (double& x : shifted) x += 5.0;
  const Trajectory a = run_flow(c, phi0), b = run_flow(c, shifted);
  double trans = a.aborted || b.aborted ? INFINITY : 0.0, mass = 0.0;
  if (!a.aborted && !b.aborted) {
    std::vector<double> f(phi0.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      const FlowState& s = a.states[k];
      for (std::size_t i = 0; i < f.size(); ++i) {
        trans = std::max(trans, std::abs(b.states[k].chi[i] - s.chi[i] - 5.0));
        f[i] = s.metric_density[i] - a.model.background(i, s.t) - s.t * a.model.psi_dd[i];
      }
      mass = std::max(mass, std::abs(integrate(c.mesh, f)));
    }
  }
  ok = ok && trans <= 1e-12 && mass <= 1e-9;
  verdict(ok, "scheme correctness",
          detail + fmt::format("translation {:.3g} (tol 1e-12); mass defect {:.3g} (tol 1e-9)", trans, mass));
}

void comparison() {
  FlowConfig c;
  c.mesh = build_mesh(-20.0, 12.0, 64);
  std::size_t violations = 0, aborted = 0;
  double worst = -INFINITY;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [lo, hi] = random_psh_pair(c.mesh, c.geom, seed, true);
    const Trajectory a = run_flow(c, lo), b = run_flow(c, hi);
    if (a.aborted || b.aborted) {
      ++aborted;
      continue;
    }
    for (std::size_t k = 0; k < a.states.size(); ++k)
      for (std::size_t i = 0; i < lo.size(); ++i) {
        const double d = a.states[k].chi[i] - b.states[k].chi[i];
        worst = std::max(worst, d);
        if (d > 1e-8) ++violations;
      }
  }
  verdict(violations == 0 && aborted == 0, "comparison",
          fmt::format("100 ordered pairs on 64 nodes: {} violations, {} aborted, max(u - v) = {:.3g} (tol 1e-8)", violations,
                      aborted, worst));
}

void uniformity() {
  const FlowConfig base;
  const auto phi0 = bump_profile(base.mesh, base.geom, 0.25);
  const auto ladder = gamma_ladder(8);
  std::map<std::string, std::vector<double>> constants;
  bool ok = true;
  for (double gamma : ladder) {
    FlowConfig c = base;
    c.params.gamma = gamma;
    const Trajectory tr = run_flow(c, phi0);
    if (tr.aborted) {
      ok = false;
      continue;
    }
    for (const auto& r : run_all_validators(tr)) {
      ok = ok && std::isfinite(r.fitted_C);
      constants[r.name].push_back(r.fitted_C);
    }
  }
  std::string detail;
  for (const auto& [name, cs] : constants) {
    const double ratio = uniformity_ratio(cs);
    ok = ok && cs.size() == ladder.size() && ratio <= 3.0;
    detail += fmt::format("{} {:.3f}; ", name, ratio);
  }
  ok = ok && constants.size() == 7;
  verdict(ok, "estimate uniformity", detail + "max/min over gamma = 2^-1..2^-8 (tol 3)");
}

void ordering_chain() {
  const FlowConfig c;
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const std::vector<int> js{4, 8, 16};
  const SweepResult r = epsilon_sweep(c, c.params.gamma, eps, js, phi0, 4);
  verdict(r.pass, "ordering chain",
          fmt::format("{:.0f} nodal checks, {:.0f} violations, max defect {:.3g} (tol 1e-8)", r.aux.at("checked"),
                      r.aux.at("violations"), r.aux.at("max_defect")));
}

void gamma_limit() {
  const FlowConfig c;
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const std::vector<double> times{0.1, 0.5, 0.9 * c.params.horizon_T};
  const SweepResult r = gamma_sweep(c, gamma_ladder(8), {-5.0, 5.0}, times, phi0, 4);
  const double e1 = r.aux.at("e_first"), e8 = r.aux.at("e_last");
  verdict(r.pass && e8 <= e1 / 10.0, "gamma limit",
          fmt::format("e_1 = {:.4g}, e_8 = {:.4g}, e_8/e_1 = {:.4g} (tol 0.1), strictly decreasing: {}", e1, e8, e8 / e1,
                      r.verdict));
}

void subsolution() {
  const FlowConfig c;
  const Trajectory tr = run_flow(c, bump_profile(c.mesh, c.geom, 0.25));
  const Subsolution sub = build_subsolution(tr, 0.05, 2.0);
  const CheckReport sc = check_subsolution(tr, sub);
  const Mesh& mesh = c.mesh;
  const double L = mesh.u_max() - mesh.u_min();
  const Mesh doubled = build_mesh(mesh.u_max() - 2.0 * L, mesh.u_max(), 2 * mesh.size() - 1);
  const CuspReference a = cusp_reference(c.geom, mesh), b = cusp_reference(c.geom, doubled);
  const double drift = std::abs(b.fitted_C / a.fitted_C - 1.0);
  verdict(sc.pass && sc.violations == 0 && std::isfinite(a.fitted_C) && drift <= 0.2, "sub-solution",
          fmt::format("{} checks, {} violations (tol 1e-8); cusp reference C = {:.4g}, doubled {:.4g}, change {:.1f}% (tol 20%)",
                      sc.checked, sc.violations, a.fitted_C, b.fitted_C, 100.0 * drift));
}

void contraction() {
  FlowConfig c;
  c.mesh = build_mesh(-20.0, 12.0, 64);
  std::size_t violations = 0, unordered = 0;
  double worst = -INFINITY;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const bool ordered = k % 2 == 0;
    unordered += !ordered;
    const auto [a0, b0] = random_psh_pair(c.mesh, c.geom, k, ordered);
    const ContractionReport r = contraction_test(run_flow(c, a0), run_flow(c, b0));
    violations += r.check.violations;
    worst = std::max(worst, r.check.max_defect);
  }
  verdict(violations == 0, "contraction",
          fmt::format("20 pairs ({} unordered): {} violations, max defect {:.3g} (tol 1e-8)", unordered, violations, worst));
}

void time_zero() {
  const FlowConfig c;
  const auto ring = ring_profile(c.mesh, c.geom, 1e-9);
  const SweepResult r = time_zero_study(run_flow(c, ring), ring);
  verdict(r.pass, "t->0 attainment",
          fmt::format("conical ring data: {:.0f} ladder points down to t = {:.0e}, A = {:.4g}, max profile deviation {:.1f}% "
                      "(tol 20%)",
                      r.aux.at("ladder_points"), r.aux.at("t_last"), r.aux.at("A"), 100.0 * r.aux.at("max_deviation")));
  const auto bump = bump_profile(c.mesh, c.geom, 0.25);
  FlowConfig cusp = c;
  cusp.variant = Variant::Cusp;
  cusp.params.gamma = 0.0;
  const std::pair<const char*, SweepResult> extra[] = {
      {"conical bump data", time_zero_study(run_flow(c, bump), bump)},
      {"cusp ring data", time_zero_study(run_flow(cusp, ring), ring)},
      {"cusp bump data", time_zero_study(run_flow(cusp, bump), bump)},
  };
  for (const auto& [label, s] : extra)
    info("t->0", fmt::format("{}: A = {:.4g}, max profile deviation {:.1f}%, decreasing {}", label, s.aux.at("A"),
                             100.0 * s.aux.at("max_deviation"), s.aux.at("decreasing") == 1.0 ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  void (*criteria[])() = {calibration, model_identity, potential_sandwich, scheme_correctness, comparison, uniformity,
                          ordering_chain, gamma_limit, subsolution, contraction, time_zero};
  for (auto* run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      ++failures;
      fmt::print("FAIL exception: {}\n", e.what());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fmt::print("{} of 11 criteria failed ({:.1f} s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
