// Walks one bump profile through the conical flow at a few cone angles and
// prints how close each run stays to the cusp flow on u in [-5, 5].

#include <cmath>
#include <vector>

#include <fmt/core.h>

#include "conekrf/conekrf.hpp"

using namespace conekrf;

int main() {
  FlowConfig base;
  const auto phi0 = bump_profile(base.mesh, base.geom, 0.25);

  FlowConfig cusp_cfg = base;
  cusp_cfg.variant = Variant::Cusp;
  cusp_cfg.params.gamma = 0.0;
  const Trajectory cusp = run_flow(cusp_cfg, phi0);
  const std::size_t kc = cusp.index_at(0.5);

  fmt::print("{:>10} {:>8} {:>14} {:>14}\n", "gamma", "steps", "max|phi-cusp|", "upper_bound C");
  for (int k = 1; k <= 8; ++k) {
    FlowConfig cfg = base;
    cfg.params.gamma = std::ldexp(1.0, -k);
    const Trajectory tr = run_flow(cfg, phi0);
    if (tr.aborted) {
      fmt::print("{:>10.6f} aborted: {}\n", cfg.params.gamma, tr.abort_reason);
      continue;
    }
    const auto a = tr.phi(tr.index_at(0.5)), b = cusp.phi(kc);
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(base.mesh[i]) <= 5.0) gap = std::max(gap, std::abs(a[i] - b[i]));
    fmt::print("{:>10.6f} {:>8} {:>14.6g} {:>14.6g}\n", cfg.params.gamma, tr.steps.size(), gap,
               check_upper_bound(tr).fitted_C);
  }

  const Subsolution sub = build_subsolution(cusp, 0.05, 2.0);
  const CheckReport rep = check_subsolution(cusp, sub);
  fmt::print("\ncusp sub-solution barrier: {} checks, {} violations\n", rep.checked, rep.violations);
}
