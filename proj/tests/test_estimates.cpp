#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "conekrf/estimates.hpp"
#include "conekrf/initial_data.hpp"

using namespace conekrf;

namespace {

using Field = std::function<double(double t, std::size_t i)>;

// Trajectory with prescribed phi, phidot and metric density on the model of `cfg`.
Trajectory synthetic(const FlowConfig& cfg, std::vector<double> phi0, const std::vector<double>& times, const Field& phi,
                     const Field& phidot, const Field& density) {
  Trajectory tr;
  tr.mesh = cfg.mesh;
  tr.model = make_nodal_model(cfg);
  tr.phi0 = std::move(phi0);
  const std::size_t n = cfg.mesh.size();
  for (double t : times) {
    FlowState s;
    s.t = t;
    s.chi.resize(n);
    s.phidot.resize(n);
    s.metric_density.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.chi[i] = phi(t, i) - t * tr.model.psi[i];
      s.phidot[i] = phidot(t, i);
      s.metric_density[i] = density(t, i);
    }
    tr.states.push_back(std::move(s));
  }
  return tr;
}

FlowConfig small(Variant v = Variant::Conical) {
  FlowConfig c;
  c.variant = v;
  if (v == Variant::Cusp) c.params.gamma = 0.0;
  c.mesh = build_mesh(-20.0, 12.0, 33);
  return c;
}

const std::vector<double> kTimes{0.0, 0.01, 0.05, 0.1, 0.5, 0.9};
const std::vector<double> kLateTimes{0.0, 0.1, 0.3, 0.5, 0.9};

struct Fixture {
  FlowConfig cfg = small();
  NodalModel m = make_nodal_model(cfg);
  std::vector<double> phi0 = bump_profile(cfg.mesh, cfg.geom, 0.25);
  double sup0 = *std::max_element(phi0.begin(), phi0.end());
  Field psi_t = [this](double t, std::size_t i) { return t * m.psi[i]; };
  Field psi = [this](double, std::size_t i) { return m.psi[i]; };
  Field ref = [this](double, std::size_t i) { return m.ref_density[i]; };
};

}  // namespace

TEST(UpperBound, SelfInversion) {
  Fixture f;
  auto tr = synthetic(f.cfg, f.phi0, kTimes, [&](double t, std::size_t i) { return f.sup0 + t * f.m.psi[i] + 3.0 * t; },
                      f.psi, f.ref);
  EXPECT_NEAR(check_upper_bound(tr).fitted_C, 3.0, 1e-12);
  const std::vector<double> flat(f.cfg.mesh.size(), 2.0);
  tr = synthetic(f.cfg, flat, kTimes, [&](double t, std::size_t i) { return 2.0 + t * f.m.psi[i]; }, f.psi, f.ref);
  EXPECT_LE(check_upper_bound(tr).fitted_C, 1e-12);
}

TEST(LowerBoundShort, SelfInversion) {
  Fixture f;
  auto tr = synthetic(
      f.cfg, f.phi0, kTimes,
      [&](double t, std::size_t i) { return f.phi0[i] + t * f.m.psi[i] + (t > 0 ? t * std::log(t) - t : 0.0); }, f.psi,
      f.ref);
  auto r = check_lower_bound_short(tr);
  EXPECT_NEAR(r.aux.at("C_log"), 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.fitted_C));
  tr = synthetic(f.cfg, f.phi0, kTimes, [&](double t, std::size_t i) { return f.phi0[i] + t * f.m.psi[i]; }, f.psi, f.ref);
  r = check_lower_bound_short(tr);
  EXPECT_LE(r.aux.at("C_log"), 1.0);
  EXPECT_NEAR(r.fitted_C, 0.0, 1e-12);
}

TEST(PhidotUpper, SmokeRunFirstForm) {
  FlowConfig c = small(Variant::Smoke);
  const Trajectory tr = run_flow(c, std::vector<double>(c.mesh.size(), 0.0));
  const auto r = check_phidot_upper(tr);
  EXPECT_DOUBLE_EQ(r.aux.at("first_form_defect"), -1.0);
}

TEST(PhidotUpper, SecondFormSelfInversion) {
  Fixture f;
  const auto tr = synthetic(f.cfg, f.phi0, kTimes, f.psi_t, f.psi, f.ref);
  EXPECT_DOUBLE_EQ(check_phidot_upper(tr).fitted_C, 0.0);
}

TEST(PhidotLower, SelfInversion) {
  Fixture f;
  EstimateOptions opt;
  const auto [lo, hi] = std::minmax_element(f.phi0.begin(), f.phi0.end());
  const double osc = *hi - *lo;
  auto tr = synthetic(
      f.cfg, f.phi0, kTimes, f.psi_t,
      [&](double t, std::size_t i) { return f.m.psi[i] + (t > 0 ? std::log(t) / opt.sigma : 0.0); }, f.ref);
  EXPECT_NEAR(check_phidot_lower(tr, opt).fitted_C, -2.0 * osc, 1e-12);
  tr = synthetic(f.cfg, f.phi0, kTimes, f.psi_t, f.psi, f.ref);
  EXPECT_DOUBLE_EQ(check_phidot_lower(tr, opt).aux.at("C_T"), 0.0);
  opt.sigma = 0.0;
  EXPECT_THROW(check_phidot_lower(tr, opt), std::invalid_argument);
}

TEST(TraceSandwich, SelfInversion) {
  Fixture f;
  auto tr = synthetic(f.cfg, f.phi0, kLateTimes, f.psi_t, f.psi, f.ref);
  EXPECT_DOUBLE_EQ(check_trace_sandwich(tr).fitted_C, 0.0);
  tr = synthetic(f.cfg, f.phi0, kLateTimes, f.psi_t, f.psi,
                 [&](double t, std::size_t i) { return f.m.ref_density[i] * (t > 0 ? std::exp(1.0 / (t * t)) : 1.0); });
  EXPECT_NEAR(check_trace_sandwich(tr).fitted_C, 1.0, 1e-12);
}

TEST(GlobalLower, SelfInversion) {
  Fixture f;
  auto tr = synthetic(f.cfg, f.phi0, kTimes, f.psi_t, f.psi, f.ref);
  EXPECT_NEAR(check_global_lower(tr).fitted_C, 0.0, 1e-12);
  tr = synthetic(f.cfg, f.phi0, kTimes, [&](double t, std::size_t i) { return t * f.m.psi[i] - 7.0; }, f.psi, f.ref);
  EXPECT_NEAR(check_global_lower(tr).fitted_C, 7.0, 1e-12);
}

TEST(CuspBullets, SelfInversion) {
  Fixture f;
  f.cfg = small(Variant::Cusp);
  f.m = make_nodal_model(f.cfg);
  auto tr = synthetic(f.cfg, f.phi0, kTimes, f.psi_t, f.psi, f.ref);
  auto r = check_cusp_bullets(tr);
  EXPECT_DOUBLE_EQ(r.aux.at("a"), 0.0);
  EXPECT_DOUBLE_EQ(r.aux.at("C_a"), 0.0);
  EXPECT_DOUBLE_EQ(r.fitted_C, 0.0);
  tr = synthetic(f.cfg, f.phi0, kTimes, f.psi_t,
                 [&](double t, std::size_t i) { return f.m.psi[i] + (t > 0 ? 1.0 / t : 0.0); }, f.ref);
  r = check_cusp_bullets(tr);
  EXPECT_NEAR(r.aux.at("C_up"), 1.0, 1e-12);
}

TEST(Validators, EmptyTrajectoryThrows) {
  Fixture f;
  const auto tr = synthetic(f.cfg, f.phi0, {0.0}, f.psi_t, f.psi, f.ref);
  EXPECT_THROW(check_upper_bound(tr), std::invalid_argument);
  EXPECT_THROW(check_cusp_bullets(tr), std::invalid_argument);
}

TEST(Validators, Reproducible) {
  FlowConfig c;
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const Trajectory tr = run_flow(c, phi0);
  const auto a = run_all_validators(tr), b = run_all_validators(tr);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].name, b[k].name);
    EXPECT_EQ(a[k].fitted_C, b[k].fitted_C);
    EXPECT_EQ(a[k].aux, b[k].aux);
  }
}

TEST(Validators, UpperBoundStableUnderRefinement) {
  FlowConfig c;
  const double a = check_upper_bound(run_flow(c, bump_profile(c.mesh, c.geom, 0.25))).fitted_C;
  c.mesh = build_mesh(c.mesh.u_min(), c.mesh.u_max(), 2 * c.mesh.size() - 1);
  const double b = check_upper_bound(run_flow(c, bump_profile(c.mesh, c.geom, 0.25))).fitted_C;
  ASSERT_TRUE(std::isfinite(a) && std::isfinite(b));
  EXPECT_LE(std::max(std::abs(a), std::abs(b)) / std::min(std::abs(a), std::abs(b)), 2.0);
}

TEST(Validators, NearTmaxAndCuspRunsAreFinite) {
  FlowConfig c;
  DivisorConfig d;
  d.twist_c = 0.0;
  c.geom = ModelGeometry(d);
  c.params.horizon_T = 0.9 * tmax(c.geom, c.params.gamma);
  auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  Trajectory tr = run_flow(c, phi0);
  ASSERT_FALSE(tr.aborted) << tr.abort_reason;
  EXPECT_TRUE(check_global_lower(tr).pass);

  FlowConfig cusp;
  cusp.variant = Variant::Cusp;
  cusp.params.gamma = 0.0;
  tr = run_flow(cusp, phi0);
  ASSERT_FALSE(tr.aborted);
  const auto r = check_cusp_bullets(tr);
  EXPECT_TRUE(r.pass);
}

TEST(Validators, UniformAcrossGammaLadder) {
  FlowConfig base;
  const auto phi0 = bump_profile(base.mesh, base.geom, 0.25);
  std::map<std::string, std::vector<double>> constants;
  for (int k = 1; k <= 8; ++k) {
    FlowConfig c = base;
    c.params.gamma = std::ldexp(1.0, -k);
    const Trajectory tr = run_flow(c, phi0);
    ASSERT_FALSE(tr.aborted);
    for (const auto& r : run_all_validators(tr)) {
      EXPECT_TRUE(r.pass) << r.name;
      constants[r.name].push_back(r.fitted_C);
    }
  }
  ASSERT_EQ(constants.size(), 7u);
  for (const auto& [name, cs] : constants) EXPECT_LE(uniformity_ratio(cs), 3.0) << name;
}

TEST(UniformityRatio, EdgeCases) {
  EXPECT_TRUE(std::isnan(uniformity_ratio({})));
  const std::vector<double> zeros{0.0, 0.0}, mixed{0.0, 1.0}, plain{-2.0, 1.0, 1.5}, bad{1.0, NAN};
  EXPECT_DOUBLE_EQ(uniformity_ratio(zeros), 1.0);
  EXPECT_TRUE(std::isinf(uniformity_ratio(mixed)));
  EXPECT_DOUBLE_EQ(uniformity_ratio(plain), 2.0);
  EXPECT_TRUE(std::isnan(uniformity_ratio(bad)));
}
