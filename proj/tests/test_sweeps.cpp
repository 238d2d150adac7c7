#include <gtest/gtest.h>

#include <cmath>

#include "conekrf/initial_data.hpp"
#include "conekrf/sweeps.hpp"

using namespace conekrf;

namespace {

FlowConfig coarse() {
  FlowConfig c;
  c.mesh = build_mesh(-20.0, 12.0, 129);
  return c;
}

const std::vector<double> kTimes{0.1, 0.5, 0.9};

}  // namespace

TEST(ParallelMap, KeepsOrderAndRethrows) {
  const auto sq = parallel_map(17, 4, [](std::size_t k) { return k * k; });
  for (std::size_t k = 0; k < sq.size(); ++k) EXPECT_EQ(sq[k], k * k);
  EXPECT_THROW(parallel_map(8, 3,
                            [](std::size_t k) -> int {
                              if (k == 5) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
}

TEST(GammaSweep, SingleGamma) {
  const FlowConfig c = coarse();
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const std::vector<double> gs{0.5};
  const SweepResult r = gamma_sweep(c, gs, {-5.0, 5.0}, kTimes, phi0);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_GT(r.points[0].value, 0.0);
  EXPECT_TRUE(!r.series.count("d") || r.series.at("d").empty());
  EXPECT_TRUE(r.pass);
}

TEST(GammaSweep, DecreasingTowardCusp) {
  const FlowConfig c = coarse();
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  std::vector<double> gs;
  for (int k = 1; k <= 8; ++k) gs.push_back(std::ldexp(1.0, -k));
  const SweepResult r = gamma_sweep(c, gs, {-5.0, 5.0}, kTimes, phi0, 4);
  EXPECT_TRUE(r.pass) << r.verdict;
  EXPECT_LE(r.aux.at("e_last"), r.aux.at("e_first") / 10.0);
  // at fixed window the gap tracks psi_gamma - psi_cusp, which is linear in gamma
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_NEAR(r.fit->rate, 1.0, 0.1);
}

TEST(GammaSweep, WindowTouchingBoundaryIsFlagged) {
  const FlowConfig c = coarse();
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const std::vector<double> gs{0.5, 0.25};
  const SweepResult r = gamma_sweep(c, gs, {-20.0, 5.0}, kTimes, phi0);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.verdict, "window touches boundary");
  EXPECT_EQ(r.aux.at("window_touches_boundary"), 1.0);
}

TEST(GammaSweep, InputValidation) {
  const FlowConfig c = coarse();
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const std::vector<double> up{0.25, 0.5}, none{}, bad{1.5};
  const std::vector<double> off{0.12345};
  EXPECT_THROW(gamma_sweep(c, up, {-5.0, 5.0}, kTimes, phi0), std::invalid_argument);
  EXPECT_THROW(gamma_sweep(c, none, {-5.0, 5.0}, kTimes, phi0), std::invalid_argument);
  EXPECT_THROW(gamma_sweep(c, bad, {-5.0, 5.0}, kTimes, phi0), std::invalid_argument);
  const std::vector<double> gs{0.5};
  EXPECT_THROW(gamma_sweep(c, gs, {-5.0, 5.0}, off, phi0), std::invalid_argument);
}

TEST(EpsilonSweep, ChainHoldsAndGapShrinks) {
  const FlowConfig c = coarse();
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const std::vector<int> js{4, 8};
  const SweepResult r = epsilon_sweep(c, 0.5, eps, js, phi0, 4);
  EXPECT_TRUE(r.pass) << r.verdict << " " << r.aux.at("max_defect");
  EXPECT_EQ(r.aux.at("violations"), 0.0);
  ASSERT_EQ(r.points.size(), 3u);
  // sorted by epsilon ascending: halving epsilon lowers the gap to the cusp flow
  EXPECT_LT(r.points[0].value, r.points[1].value);
  EXPECT_LT(r.points[1].value, r.points[2].value);
}

TEST(EpsilonSweep, InputValidation) {
  const FlowConfig c = coarse();
  const auto phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const std::vector<double> eps{0.1}, up{0.05, 0.1};
  const std::vector<int> js{4}, down{8, 4}, zero{0};
  EXPECT_THROW(epsilon_sweep(c, 0.5, up, js, phi0), std::invalid_argument);
  EXPECT_THROW(epsilon_sweep(c, 0.5, eps, down, phi0), std::invalid_argument);
  EXPECT_THROW(epsilon_sweep(c, 0.5, eps, zero, phi0), std::invalid_argument);
  EXPECT_THROW(epsilon_sweep(c, 0.0, eps, js, phi0), std::invalid_argument);
}

TEST(TimeZero, SmokeZeroRunHasZeroDistance) {
  FlowConfig c = coarse();
  c.variant = Variant::Smoke;
  const std::vector<double> zero(c.mesh.size(), 0.0);
  const Trajectory tr = run_flow(c, zero);
  const SweepResult r = time_zero_study(tr, zero);
  ASSERT_FALSE(r.points.empty());
  for (const auto& p : r.points) EXPECT_EQ(p.value, 0.0);
}

TEST(TimeZero, RecoversPlantedProfile) {
  const FlowConfig c = coarse();
  Trajectory tr;
  tr.mesh = c.mesh;
  tr.model = make_nodal_model(c);
  tr.phi0 = bump_profile(c.mesh, c.geom, 0.25);
  const double mass = integrate(c.mesh, tr.model.g);
  const double A = 0.7;
  std::vector<double> times{0.0};
  for (double d = 1e-6; d <= 0.011; d *= 10.0) {
    times.push_back(d);
    times.push_back(3.0 * d);
  }
  for (double t : times) {
    FlowState s;
    s.t = t;
    const double shift = t > 0.0 ? A * t * (1.0 + std::abs(std::log(t))) / mass : 0.0;
    for (std::size_t i = 0; i < c.mesh.size(); ++i) s.chi.push_back(tr.phi0[i] + shift - t * tr.model.psi[i]);
    s.phidot.assign(c.mesh.size(), 0.0);
    s.metric_density = tr.model.g;
    tr.states.push_back(std::move(s));
  }
  const SweepResult r = time_zero_study(tr, tr.phi0);
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_NEAR(r.aux.at("A") / A, 1.0, 0.05);
  EXPECT_LE(r.aux.at("max_deviation"), 1e-9);
  EXPECT_TRUE(r.pass) << r.verdict;
}

TEST(TimeZero, RingDataOnConicalFlow) {
  FlowConfig c;
  const auto ring = ring_profile(c.mesh, c.geom, 1e-9);
  const SweepResult r = time_zero_study(run_flow(c, ring), ring);
  EXPECT_TRUE(r.pass) << r.verdict << " deviation " << r.aux.at("max_deviation");
}

TEST(TimeZero, LengthMismatch) {
  FlowConfig c = coarse();
  const Trajectory tr = run_flow(c, bump_profile(c.mesh, c.geom, 0.25));
  EXPECT_THROW(time_zero_study(tr, std::vector<double>(5, 0.0)), std::invalid_argument);
}

TEST(Truncation, IdenticalDomainsHaveZeroGap) {
  const FlowConfig c = coarse();
  const std::vector<double> u{-20.0, -20.0};
  const SweepResult r = truncation_study(c, u, {-5.0, 5.0}, [&](double x) { return c.geom.g(x); });
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].value, 0.0);
}

TEST(Truncation, GapShrinksWithDomain) {
  const FlowConfig c = coarse();
  const std::vector<double> u{-20.0, -30.0, -40.0};
  const SweepResult r = truncation_study(c, u, {-5.0, 5.0}, [&](double x) { return c.geom.g(x); }, 3);
  EXPECT_TRUE(r.pass) << r.verdict << " final gap " << r.aux.at("final_gap");
}

TEST(Truncation, WindowWiderThanDomain) {
  const FlowConfig c = coarse();
  const std::vector<double> u{-20.0, -30.0};
  auto f = [](double) { return 0.0; };
  EXPECT_THROW(truncation_study(c, u, {-25.0, 5.0}, f), std::invalid_argument);
  EXPECT_THROW(truncation_study(c, u, {-5.0, 12.0}, f), std::invalid_argument);
  const std::vector<double> one{-20.0}, up{-30.0, -20.0};
  EXPECT_THROW(truncation_study(c, one, {-5.0, 5.0}, f), std::invalid_argument);
  EXPECT_THROW(truncation_study(c, up, {-5.0, 5.0}, f), std::invalid_argument);
}

TEST(OrderStudy, SmokeAndConical) {
  for (Variant v : {Variant::Smoke, Variant::Conical}) {
    FlowConfig c;
    c.variant = v;
    const OrderStudy s = order_study(c);
    EXPECT_TRUE(s.spatial.pass) << to_string(v) << " " << s.spatial.aux.at("order_min") << " "
                                << s.spatial.aux.at("order_max");
    EXPECT_TRUE(s.temporal.pass) << to_string(v) << " " << s.temporal.aux.at("order_min") << " "
                                 << s.temporal.aux.at("order_max");
  }
  FlowConfig cusp;
  cusp.variant = Variant::Cusp;
  cusp.params.gamma = 0.0;
  EXPECT_THROW(order_study(cusp), std::invalid_argument);
}
