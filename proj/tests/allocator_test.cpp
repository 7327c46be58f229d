#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hapcsr/allocator.hpp"
#include "hapcsr/report_io.hpp"

namespace hapcsr {
namespace {

ProblemSpec reference(double p_max, double g_min) {
  ProblemSpec s;
  s.p_max = p_max;
  s.g_min = g_min;
  return s;
}

ProblemSpec single_device(double p_max, double g_min) {
  ProblemSpec s = reference(p_max, g_min);
  s.cfg.device_pos = {{0.8, 0.0}};
  return s;
}

bool has(const std::vector<Violation>& v, Constraint c) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.constraint == c; });
}

// Backscatter for the whole block as long as the harvest covers the circuit;
// otherwise the energy row caps τ^B.
double single_device_sr_value(const ProblemSpec& s, const ChannelSet& ch, double alpha) {
  const auto& c = s.cfg;
  const double h = c.eh_efficiency * s.p_max * ch.g_sd[0];
  const double tau = std::min(1.0, h / (c.circuit_power_bc_w + alpha * h));
  return tau * backscatter_rate(s.p_max, 0, alpha, c.spreading_factor, ch, c.bandwidth_hz);
}

TEST(TimeShares, SingleDeviceBackscatterFillsTheBlock) {
  const auto s = single_device(1.0, 0.0);
  const auto ch = build_channels(s.cfg);
  const auto r = solve_time_shares(s, ch, {0.5}, {0.0});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.alloc.tau_bc[0], 1.0, 1e-12);
  EXPECT_EQ(r.alloc.tau_ac[0], 0.0);
  EXPECT_NEAR(r.objective, single_device_sr_value(s, ch, 0.5), 1e-9 * r.objective);
}

TEST(TimeShares, EnergyRowCapsBackscatterTime) {
  const auto s = single_device(1.0, 0.0);
  const auto ch = build_channels(s.cfg);
  const auto r = solve_time_shares(s, ch, {1.0}, {0.0});
  ASSERT_TRUE(r.feasible);
  EXPECT_LT(r.alloc.tau_bc[0], 1.0);
  EXPECT_NEAR(r.objective, single_device_sr_value(s, ch, 1.0), 1e-9 * r.objective);
  EXPECT_TRUE(check_feasible(s, r.alloc).feasible());
}

TEST(TimeShares, UnreachableGainIsInfeasible) {
  const auto s = reference(1.0, 1e6);
  const auto ch = build_channels(s.cfg);
  const auto r = solve_time_shares(s, ch, {0.5, 0.5}, {0.0, 0.0});
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(has(r.conflicts, Constraint::rate_gain));
}

TEST(TimeShares, SilentDevicesCannotMeetTheRateFloor) {
  const auto s = reference(1.0, 0.0);
  const auto ch = build_channels(s.cfg);
  const auto r = solve_time_shares(s, ch, {0.0, 0.0}, {0.0, 0.0});
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(has(r.conflicts, Constraint::device_rate));
}

TEST(TimeShares, TieBreakDoesNotChangeTheObjective) {
  const auto s = reference(1.0, 2.0);
  const auto ch = build_channels(s.cfg);
  const auto caps = active_power_caps(s, ch);
  const auto a = solve_time_shares(s, ch, {0.7, 0.9}, {caps[0] / 8, caps[1] / 4}, false, false);
  const auto b = solve_time_shares(s, ch, {0.7, 0.9}, {caps[0] / 8, caps[1] / 4}, false, true);
  ASSERT_TRUE(a.feasible && b.feasible);
  EXPECT_EQ(a.objective, b.objective);
  const double bc_a = a.alloc.tau_bc[0] + a.alloc.tau_bc[1], bc_b = b.alloc.tau_bc[0] + b.alloc.tau_bc[1];
  EXPECT_LE(bc_b, bc_a + 1e-12);
  const auto w = s.resolved_weights();
  EXPECT_NEAR(evaluate(s.cfg, ch, b.alloc, w, s.g_min).weighted_sum, a.objective, 1e-9 * a.objective);
}

TEST(ActivePowerCaps, DerivedAndClamped) {
  auto s = reference(2.0, 0.0);
  const auto ch = build_channels(s.cfg);
  auto caps = active_power_caps(s, ch);
  EXPECT_NEAR(caps[0], 0.8 * 2.0 * 1e-3 / 1e-3, 1e-12);
  s.cfg.device_power_cap_w = 0.1;
  EXPECT_EQ(active_power_caps(s, ch)[1], 0.1);
  s.q_max = 0.05;
  EXPECT_EQ(active_power_caps(s, ch)[0], 0.05);
}

TEST(Optimize, BeatsTraditionalSrAtOneWatt) {
  for (double g : {0.0, 2.0}) {
    const auto s = reference(1.0, g);
    const auto hapc = optimize(s);
    const auto sr = optimize_sr_baseline(s);
    ASSERT_EQ(hapc.status, SolveStatus::optimal_candidate) << g;
    ASSERT_EQ(sr.status, SolveStatus::baseline_restricted) << g;
    EXPECT_GT(hapc.objective, 1.05 * sr.objective) << g;
    EXPECT_TRUE(check_feasible(s, hapc.alloc).feasible());
    EXPECT_TRUE(check_feasible(s, sr.alloc).feasible());
    for (double t : sr.alloc.tau_ac) EXPECT_EQ(t, 0.0);
  }
}

TEST(Optimize, TraceIsMonotoneAndComplete) {
  const auto sol = optimize(reference(0.5, 0.0));
  EXPECT_EQ(sol.trace.starts, 256u);
  EXPECT_GE(sol.trace.iterations, 1u);
  EXPECT_LE(sol.trace.iterations, detail::kMaxOuterIterations);
  EXPECT_FALSE(sol.trace.objective_history.empty());
  EXPECT_TRUE(sol.trace.monotone());
  EXPECT_GT(sol.trace.lp_solves, sol.trace.starts);
  EXPECT_NEAR(sol.trace.objective_history.back(), sol.objective, 1e-9 * sol.objective);
}

TEST(Optimize, DeterministicAndThreadIndependent) {
  const auto s = reference(2.0, 3.0);
  const auto a = optimize(s);
  const auto b = optimize(s);
  const auto c = optimize(s, 3);
  EXPECT_EQ(a.alloc, b.alloc);
  EXPECT_EQ(a.alloc, c.alloc);
  EXPECT_EQ(a.objective, c.objective);
  EXPECT_EQ(a.trace.objective_history, c.trace.objective_history);
}

TEST(Optimize, ZeroSourcePowerIsInfeasible) {
  const auto sol = optimize(reference(0.0, 0.0));
  EXPECT_EQ(sol.status, SolveStatus::infeasible);
  EXPECT_FALSE(sol.conflicts.empty());
  EXPECT_EQ(optimize_sr_baseline(reference(0.0, 0.0)).status, SolveStatus::infeasible);
}

TEST(Optimize, UnreachableGainReportsC1) {
  const auto sol = optimize(reference(1.0, 500.0));
  EXPECT_EQ(sol.status, SolveStatus::infeasible);
  EXPECT_TRUE(has(sol.conflicts, Constraint::rate_gain));
}

TEST(Optimize, RejectsBadSpecs) {
  auto s = reference(1.0, 0.0);
  s.weights = {1.0};
  EXPECT_THROW(optimize(s), std::invalid_argument);
  s = reference(1.0, -1.0);
  EXPECT_THROW(optimize(s), std::invalid_argument);
  s = reference(-1.0, 0.0);
  EXPECT_THROW(optimize(s), std::invalid_argument);
  s = reference(1.0, 0.0);
  s.weights = {0.0, 0.0};
  EXPECT_THROW(optimize(s), std::invalid_argument);
}

TEST(Optimize, ObjectiveFallsAsTheGainFloorRises) {
  double last = std::numeric_limits<double>::infinity();
  for (double g : {0.0, 2.0, 3.0, 4.0}) {
    const auto sol = optimize(reference(1.0, g));
    ASSERT_NE(sol.status, SolveStatus::infeasible) << g;
    EXPECT_LE(sol.objective, last) << g;
    last = sol.objective;
  }
}

TEST(Optimize, ObjectiveRisesWithPower) {
  double last = 0.0;
  for (double p : {0.05, 0.2, 0.8}) {
    const auto sol = optimize(reference(p, 0.0));
    ASSERT_NE(sol.status, SolveStatus::infeasible) << p;
    EXPECT_GE(sol.objective, last) << p;
    last = sol.objective;
  }
}

TEST(Optimize, SeparateWeightsFavourTheHeavierDevice) {
  auto s = reference(1.0, 0.0);
  s.weights = {1.0, 0.0};
  const auto sol = optimize(s);
  ASSERT_NE(sol.status, SolveStatus::infeasible);
  EXPECT_NEAR(sol.objective, sol.report.rate_device[0], 1e-12 * sol.objective);
  EXPECT_GT(sol.report.rate_device[0], sol.report.rate_device[1]);
}

TEST(Optimize, ZeroActivePowerMatchesTheBaseline) {
  auto s = reference(1.0, 0.0);
  s.q_max = 0.0;
  const auto full = optimize(s);
  const auto sr = optimize_sr_baseline(reference(1.0, 0.0));
  EXPECT_NEAR(full.objective, sr.objective, 1e-4 * sr.objective);
}

TEST(Optimize, SourcePowerSwitchNeverLosesAgainstFixedPower) {
  auto s = reference(1.0, 2.0);
  const auto fixed = optimize(s);
  s.cfg.optimize_source_power = true;
  const auto free = optimize(s);
  ASSERT_NE(free.status, SolveStatus::infeasible);
  EXPECT_LE(free.alloc.p_src, s.p_max);
  EXPECT_GE(free.objective, fixed.objective * (1.0 - 1e-6));
  EXPECT_TRUE(check_feasible(s, free.alloc).feasible());
}

TEST(Baseline, SingleDeviceMatchesReflectionGrid) {
  for (double p : {0.1, 1.0, 10.0}) {
    const auto s = single_device(p, 0.0);
    const auto ch = build_channels(s.cfg);
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) best = std::max(best, single_device_sr_value(s, ch, i / 200000.0));
    const auto sol = optimize_sr_baseline(s);
    ASSERT_EQ(sol.status, SolveStatus::baseline_restricted);
    EXPECT_NEAR(sol.objective, best, 1e-6 * best) << p;
  }
}

TEST(CheckFeasible, Examples) {
  const auto s = reference(1.0, 0.0);
  EXPECT_FALSE(check_feasible(s, Allocation::zeros(2, 1.0)).satisfies(Constraint::device_rate));
  Allocation a = Allocation::zeros(2, 1.0);
  a.tau_ac[0] = 1.0;
  a.q[0] = 0.5;
  EXPECT_FALSE(check_feasible(s, a).satisfies(Constraint::energy));
}

TEST(CheckFeasible, EveryReturnedSolutionPasses) {
  for (double p : {0.03, 3.0})
    for (double g : {0.0, 1.0}) {
      const auto s = reference(p, g);
      for (const auto& sol : {optimize(s), optimize_sr_baseline(s)}) {
        if (sol.status == SolveStatus::infeasible) continue;
        const auto r = check_feasible(s, sol.alloc);
        EXPECT_TRUE(r.feasible()) << p << " " << g << " " << violation_list(r.violations);
        EXPECT_EQ(r.weighted_sum, sol.objective);
      }
    }
}

}  // namespace
}  // namespace hapcsr
