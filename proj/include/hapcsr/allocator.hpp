#pragma once

// Weighted sum-rate maximization over (τ^B, τ^A, α, q).
//
// For fixed reflection coefficients and active powers every constraint and
// the objective are affine in the time shares, so the inner problem is an
// exact LP. The outer loop is multi-start block-coordinate ascent: one
// device coordinate at a time, coarse grid scan then golden-section
// refinement, a move accepted only when it strictly improves the LP value.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hapcsr/phy_model.hpp"
#include "hapcsr/rate_model.hpp"
#include "hapcsr/simplex.hpp"

namespace hapcsr {

struct ProblemSpec {
  NetworkConfig cfg;
  std::vector<double> weights;  // empty -> all ones
  double g_min = 0.0;           // bits/s
  double p_max = 1.0;           // W
  std::optional<double> q_max;  // W; derived from the harvestable power when unset
  double epsilon_time = 1e-3;   // shortest AC slot the derived q cap must support

  std::vector<double> resolved_weights() const {
    return weights.empty() ? std::vector<double>(cfg.device_count(), 1.0) : weights;
  }

  void validate() const {
    cfg.validate();
    const auto w = resolved_weights();
    if (w.size() != cfg.device_count()) throw std::invalid_argument("weights: size does not match device count");
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0)) throw std::invalid_argument("weights: must be >= 0");
      sum += v;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("weights: sum must be > 0");
    if (!(g_min >= 0.0)) throw std::invalid_argument("g_min: must be >= 0");
    // p_max == 0 is accepted and simply yields an infeasible solution.
    if (!(p_max >= 0.0) || !std::isfinite(p_max)) throw std::invalid_argument("p_max: must be >= 0");
    if (q_max && !(*q_max >= 0.0)) throw std::invalid_argument("q_max: must be >= 0");
    if (!(epsilon_time > 0.0 && epsilon_time <= 1.0)) throw std::invalid_argument("epsilon_time: must lie in (0, 1]");
  }
};

/// Per-device cap on the active power search box.
inline std::vector<double> active_power_caps(const ProblemSpec& spec, const ChannelSet& ch) {
  std::vector<double> caps(ch.device_count());
  for (std::size_t k = 0; k < caps.size(); ++k) {
    double cap = spec.q_max.value_or(spec.cfg.eh_efficiency * spec.p_max * ch.g_sd[k] / spec.epsilon_time);
    if (spec.cfg.device_power_cap_w) cap = std::min(cap, *spec.cfg.device_power_cap_w);
    caps[k] = cap;
  }
  return caps;
}

enum class SolveStatus { optimal_candidate, infeasible, baseline_restricted };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal_candidate: return "optimal-candidate";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::baseline_restricted: return "baseline-restricted";
  }
  return "?";
}

struct SolverTrace {
  std::size_t starts = 0;
  std::size_t iterations = 0;  // outer sweeps of the winning start
  std::size_t lp_solves = 0;   // inner LPs over all starts
  std::size_t evaluations = 0; // grid points visited (oracle only)
  std::vector<double> objective_history;  // winning start, one entry per sweep

  bool monotone() const {
    return std::is_sorted(objective_history.begin(), objective_history.end());
  }
};

struct Solution {
  Allocation alloc;
  double objective = 0.0;
  RateReport report;
  SolveStatus status = SolveStatus::infeasible;
  SolverTrace trace;
  std::vector<Violation> conflicts;  // populated when infeasible
};

// --- inner LP ----------------------------------------------------------------

struct TimeShareResult {
  bool feasible = false;
  Allocation alloc;  // α, q as given; τ filled when feasible
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<Violation> conflicts;
  std::size_t lp_solves = 0;
};

namespace detail {

// Inward margins so LP vertices stay feasible under evaluate's arithmetic.
inline constexpr double kRateRowMargin = 1.0 + 1e-6;
inline constexpr double kEnergyRowMargin = 1.0 - 1e-10;

struct ShareLp {
  lp::Problem problem;
  std::vector<Violation> row_ids;
};

/// Builds the time-share LP. Variables: τ^B_0..τ^B_{K-1}, then τ^A_0..τ^A_{K-1}
/// unless restricted to backscatter.
inline ShareLp build_share_lp(const ProblemSpec& spec, const ChannelSet& ch, const std::vector<double>& alpha,
                              const std::vector<double>& q, double p_src, bool backscatter_only) {
  const auto& cfg = spec.cfg;
  const std::size_t k_count = ch.device_count();
  const std::size_t nv = backscatter_only ? k_count : 2 * k_count;
  const double bw = cfg.bandwidth_hz;
  const auto w = spec.resolved_weights();
  const double inv_ln2 = 1.0 / std::log(2.0);

  ShareLp s;
  s.problem.objective.assign(nv, 0.0);
  std::vector<double> gain_row(nv, 0.0), time_row(nv, 1.0);
  const double direct = p_src * ch.g_sr;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double rb = backscatter_rate(p_src, k, alpha[k], cfg.spreading_factor, ch, bw, cfg.backscatter_combining_gain);
    s.problem.objective[k] = w[k] * rb;
    // Mutualism increment over the direct-only rate at the same power.
    gain_row[k] = bw * std::log1p(alpha[k] * p_src * ch.cascade(k) / (ch.noise_w + direct)) * inv_ln2;
    if (!backscatter_only) {
      s.problem.objective[k_count + k] = w[k] * active_rate(k, q[k], ch, bw);
      // NOMA decrement: log2(1+S/(σ²+I)) − log2(1+S/σ²) = −log2(1 + S·I / (σ²(σ²+I+S))).
      const double interf = q[k] * ch.g_dr[k];
      gain_row[k_count + k] =
          -bw * std::log1p(direct * interf / (ch.noise_w * (ch.noise_w + interf + direct))) * inv_ln2;
    }
  }
  // gain = Σ τ·(R_slot − R0(p_src)) + R0(p_src) − R0(p_max); the constant
  // is zero unless the source power is a variable.
  const double idle_gain = legacy_rate_baseline(p_src, ch, bw) - legacy_rate_baseline(spec.p_max, ch, bw);

  s.problem.add_row(time_row, lp::Relation::less_equal, 1.0);
  s.row_ids.push_back({Constraint::box});
  s.problem.add_row(gain_row, lp::Relation::greater_equal, spec.g_min - idle_gain);
  s.row_ids.push_back({Constraint::rate_gain});

  for (std::size_t k = 0; k < k_count; ++k) {
    const double h = cfg.eh_efficiency * p_src * ch.g_sd[k];
    std::vector<double> row(nv, 0.0);
    row[k] = h * alpha[k] + cfg.circuit_power_bc_w;
    if (!backscatter_only) row[k_count + k] = h + q[k] + cfg.circuit_power_ac_w;
    s.problem.add_row(std::move(row), lp::Relation::less_equal, h * kEnergyRowMargin);
    s.row_ids.push_back({Constraint::energy, k});
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    std::vector<double> row(nv, 0.0);
    row[k] = backscatter_rate(p_src, k, alpha[k], cfg.spreading_factor, ch, bw, cfg.backscatter_combining_gain);
    if (!backscatter_only) row[k_count + k] = active_rate(k, q[k], ch, bw);
    s.problem.add_row(std::move(row), lp::Relation::greater_equal, kRateEpsilon * kRateRowMargin);
    s.row_ids.push_back({Constraint::device_rate, k});
  }
  return s;
}

inline void fill_shares(Allocation& a, const std::vector<double>& x, std::size_t k_count, bool backscatter_only) {
  for (std::size_t k = 0; k < k_count; ++k) {
    a.tau_bc[k] = x[k];
    a.tau_ac[k] = backscatter_only ? 0.0 : x[k_count + k];
  }
  const double busy = a.busy_time();
  if (busy > 1.0) {
    for (auto& v : a.tau_bc) v /= busy;
    for (auto& v : a.tau_ac) v /= busy;
  }
}

}  // namespace detail

/// Exact optimum of the time-share LP for fixed α and q. With
/// `tie_break` the optimal face is searched a second time for the vertex
/// with the least backscatter time.
inline TimeShareResult solve_time_shares(const ProblemSpec& spec, const ChannelSet& ch,
                                         const std::vector<double>& alpha, const std::vector<double>& q,
                                         bool backscatter_only = false, bool tie_break = true,
                                         std::optional<double> p_src = std::nullopt) {
  const std::size_t k_count = ch.device_count();
  if (alpha.size() != k_count || q.size() != k_count)
    throw std::invalid_argument("solve_time_shares: size mismatch");
  const double p = p_src.value_or(spec.p_max);
  TimeShareResult out;
  out.alloc = Allocation::zeros(k_count, p);
  out.alloc.alpha = alpha;
  out.alloc.q = backscatter_only ? std::vector<double>(k_count, 0.0) : q;

  auto share_lp = detail::build_share_lp(spec, ch, alpha, out.alloc.q, p, backscatter_only);
  const auto res = lp::solve(share_lp.problem);
  ++out.lp_solves;
  if (res.status != lp::Status::optimal) {
    for (std::size_t r : res.conflicting_rows) out.conflicts.push_back(share_lp.row_ids[r]);
    return out;
  }
  std::vector<double> x = res.x;
  if (tie_break && k_count > 0) {
    lp::Problem second = share_lp.problem;
    second.add_row(share_lp.problem.objective, lp::Relation::greater_equal,
                   res.objective - 1e-13 * std::max(1.0, std::abs(res.objective)));
    const std::size_t nv = second.variable_count();
    second.objective.assign(nv, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) second.objective[k] = -1.0;
    const auto res2 = lp::solve(second);
    ++out.lp_solves;
    if (res2.status == lp::Status::optimal) x = res2.x;
  }
  detail::fill_shares(out.alloc, x, k_count, backscatter_only);
  out.feasible = true;
  out.objective = res.objective;
  return out;
}

// --- outer search --------------------------------------------------------------

namespace detail {

inline constexpr std::size_t kMaxOuterIterations = 200;
inline constexpr double kOuterRelTol = 1e-6;
inline constexpr std::size_t kCoarseGrid = 9;
inline constexpr std::size_t kGoldenSteps = 40;
inline constexpr double kPowerDecades = 6.0;

// q(u) = cap·(10^{D·u} − 1)/(10^D − 1): exactly 0 at u = 0, cap at u = 1,
// geometric spacing across the upper decades.
inline double power_from_unit(double u, double cap) {
  return cap * std::expm1(kPowerDecades * std::log(10.0) * u) / std::expm1(kPowerDecades * std::log(10.0));
}
inline double unit_from_power(double q, double cap) {
  if (cap <= 0.0) return 0.0;
  return std::clamp(std::log1p(q / cap * std::expm1(kPowerDecades * std::log(10.0))) /
                        (kPowerDecades * std::log(10.0)), 0.0, 1.0);
}

struct SearchState {
  std::vector<double> alpha, q;
  double p_src = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

struct StartResult {
  SearchState state;
  std::size_t iterations = 0;
  std::size_t lp_solves = 0;
  std::vector<double> history;
};

class CoordinateSearch {
 public:
  CoordinateSearch(const ProblemSpec& spec, const ChannelSet& ch, bool backscatter_only)
      : spec_(spec), ch_(ch), backscatter_only_(backscatter_only), caps_(active_power_caps(spec, ch)) {}

  StartResult run(SearchState s) {
    StartResult out;
    s.value = value(s);
    out.history.push_back(s.value);
    const std::size_t k_count = ch_.device_count();
    for (std::size_t it = 0; it < kMaxOuterIterations; ++it) {
      const double before = s.value;
      for (std::size_t k = 0; k < k_count; ++k) {
        line_search(s, [k](SearchState& st, double u) { st.alpha[k] = u; },
                    [k](const SearchState& st) { return st.alpha[k]; });
        if (!backscatter_only_ && caps_[k] > 0.0) {
          const double cap = caps_[k];
          line_search(s, [k, cap](SearchState& st, double u) { st.q[k] = power_from_unit(u, cap); },
                      [k, cap](const SearchState& st) { return unit_from_power(st.q[k], cap); });
        }
      }
      if (spec_.cfg.optimize_source_power && spec_.p_max > 0.0) {
        const double pm = spec_.p_max;
        line_search(s, [pm](SearchState& st, double u) { st.p_src = u * pm; },
                    [pm](const SearchState& st) { return st.p_src / pm; });
      }
      ++out.iterations;
      out.history.push_back(s.value);
      if (!std::isfinite(s.value)) break;
      if (s.value - before <= kOuterRelTol * std::max(std::abs(before), 1e-300)) break;
    }
    out.state = s;
    out.lp_solves = lp_solves_;
    return out;
  }

  double value(const SearchState& s) {
    const auto r = solve_time_shares(spec_, ch_, s.alpha, s.q, backscatter_only_, false, s.p_src);
    lp_solves_ += r.lp_solves;
    return r.feasible ? r.objective : -std::numeric_limits<double>::infinity();
  }

 private:
  // Maximizes over one coordinate mapped onto u ∈ [0, 1].
  template <class Set, class Get>
  void line_search(SearchState& s, Set set, Get get) {
    SearchState trial = s;
    auto eval = [&](double u) {
      set(trial, u);
      return value(trial);
    };
    double best_u = get(s), best_v = s.value;
    std::vector<double> grid_v(kCoarseGrid);
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < kCoarseGrid; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(kCoarseGrid - 1);
      grid_v[i] = eval(u);
      if (grid_v[i] > grid_v[best_i]) best_i = i;
      if (grid_v[i] > best_v) {
        best_v = grid_v[i];
        best_u = u;
      }
    }
    // Golden-section refinement around the best coarse point, or around the
    // incumbent when it beats the whole grid.
    const double h = 1.0 / static_cast<double>(kCoarseGrid - 1);
    const double centre = best_v > grid_v[best_i] ? best_u : static_cast<double>(best_i) * h;
    if (std::isfinite(best_v)) {
      double lo = std::max(0.0, centre - h), hi = std::min(1.0, centre + h);
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
      double f1 = eval(x1), f2 = eval(x2);
      for (std::size_t i = 0; i < kGoldenSteps; ++i) {
        if (f1 > best_v) { best_v = f1; best_u = x1; }
        if (f2 > best_v) { best_v = f2; best_u = x2; }
        if (f1 >= f2) {
          hi = x2; x2 = x1; f2 = f1;
          x1 = hi - phi * (hi - lo);
          f1 = eval(x1);
        } else {
          lo = x1; x1 = x2; f1 = f2;
          x2 = lo + phi * (hi - lo);
          f2 = eval(x2);
        }
      }
      if (f1 > best_v) { best_v = f1; best_u = x1; }
      if (f2 > best_v) { best_v = f2; best_u = x2; }
    }
    if (best_v > s.value) {
      set(s, best_u);
      s.value = best_v;
    }
  }

  const ProblemSpec& spec_;
  const ChannelSet& ch_;
  bool backscatter_only_;
  std::vector<double> caps_;
  std::size_t lp_solves_ = 0;
};

/// Deterministic multi-start grid: all combinations of the per-device
/// (α, q) seeds for K <= 2, rotated per-device seeding for larger K.
inline std::vector<SearchState> start_points(const ProblemSpec& spec, const ChannelSet& ch, bool backscatter_only) {
  static constexpr double kAlphaSeeds[] = {0.25, 0.5, 0.75, 1.0};
  static constexpr double kPowerSeeds[] = {0.0, 0.25, 0.5, 1.0};
  const auto caps = active_power_caps(spec, ch);
  const std::size_t k_count = ch.device_count();
  const std::size_t per_device = backscatter_only ? 4 : 16;
  auto seed = [&](SearchState& s, std::size_t k, std::size_t idx) {
    s.alpha[k] = kAlphaSeeds[idx % 4];
    s.q[k] = backscatter_only ? 0.0 : kPowerSeeds[idx / 4] * caps[k];
  };
  std::vector<SearchState> starts;
  auto blank = [&] {
    SearchState s;
    s.alpha.assign(k_count, 0.0);
    s.q.assign(k_count, 0.0);
    s.p_src = spec.p_max;
    return s;
  };
  if (k_count <= 2) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < k_count; ++k) total *= per_device;
    for (std::size_t i = 0; i < total; ++i) {
      SearchState s = blank();
      std::size_t rem = i;
      for (std::size_t k = 0; k < k_count; ++k) {
        seed(s, k, rem % per_device);
        rem /= per_device;
      }
      starts.push_back(std::move(s));
    }
  } else {
    for (std::size_t i = 0; i < per_device; ++i) {
      SearchState s = blank();
      for (std::size_t k = 0; k < k_count; ++k) seed(s, k, (i + k) % per_device);
      starts.push_back(std::move(s));
    }
  }
  return starts;
}

inline double backscatter_time(const Allocation& a) {
  double s = 0.0;
  for (double v : a.tau_bc) s += v;
  return s;
}

inline Solution solve(const ProblemSpec& spec, bool backscatter_only, unsigned threads) {
  spec.validate();
  const ChannelSet ch = build_channels(spec.cfg);
  const auto starts = start_points(spec, ch, backscatter_only);
  std::vector<StartResult> results(starts.size());

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < starts.size(); i += stride) {
      CoordinateSearch search(spec, ch, backscatter_only);
      results[i] = search.run(starts[i]);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(starts.size())));
  if (n_threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
  }

  Solution sol;
  sol.trace.starts = starts.size();
  for (const auto& r : results) sol.trace.lp_solves += r.lp_solves;

  // Merge: max objective, then least backscatter time, then start order.
  std::optional<std::size_t> best;
  std::optional<TimeShareResult> best_shares;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!std::isfinite(results[i].state.value)) continue;
    if (best && results[i].state.value < results[*best].state.value) continue;
    const auto& st = results[i].state;
    auto shares = solve_time_shares(spec, ch, st.alpha, st.q, backscatter_only, true, st.p_src);
    sol.trace.lp_solves += shares.lp_solves;
    if (best && results[i].state.value == results[*best].state.value &&
        backscatter_time(shares.alloc) >= backscatter_time(best_shares->alloc))
      continue;
    best = i;
    best_shares = std::move(shares);
  }

  const auto w = spec.resolved_weights();
  if (!best) {
    sol.status = SolveStatus::infeasible;
    sol.alloc = Allocation::zeros(ch.device_count(), spec.p_max);
    // Conflicts from the first start's inner LP.
    for (std::size_t i = 0; i < starts.size() && sol.conflicts.empty(); ++i) {
      const auto& st = starts[i];
      sol.conflicts = solve_time_shares(spec, ch, st.alpha, st.q, backscatter_only, false, st.p_src).conflicts;
    }
    sol.report = evaluate(spec.cfg, ch, sol.alloc, w, spec.g_min, spec.p_max);
    sol.objective = 0.0;
    if (!results.empty()) {
      sol.trace.iterations = results.front().iterations;
      sol.trace.objective_history = results.front().history;
    }
    return sol;
  }

  sol.alloc = best_shares->alloc;
  sol.report = evaluate(spec.cfg, ch, sol.alloc, w, spec.g_min, spec.p_max);
  sol.objective = sol.report.weighted_sum;
  sol.status = backscatter_only ? SolveStatus::baseline_restricted : SolveStatus::optimal_candidate;
  sol.trace.iterations = results[*best].iterations;
  sol.trace.objective_history = results[*best].history;
  if (!sol.report.feasible()) {
    sol.status = SolveStatus::infeasible;
    sol.conflicts = sol.report.violations;
  }
  return sol;
}

}  // namespace detail

/// Full HAPC problem: backscatter, active transmission and harvesting.
inline Solution optimize(const ProblemSpec& spec, unsigned threads = 1) {
  return detail::solve(spec, false, threads);
}

/// Traditional SR: devices only backscatter (τ^A ≡ 0, q ≡ 0).
inline Solution optimize_sr_baseline(const ProblemSpec& spec, unsigned threads = 1) {
  return detail::solve(spec, true, threads);
}

/// Verdict for an arbitrary allocation against the problem's constraints.
inline RateReport check_feasible(const ProblemSpec& spec, const Allocation& alloc) {
  const ChannelSet ch = build_channels(spec.cfg);
  return evaluate(spec.cfg, ch, alloc, spec.resolved_weights(), spec.g_min, spec.p_max);
}

}  // namespace hapcsr
