#pragma once

// Exhaustive grid search over every decision variable for small K. Shares
// the feasibility verdict with the allocator (rate_model evaluate) and
// nothing else, so it can serve as ground truth for the allocator.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hapcsr/allocator.hpp"
#include "hapcsr/phy_model.hpp"
#include "hapcsr/rate_model.hpp"

namespace hapcsr {

struct GridSpec {
  std::size_t n_tau = 9;
  std::size_t n_alpha = 9;
  std::size_t n_q = 9;
  double q_decades = 6.0;

  void validate() const {
    if (n_tau < 2 || n_alpha < 2 || n_q < 2) throw std::invalid_argument("grid: every axis needs >= 2 points");
  }
};

inline constexpr std::size_t kOracleMaxDevices = 3;
inline constexpr double kOracleMaxEvaluations = 1e8;

/// Nested lattice points: refining n -> 2n - 1 keeps every old point.
inline double grid_unit(std::size_t i, std::size_t n) { return static_cast<double>(i) / static_cast<double>(n - 1); }

/// q grid from exactly 0 to cap, geometric over the top `decades`.
inline double grid_power(std::size_t i, std::size_t n, double cap, double decades) {
  const double s = decades * std::log(10.0);
  return cap * std::expm1(s * grid_unit(i, n)) / std::expm1(s);
}

/// All compositions of `total` into `parts` non-negative integers, in
/// lexicographic order.
inline std::vector<std::vector<std::size_t>> simplex_lattice(std::size_t total, std::size_t parts) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(parts, 0);
  auto rec = [&](auto&& self, std::size_t idx, std::size_t left) -> void {
    if (idx + 1 == parts) {
      cur[idx] = left;
      out.push_back(cur);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      cur[idx] = v;
      self(self, idx + 1, left - v);
    }
  };
  if (parts > 0) rec(rec, 0, total);
  return out;
}

inline double grid_evaluation_count(std::size_t k_count, const GridSpec& g) {
  // C(L + P - 1, P - 1) lattice points for P = 2K + 1 shares (slack included).
  const double l = static_cast<double>(g.n_tau - 1);
  const double p = static_cast<double>(2 * k_count + 1);
  const double lattice = std::round(std::exp(std::lgamma(l + p) - std::lgamma(p) - std::lgamma(l + 1.0)));
  return lattice * std::pow(static_cast<double>(g.n_alpha), static_cast<double>(k_count)) *
         std::pow(static_cast<double>(g.n_q), static_cast<double>(k_count));
}

inline Solution grid_search(const ProblemSpec& spec, const GridSpec& grid, unsigned threads = 1) {
  spec.validate();
  grid.validate();
  const std::size_t k_count = spec.cfg.device_count();
  if (k_count > kOracleMaxDevices) throw std::invalid_argument("grid_search: supports at most 3 devices");
  if (grid_evaluation_count(k_count, grid) > kOracleMaxEvaluations)
    throw std::invalid_argument("grid_search: grid exceeds 1e8 evaluations");

  const ChannelSet ch = build_channels(spec.cfg);
  const auto weights = spec.resolved_weights();
  const auto caps = active_power_caps(spec, ch);
  const auto lattice = simplex_lattice(grid.n_tau - 1, 2 * k_count + 1);
  const double l = static_cast<double>(grid.n_tau - 1);

  std::size_t combos = 1;
  for (std::size_t k = 0; k < k_count; ++k) combos *= grid.n_alpha * grid.n_q;

  struct Best {
    bool found = false;
    double value = -std::numeric_limits<double>::infinity();
    double bc_time = 0.0;
    std::size_t index = 0;
    Allocation alloc;
  };
  // Max value, then least backscatter time, then enumeration order.
  auto better = [](double v, double bc, std::size_t idx, const Best& b) {
    if (!b.found) return true;
    if (v != b.value) return v > b.value;
    if (bc != b.bc_time) return bc < b.bc_time;
    return idx < b.index;
  };

  auto scan = [&](std::size_t first, std::size_t stride, Best& best) {
    Allocation a = Allocation::zeros(k_count, spec.p_max);
    for (std::size_t c = first; c < combos; c += stride) {
      std::size_t rem = c;
      for (std::size_t k = 0; k < k_count; ++k) {
        a.alpha[k] = grid_unit(rem % grid.n_alpha, grid.n_alpha);
        rem /= grid.n_alpha;
        a.q[k] = grid_power(rem % grid.n_q, grid.n_q, caps[k], grid.q_decades);
        rem /= grid.n_q;
      }
      for (std::size_t t = 0; t < lattice.size(); ++t) {
        const auto& pt = lattice[t];
        double bc = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          a.tau_bc[k] = static_cast<double>(pt[k]) / l;
          a.tau_ac[k] = static_cast<double>(pt[k_count + k]) / l;
          bc += a.tau_bc[k];
        }
        const RateReport r = evaluate(spec.cfg, ch, a, weights, spec.g_min, spec.p_max);
        if (!r.feasible()) continue;
        const std::size_t idx = c * lattice.size() + t;
        if (better(r.weighted_sum, bc, idx, best)) best = {true, r.weighted_sum, bc, idx, a};
      }
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(combos)));
  std::vector<Best> partial(n_threads);
  if (n_threads == 1) {
    scan(0, 1, partial[0]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back([&, t] { scan(t, n_threads, partial[t]); });
  }
  Best best;
  for (const auto& p : partial)
    if (p.found && better(p.value, p.bc_time, p.index, best)) best = p;

  Solution sol;
  sol.trace.evaluations = static_cast<std::size_t>(combos * lattice.size());
  if (!best.found) {
    sol.status = SolveStatus::infeasible;
    sol.alloc = Allocation::zeros(k_count, spec.p_max);
    sol.report = evaluate(spec.cfg, ch, sol.alloc, weights, spec.g_min, spec.p_max);
    sol.conflicts = sol.report.violations;
    return sol;
  }
  sol.status = SolveStatus::optimal_candidate;
  sol.alloc = best.alloc;
  sol.report = evaluate(spec.cfg, ch, sol.alloc, weights, spec.g_min, spec.p_max);
  sol.objective = sol.report.weighted_sum;
  return sol;
}

/// Relative shortfall of `sol` against the oracle; negative when the
/// allocator beats the grid.
inline double gap(const Solution& sol, const Solution& oracle_sol) {
  if (sol.status == SolveStatus::infeasible || oracle_sol.status == SolveStatus::infeasible)
    throw std::invalid_argument("gap: both solutions must be feasible");
  return (oracle_sol.objective - sol.objective) / std::max(oracle_sol.objective, 1e-12);
}

}  // namespace hapcsr
