#pragma once

// Closed-form achievable rates for the two-phase block (mutualism phase,
// then uplink NOMA phase), the per-device energy ledger and feasibility
// evaluation of a candidate allocation. The block length is normalized to
// 1 s, so shares double as seconds and energies equal share-weighted powers.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hapcsr/phy_model.hpp"

namespace hapcsr {

inline constexpr double kRateEpsilon = 1e-9;       // bits/s; "rate > 0" threshold
inline constexpr double kFeasibilityRelTol = 1e-9;  // for C1/C2 comparisons
inline constexpr double kTimeBudgetTol = 1e-12;
inline constexpr double kEnvelopeLow = 100.0;       // bits/s
inline constexpr double kEnvelopeHigh = 5000.0;     // bits/s

/// Per-device decision variables for one block.
struct Allocation {
  std::vector<double> tau_bc;  // backscatter time share per device
  std::vector<double> tau_ac;  // active time share per device
  std::vector<double> alpha;   // reflection coefficient per device
  std::vector<double> q;       // active transmit power per device, W
  double p_src = 0.0;          // ambient source power, W

  static Allocation zeros(std::size_t k, double p_src) {
    return {std::vector<double>(k, 0.0), std::vector<double>(k, 0.0), std::vector<double>(k, 0.0),
            std::vector<double>(k, 0.0), p_src};
  }

  std::size_t device_count() const { return tau_bc.size(); }

  double busy_time() const {
    return std::accumulate(tau_bc.begin(), tau_bc.end(), 0.0) +
           std::accumulate(tau_ac.begin(), tau_ac.end(), 0.0);
  }
  /// Idle time in which every device harvests.
  double slack() const { return 1.0 - busy_time(); }

  bool operator==(const Allocation&) const = default;
};

struct EnergyLedger {
  std::vector<double> harvested_j;
  std::vector<double> consumed_j;

  double slack_j(std::size_t k) const { return harvested_j[k] - consumed_j[k]; }
};

enum class Constraint { rate_gain = 1, energy = 2, device_rate = 3, box = 4 };

inline const char* constraint_id(Constraint c) {
  switch (c) {
    case Constraint::rate_gain: return "C1";
    case Constraint::energy: return "C2";
    case Constraint::device_rate: return "C3";
    case Constraint::box: return "C4";
  }
  return "C?";
}

inline constexpr std::size_t kNoDevice = static_cast<std::size_t>(-1);

struct Violation {
  Constraint constraint;
  std::size_t device = kNoDevice;

  bool operator==(const Violation&) const = default;
};

/// "C2[1]" style label with a 1-based device index.
inline std::string to_string(const Violation& v) {
  std::string s = constraint_id(v.constraint);
  if (v.device != kNoDevice) s += "[" + std::to_string(v.device + 1) + "]";
  return s;
}

struct RateReport {
  std::vector<double> rate_device;
  double rate_source = 0.0;
  double rate_source_baseline = 0.0;
  double rate_gain = 0.0;
  double weighted_sum = 0.0;
  EnergyLedger ledger;
  std::vector<Violation> violations;
  std::vector<bool> in_aiot_envelope;

  bool feasible() const { return violations.empty(); }
  bool satisfies(Constraint c) const {
    for (const auto& v : violations)
      if (v.constraint == c) return false;
    return true;
  }
};

// --- rate primitives -------------------------------------------------------

inline double shannon(double bandwidth_hz, double snr) { return bandwidth_hz * std::log2(1.0 + snr); }

/// Source rate with no A-IoT access.
inline double legacy_rate_baseline(double p, const ChannelSet& ch, double bandwidth_hz) {
  return shannon(bandwidth_hz, p * ch.g_sr / ch.noise_w);
}

/// Source rate while device k backscatters: the reflected copy adds to the
/// direct path as extra multipath.
inline double legacy_rate_mutualism(double p, std::size_t k, double alpha, const ChannelSet& ch,
                                    double bandwidth_hz) {
  return shannon(bandwidth_hz, (p * ch.g_sr + alpha * p * ch.cascade(k)) / ch.noise_w);
}

/// Device k's backscatter rate after the legacy signal is cancelled. One
/// device symbol spans N source symbols.
inline double backscatter_rate(double p, std::size_t k, double alpha, int spreading_factor,
                               const ChannelSet& ch, double bandwidth_hz, bool combining_gain = true) {
  const double n = static_cast<double>(spreading_factor);
  const double snr = alpha * p * ch.cascade(k) / ch.noise_w;
  return shannon(bandwidth_hz / n, combining_gain ? n * snr : snr);
}

/// Source rate while device k transmits actively; decoded first with the
/// device signal as interference.
inline double legacy_rate_noma(double p, std::size_t k, double q, const ChannelSet& ch,
                               double bandwidth_hz) {
  return shannon(bandwidth_hz, p * ch.g_sr / (ch.noise_w + q * ch.g_dr[k]));
}

/// Device k's active rate once the legacy signal has been cancelled.
inline double active_rate(std::size_t k, double q, const ChannelSet& ch, double bandwidth_hz) {
  return shannon(bandwidth_hz, q * ch.g_dr[k] / ch.noise_w);
}

inline bool in_envelope(double rate) { return rate >= kEnvelopeLow && rate <= kEnvelopeHigh; }

// --- ledger and evaluation -------------------------------------------------

namespace detail {
inline void check_sizes(const Allocation& a, std::size_t k) {
  if (a.tau_bc.size() != k || a.tau_ac.size() != k || a.alpha.size() != k || a.q.size() != k)
    throw std::invalid_argument("allocation size does not match device count");
}
}  // namespace detail

/// Harvest: own BC slot at (1 − α), every other device's slot, and the idle
/// slack. Nothing is harvested during the device's own AC slot.
inline EnergyLedger energy_ledger(const NetworkConfig& cfg, const ChannelSet& ch, const Allocation& a) {
  const std::size_t k_count = ch.device_count();
  detail::check_sizes(a, k_count);
  const double slack = a.slack();
  EnergyLedger led;
  led.harvested_j.resize(k_count);
  led.consumed_j.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    double others = 0.0;
    for (std::size_t j = 0; j < k_count; ++j)
      if (j != k) others += a.tau_bc[j] + a.tau_ac[j];
    const double harvest_time = (1.0 - a.alpha[k]) * a.tau_bc[k] + others + slack;
    led.harvested_j[k] = cfg.eh_efficiency * a.p_src * ch.g_sd[k] * harvest_time;
    led.consumed_j[k] = cfg.circuit_power_bc_w * a.tau_bc[k] + (a.q[k] + cfg.circuit_power_ac_w) * a.tau_ac[k];
  }
  return led;
}

/// Full evaluation. Infeasible allocations are reported through
/// RateReport::violations, never rejected. `baseline_power` is the power cap
/// p_max: when given, the no-access baseline uses it and p_src must not
/// exceed it. Otherwise the allocation's own source power is used.
inline RateReport evaluate(const NetworkConfig& cfg, const ChannelSet& ch, const Allocation& a,
                           const std::vector<double>& weights, double g_min,
                           std::optional<double> baseline_power = std::nullopt) {
  const std::size_t k_count = ch.device_count();
  detail::check_sizes(a, k_count);
  if (weights.size() != k_count) throw std::invalid_argument("weights size does not match device count");

  const double bw = cfg.bandwidth_hz;
  const double p = a.p_src;
  RateReport r;
  r.rate_device.resize(k_count);
  r.in_aiot_envelope.resize(k_count);
  double source = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double rb = backscatter_rate(p, k, a.alpha[k], cfg.spreading_factor, ch, bw, cfg.backscatter_combining_gain);
    const double ra = active_rate(k, a.q[k], ch, bw);
    r.rate_device[k] = a.tau_bc[k] * rb + a.tau_ac[k] * ra;
    r.weighted_sum += weights[k] * r.rate_device[k];
    r.in_aiot_envelope[k] = in_envelope(r.rate_device[k]);
    source += a.tau_bc[k] * legacy_rate_mutualism(p, k, a.alpha[k], ch, bw);
    source += a.tau_ac[k] * legacy_rate_noma(p, k, a.q[k], ch, bw);
  }
  const double slack = a.slack();
  source += slack * legacy_rate_baseline(p, ch, bw);
  r.rate_source = source;
  r.rate_source_baseline = legacy_rate_baseline(baseline_power.value_or(p), ch, bw);
  r.rate_gain = r.rate_source - r.rate_source_baseline;
  r.ledger = energy_ledger(cfg, ch, a);

  if (r.rate_gain < g_min - kFeasibilityRelTol * std::max(1.0, r.rate_source_baseline))
    r.violations.push_back({Constraint::rate_gain});
  for (std::size_t k = 0; k < k_count; ++k) {
    const double h = r.ledger.harvested_j[k];
    const double c = r.ledger.consumed_j[k];
    if (c > h + kFeasibilityRelTol * std::max(h, c)) r.violations.push_back({Constraint::energy, k});
  }
  for (std::size_t k = 0; k < k_count; ++k)
    if (!(r.rate_device[k] >= kRateEpsilon)) r.violations.push_back({Constraint::device_rate, k});

  bool box_ok = slack >= -kTimeBudgetTol && p >= 0.0;
  if (baseline_power) box_ok = box_ok && p <= *baseline_power;
  for (std::size_t k = 0; k < k_count; ++k) {
    box_ok = box_ok && a.tau_bc[k] >= 0.0 && a.tau_ac[k] >= 0.0;
    box_ok = box_ok && a.alpha[k] >= 0.0 && a.alpha[k] <= 1.0 && a.q[k] >= 0.0;
    if (cfg.device_power_cap_w) box_ok = box_ok && a.q[k] <= *cfg.device_power_cap_w;
  }
  if (!box_ok) r.violations.push_back({Constraint::box});
  return r;
}

}  // namespace hapcsr
