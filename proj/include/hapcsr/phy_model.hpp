#pragma once

// Deterministic link budget for a single ambient source, K ambient-IoT
// devices and one receiver: log-distance path gains, thermal noise and the
// linear RF energy-harvesting primitive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hapcsr {

struct Position {
  double x = 0.0;  // m
  double y = 0.0;  // m

  bool operator==(const Position&) const = default;
};

/// Scenario parameters. Defaults reproduce the two-device reference
/// scenario; the path-loss triple (ref gain, exponent, clamp) is a
/// calibration knob.
struct NetworkConfig {
  Position source_pos{0.0, 0.0};
  Position receiver_pos{100.0, 1.0};
  std::vector<Position> device_pos{{0.8, 0.0}, {0.0, 1.0}};

  double bandwidth_hz = 10e3;
  double noise_psd_dbm_hz = -90.0;
  double eh_efficiency = 0.8;
  double circuit_power_bc_w = 1e-5;
  double circuit_power_ac_w = 1e-3;
  int spreading_factor = 128;

  double path_loss_ref_gain = 1e-3;
  double path_loss_exponent = 2.7;
  double min_distance_m = 1.0;  // 0 disables the near-field clamp

  std::optional<double> device_power_cap_w;

  // (B/N)·log2(1 + N·SNR) when on, (B/N)·log2(1 + SNR) when off.
  bool backscatter_combining_gain = true;
  // Lets the allocator scale the source power below its cap.
  bool optimize_source_power = false;

  std::size_t device_count() const { return device_pos.size(); }

  bool operator==(const NetworkConfig&) const = default;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
      throw std::invalid_argument(key + ": " + why);
    };
    auto finite = [](Position p) { return std::isfinite(p.x) && std::isfinite(p.y); };
    if (device_pos.empty()) fail("device_pos", "at least one device required");
    if (!finite(source_pos)) fail("source_pos", "non-finite coordinate");
    if (!finite(receiver_pos)) fail("receiver_pos", "non-finite coordinate");
    for (const auto& p : device_pos)
      if (!finite(p)) fail("device_pos", "non-finite coordinate");
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) fail("bandwidth_hz", "must be > 0");
    if (!std::isfinite(noise_psd_dbm_hz)) fail("noise_psd_dbm_hz", "must be finite");
    if (!(eh_efficiency > 0.0 && eh_efficiency <= 1.0)) fail("eh_efficiency", "must lie in (0, 1]");
    if (!(circuit_power_bc_w > 0.0)) fail("circuit_power_bc_w", "must be > 0");
    if (!(circuit_power_ac_w > 0.0)) fail("circuit_power_ac_w", "must be > 0");
    if (spreading_factor < 1) fail("spreading_factor", "must be >= 1");
    if (!(path_loss_ref_gain > 0.0)) fail("path_loss_ref_gain", "must be > 0");
    if (!(path_loss_exponent >= 0.0)) fail("path_loss_exponent", "must be >= 0");
    if (!(min_distance_m >= 0.0)) fail("min_distance_m", "must be >= 0");
    if (device_power_cap_w && !(*device_power_cap_w > 0.0))
      fail("device_power_cap_w", "must be > 0");
  }
};

/// Linear power gains of the four link classes plus the noise floor.
struct ChannelSet {
  double g_sr = 0.0;          // source -> receiver
  std::vector<double> g_sd;   // source -> device k
  std::vector<double> g_dr;   // device k -> receiver (active link and backscatter leg)
  double noise_w = 0.0;

  std::size_t device_count() const { return g_sd.size(); }
  double cascade(std::size_t k) const { return g_sd[k] * g_dr[k]; }

  bool operator==(const ChannelSet&) const = default;
};

inline double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// L0 · max(d, d_min)^(-κ).
inline double path_gain(double d, double ref_gain, double exponent, double min_distance = 1.0) {
  if (!(d >= 0.0)) throw std::invalid_argument("path_gain: distance must be >= 0");
  const double eff = std::max(d, min_distance);
  if (eff == 0.0) {
    if (exponent == 0.0) return ref_gain;
    throw std::domain_error("path_gain: zero distance with the distance clamp disabled");
  }
  return ref_gain * std::pow(eff, -exponent);
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double noise_power(double psd_dbm_hz, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("noise_power: bandwidth must be > 0");
  return dbm_to_watts(psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

inline ChannelSet build_channels(const NetworkConfig& cfg) {
  cfg.validate();
  auto gain = [&](Position a, Position b) {
    return path_gain(distance(a, b), cfg.path_loss_ref_gain, cfg.path_loss_exponent, cfg.min_distance_m);
  };
  ChannelSet ch;
  ch.g_sr = gain(cfg.source_pos, cfg.receiver_pos);
  ch.g_sd.reserve(cfg.device_count());
  ch.g_dr.reserve(cfg.device_count());
  for (const auto& d : cfg.device_pos) {
    ch.g_sd.push_back(gain(cfg.source_pos, d));
    ch.g_dr.push_back(gain(d, cfg.receiver_pos));
  }
  ch.noise_w = noise_power(cfg.noise_psd_dbm_hz, cfg.bandwidth_hz);
  return ch;
}

/// Linear EH: η · share · p_tx · gain. share is 1 for an idle device and
/// (1 − α) while backscattering with reflection coefficient α.
inline double harvested_power(double p_tx, double gain, double efficiency, double harvest_share) {
  if (!(harvest_share >= 0.0 && harvest_share <= 1.0))
    throw std::invalid_argument("harvested_power: harvest share must lie in [0, 1]");
  return efficiency * harvest_share * p_tx * gain;
}

}  // namespace hapcsr
