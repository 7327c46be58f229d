#pragma once

// Flat `key = value` scenario files. One assignment per line, `#` starts a
// comment, unknown or repeated keys are errors, missing keys take the
// reference-scenario defaults and are reported back to the caller.
//
//   source_pos   = 0, 0
//   receiver_pos = 100, 1
//   device_pos   = 0.8, 0; 0, 1      # one "x, y" pair per device
//   device_power_cap_w = none        # or a power in W

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hapcsr/phy_model.hpp"
#include "hapcsr/report_io.hpp"

namespace hapcsr {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LoadedConfig {
  NetworkConfig cfg;
  std::vector<std::string> defaulted;  // keys filled from defaults, in key order
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

inline Position parse_position(std::string_view v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw std::invalid_argument("expected 'x, y'");
  return {parse_double(parts[0]), parse_double(parts[1])};
}

inline bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("expected a boolean");
}

inline int parse_int(std::string_view v) {
  const double d = parse_double(v);
  if (d != static_cast<double>(static_cast<long long>(d)) || d < -2147483648.0 || d > 2147483647.0)
    throw std::invalid_argument("expected an integer");
  return static_cast<int>(d);
}

using Setter = std::function<void(NetworkConfig&, std::string_view)>;

inline const std::vector<std::pair<std::string, Setter>>& config_keys() {
  static const std::vector<std::pair<std::string, Setter>> keys = {
      {"source_pos", [](NetworkConfig& c, std::string_view v) { c.source_pos = parse_position(v); }},
      {"receiver_pos", [](NetworkConfig& c, std::string_view v) { c.receiver_pos = parse_position(v); }},
      {"device_pos",
       [](NetworkConfig& c, std::string_view v) {
         c.device_pos.clear();
         for (auto p : split(v, ';'))
           if (!p.empty()) c.device_pos.push_back(parse_position(p));
       }},
      {"bandwidth_hz", [](NetworkConfig& c, std::string_view v) { c.bandwidth_hz = parse_double(v); }},
      {"noise_psd_dbm_hz", [](NetworkConfig& c, std::string_view v) { c.noise_psd_dbm_hz = parse_double(v); }},
      {"eh_efficiency", [](NetworkConfig& c, std::string_view v) { c.eh_efficiency = parse_double(v); }},
      {"circuit_power_bc_w", [](NetworkConfig& c, std::string_view v) { c.circuit_power_bc_w = parse_double(v); }},
      {"circuit_power_ac_w", [](NetworkConfig& c, std::string_view v) { c.circuit_power_ac_w = parse_double(v); }},
      {"spreading_factor", [](NetworkConfig& c, std::string_view v) { c.spreading_factor = parse_int(v); }},
      {"path_loss_ref_gain", [](NetworkConfig& c, std::string_view v) { c.path_loss_ref_gain = parse_double(v); }},
      {"path_loss_exponent", [](NetworkConfig& c, std::string_view v) { c.path_loss_exponent = parse_double(v); }},
      {"min_distance_m", [](NetworkConfig& c, std::string_view v) { c.min_distance_m = parse_double(v); }},
      {"device_power_cap_w",
       [](NetworkConfig& c, std::string_view v) {
         if (v == "none") c.device_power_cap_w.reset();
         else c.device_power_cap_w = parse_double(v);
       }},
      {"backscatter_combining_gain",
       [](NetworkConfig& c, std::string_view v) { c.backscatter_combining_gain = parse_bool(v); }},
      {"optimize_source_power", [](NetworkConfig& c, std::string_view v) { c.optimize_source_power = parse_bool(v); }},
  };
  return keys;
}

}  // namespace detail

inline std::vector<std::string> config_key_names() {
  std::vector<std::string> names;
  for (const auto& [k, _] : detail::config_keys()) names.push_back(k);
  return names;
}

inline LoadedConfig parse_config(std::string_view text) {
  const auto& keys = detail::config_keys();
  LoadedConfig out;
  std::map<std::string, std::size_t> seen;  // key -> line
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == keys.end()) throw ConfigError(line_no, "unknown key '" + key + "'");
    if (seen.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    seen[key] = line_no;
    try {
      it->second(out.cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line_no, key + ": " + e.what());
    }
  }
  for (const auto& [k, _] : keys)
    if (!seen.count(k)) out.defaulted.push_back(k);
  try {
    out.cfg.validate();
  } catch (const std::invalid_argument& e) {
    // Messages are "key: reason"; point at the line that set the key.
    const std::string msg = e.what();
    const auto key = msg.substr(0, msg.find(':'));
    const auto it = seen.find(key);
    throw ConfigError(it == seen.end() ? 0 : it->second, msg);
  }
  return out;
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Serializes a config in the same grammar; parse_config(write_config(c))
/// reproduces c exactly.
inline std::string write_config(const NetworkConfig& c) {
  auto pos = [](Position p) { return format_double(p.x) + ", " + format_double(p.y); };
  std::string out;
  append_kv(out, "source_pos", pos(c.source_pos));
  append_kv(out, "receiver_pos", pos(c.receiver_pos));
  std::vector<std::string> devs;
  for (auto p : c.device_pos) devs.push_back(pos(p));
  append_kv(out, "device_pos", join(devs, "; "));
  append_kv(out, "bandwidth_hz", format_double(c.bandwidth_hz));
  append_kv(out, "noise_psd_dbm_hz", format_double(c.noise_psd_dbm_hz));
  append_kv(out, "eh_efficiency", format_double(c.eh_efficiency));
  append_kv(out, "circuit_power_bc_w", format_double(c.circuit_power_bc_w));
  append_kv(out, "circuit_power_ac_w", format_double(c.circuit_power_ac_w));
  append_kv(out, "spreading_factor", std::to_string(c.spreading_factor));
  append_kv(out, "path_loss_ref_gain", format_double(c.path_loss_ref_gain));
  append_kv(out, "path_loss_exponent", format_double(c.path_loss_exponent));
  append_kv(out, "min_distance_m", format_double(c.min_distance_m));
  append_kv(out, "device_power_cap_w", c.device_power_cap_w ? format_double(*c.device_power_cap_w) : "none");
  append_kv(out, "backscatter_combining_gain", c.backscatter_combining_gain ? "true" : "false");
  append_kv(out, "optimize_source_power", c.optimize_source_power ? "true" : "false");
  return out;
}

}  // namespace hapcsr
