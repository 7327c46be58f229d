#pragma once

// Text serialization: RateReport as one CSV row, Solution as a key = value
// block. Doubles use the shortest round-trip representation so a value read
// back with from_chars is bit-identical.

#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hapcsr/allocator.hpp"
#include "hapcsr/rate_model.hpp"

namespace hapcsr {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return {buf, res.ptr};
}

/// Strict parse: the whole token must be a number.
inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || first == last)
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Column order: p_max, g_min, weighted_sum, rate_source, rate_gain, then
/// rate/harvested/consumed per device, then feasibility flags.
inline std::vector<std::string> report_csv_columns(std::size_t k_count) {
  std::vector<std::string> cols{"p_max", "g_min", "weighted_sum", "rate_source", "rate_gain"};
  for (std::size_t k = 1; k <= k_count; ++k) {
    const auto s = std::to_string(k);
    cols.push_back("rate_" + s);
    cols.push_back("harvested_" + s);
    cols.push_back("consumed_" + s);
  }
  for (const char* c : {"feasible", "c1_rate_gain", "c2_energy", "c3_device_rate", "c4_box"}) cols.emplace_back(c);
  for (std::size_t k = 1; k <= k_count; ++k) cols.push_back("envelope_" + std::to_string(k));
  return cols;
}

inline std::vector<std::string> report_csv_fields(double p_max, double g_min, const RateReport& r) {
  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  std::vector<std::string> f{format_double(p_max), format_double(g_min), format_double(r.weighted_sum),
                             format_double(r.rate_source), format_double(r.rate_gain)};
  for (std::size_t k = 0; k < r.rate_device.size(); ++k) {
    f.push_back(format_double(r.rate_device[k]));
    f.push_back(format_double(r.ledger.harvested_j[k]));
    f.push_back(format_double(r.ledger.consumed_j[k]));
  }
  f.push_back(flag(r.feasible()));
  for (auto c : {Constraint::rate_gain, Constraint::energy, Constraint::device_rate, Constraint::box})
    f.push_back(flag(r.satisfies(c)));
  for (bool e : r.in_aiot_envelope) f.push_back(flag(e));
  return f;
}

inline std::string report_csv_header(std::size_t k_count) { return join(report_csv_columns(k_count), ","); }

inline std::string report_csv_row(double p_max, double g_min, const RateReport& r) {
  return join(report_csv_fields(p_max, g_min, r), ",");
}

inline std::string violation_list(const std::vector<Violation>& v) {
  if (v.empty()) return "none";
  std::vector<std::string> parts;
  for (const auto& x : v) parts.push_back(to_string(x));
  return join(parts, ",");
}

inline void append_kv(std::string& out, std::string_view key, std::string_view value) {
  out.append(key).append(" = ").append(value).push_back('\n');
}

inline std::string report_text(const RateReport& r) {
  std::string out;
  append_kv(out, "weighted_sum", format_double(r.weighted_sum));
  append_kv(out, "rate_source", format_double(r.rate_source));
  append_kv(out, "rate_source_baseline", format_double(r.rate_source_baseline));
  append_kv(out, "rate_gain", format_double(r.rate_gain));
  for (std::size_t k = 0; k < r.rate_device.size(); ++k) {
    const std::string d = "device." + std::to_string(k + 1) + ".";
    append_kv(out, d + "rate", format_double(r.rate_device[k]));
    append_kv(out, d + "harvested_j", format_double(r.ledger.harvested_j[k]));
    append_kv(out, d + "consumed_j", format_double(r.ledger.consumed_j[k]));
    append_kv(out, d + "in_envelope", r.in_aiot_envelope[k] ? "true" : "false");
  }
  append_kv(out, "feasible", r.feasible() ? "true" : "false");
  append_kv(out, "violations", violation_list(r.violations));
  return out;
}

inline std::string solution_text(const Solution& s) {
  std::string out;
  append_kv(out, "status", to_string(s.status));
  append_kv(out, "objective", format_double(s.objective));
  append_kv(out, "starts", std::to_string(s.trace.starts));
  append_kv(out, "iterations", std::to_string(s.trace.iterations));
  append_kv(out, "lp_solves", std::to_string(s.trace.lp_solves));
  if (s.trace.evaluations) append_kv(out, "evaluations", std::to_string(s.trace.evaluations));
  append_kv(out, "trace_monotone", s.trace.monotone() ? "true" : "false");
  append_kv(out, "p_src", format_double(s.alloc.p_src));
  for (std::size_t k = 0; k < s.alloc.device_count(); ++k) {
    const std::string d = "device." + std::to_string(k + 1) + ".";
    append_kv(out, d + "tau_bc", format_double(s.alloc.tau_bc[k]));
    append_kv(out, d + "tau_ac", format_double(s.alloc.tau_ac[k]));
    append_kv(out, d + "alpha", format_double(s.alloc.alpha[k]));
    append_kv(out, d + "q", format_double(s.alloc.q[k]));
  }
  append_kv(out, "slack", format_double(s.alloc.slack()));
  if (s.status == SolveStatus::infeasible) append_kv(out, "conflicts", violation_list(s.conflicts));
  out += report_text(s.report);
  return out;
}

}  // namespace hapcsr
