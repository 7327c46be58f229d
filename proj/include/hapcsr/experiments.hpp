#pragma once

// Parameter sweeps over the source power cap or the minimum rate gain, for
// the HAPC-SR problem and the backscatter-only SR baseline, written as CSV.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hapcsr/allocator.hpp"
#include "hapcsr/config.hpp"
#include "hapcsr/report_io.hpp"

namespace hapcsr {

enum class Axis { p_max, g_min };
enum class Mode { hapc_sr, sr_baseline };

inline const char* to_string(Axis a) { return a == Axis::p_max ? "p_max" : "g_min"; }
inline const char* to_string(Mode m) { return m == Mode::hapc_sr ? "hapc_sr" : "sr_baseline"; }

inline Axis parse_axis(std::string_view s) {
  if (s == "p_max") return Axis::p_max;
  if (s == "g_min") return Axis::g_min;
  throw std::invalid_argument("unknown axis '" + std::string(s) + "'");
}

inline Mode parse_mode(std::string_view s) {
  if (s == "hapc_sr") return Mode::hapc_sr;
  if (s == "sr_baseline") return Mode::sr_baseline;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

struct SweepSpec {
  std::string name = "custom";
  NetworkConfig scenario;
  Axis axis = Axis::p_max;
  std::vector<double> values;  // strictly increasing
  std::vector<double> fixed;   // values of the other parameter, one curve each
  std::vector<Mode> modes{Mode::hapc_sr, Mode::sr_baseline};
  std::vector<double> weights;  // empty -> all ones

  void validate() const {
    scenario.validate();
    if (values.empty()) throw std::invalid_argument("sweep: no axis values");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw std::invalid_argument("sweep: axis values must be strictly increasing");
    if (fixed.empty()) throw std::invalid_argument("sweep: no fixed value");
    if (modes.empty()) throw std::invalid_argument("sweep: no modes");
  }
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

inline std::vector<double> lin_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

inline constexpr std::string_view kPresetNames[] = {"fig4a", "fig4b", "fig4c"};

/// Built-in sweeps. Rate-gain values are in bits/s and sit inside the range
/// the default calibration can reach.
///   fig4a: weighted sum vs p_max in [0.01, 10] W, g_min ∈ {0, 3}, both modes
///   fig4b: weighted sum vs g_min in [0, 10.5] b/s at p_max = 10 W, both modes
///   fig4c: source rate vs p_max, g_min ∈ {3, 5, 8}, HAPC-SR only
inline SweepSpec preset(std::string_view name, const NetworkConfig& scenario = {}) {
  SweepSpec s;
  s.name = std::string(name);
  s.scenario = scenario;
  if (name == "fig4a") {
    s.axis = Axis::p_max;
    s.values = log_spaced(0.01, 10.0, 10);
    s.fixed = {0.0, 3.0};
  } else if (name == "fig4b") {
    s.axis = Axis::g_min;
    s.values = lin_spaced(0.0, 10.5, 8);
    s.fixed = {10.0};
  } else if (name == "fig4c") {
    s.axis = Axis::p_max;
    s.values = log_spaced(0.01, 10.0, 10);
    s.fixed = {3.0, 5.0, 8.0};
    s.modes = {Mode::hapc_sr};
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

inline Solution run_point(const NetworkConfig& scenario, double p_max, double g_min, Mode mode,
                          const std::vector<double>& weights = {}, unsigned threads = 1) {
  ProblemSpec spec;
  spec.cfg = scenario;
  spec.weights = weights;
  spec.p_max = p_max;
  spec.g_min = g_min;
  return mode == Mode::hapc_sr ? optimize(spec, threads) : optimize_sr_baseline(spec, threads);
}

struct SweepRow {
  double p_max = 0.0;
  double g_min = 0.0;
  Mode mode = Mode::hapc_sr;
  Solution solution;
};

struct SweepTable {
  std::string name;
  Axis axis = Axis::p_max;
  std::size_t device_count = 0;
  std::vector<SweepRow> rows;  // axis value, then fixed value, then mode

  bool all_infeasible() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const SweepRow& r) { return r.solution.status == SolveStatus::infeasible; });
  }
};

/// Points are independent; with threads > 1 they are claimed from a shared
/// counter and written back by index, so output equals serial execution.
inline SweepTable run_sweep(const SweepSpec& spec, unsigned threads = 1) {
  spec.validate();
  SweepTable table;
  table.name = spec.name;
  table.axis = spec.axis;
  table.device_count = spec.scenario.device_count();
  for (double v : spec.values)
    for (double f : spec.fixed)
      for (Mode m : spec.modes) {
        SweepRow r;
        r.p_max = spec.axis == Axis::p_max ? v : f;
        r.g_min = spec.axis == Axis::p_max ? f : v;
        r.mode = m;
        table.rows.push_back(std::move(r));
      }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < table.rows.size(); i = next++) {
      auto& r = table.rows[i];
      r.solution = run_point(spec.scenario, r.p_max, r.g_min, r.mode, spec.weights);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(table.rows.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
  }
  return table;
}

inline std::vector<std::string> sweep_csv_columns(std::size_t k_count) {
  auto cols = report_csv_columns(k_count);
  for (const char* c : {"axis", "mode", "status"}) cols.emplace_back(c);
  for (std::size_t k = 1; k <= k_count; ++k) {
    const auto s = std::to_string(k);
    for (const char* c : {"tau_bc_", "tau_ac_", "alpha_", "q_"}) cols.push_back(c + s);
  }
  cols.emplace_back("p_src");
  return cols;
}

inline std::string sweep_preamble(const std::string& name, Axis axis, const NetworkConfig& cfg) {
  std::string out;
  out += "# hapcsr sweep name=" + name + " axis=" + to_string(axis) + "\n";
  out += "# spreading_factor=" + std::to_string(cfg.spreading_factor) +
         " (placeholder default, not fixed by the reference scenario)\n";
  out += "# calibration path_loss_ref_gain=" + format_double(cfg.path_loss_ref_gain) +
         " path_loss_exponent=" + format_double(cfg.path_loss_exponent) +
         " min_distance_m=" + format_double(cfg.min_distance_m) + " (free parameters)\n";
  out += "# backscatter_combining_gain=" + std::string(cfg.backscatter_combining_gain ? "true" : "false") +
         " optimize_source_power=" + std::string(cfg.optimize_source_power ? "true" : "false") + "\n";
  return out;
}

/// CSV: `#` preamble, header row, one row per point; LF line endings.
inline std::string to_csv(const SweepTable& table, const NetworkConfig& cfg) {
  std::string out = sweep_preamble(table.name, table.axis, cfg);
  out += join(sweep_csv_columns(table.device_count), ",") + "\n";
  for (const auto& r : table.rows) {
    auto f = report_csv_fields(r.p_max, r.g_min, r.solution.report);
    f.emplace_back(to_string(table.axis));
    f.emplace_back(to_string(r.mode));
    f.emplace_back(to_string(r.solution.status));
    const auto& a = r.solution.alloc;
    for (std::size_t k = 0; k < table.device_count; ++k) {
      f.push_back(format_double(a.tau_bc[k]));
      f.push_back(format_double(a.tau_ac[k]));
      f.push_back(format_double(a.alpha[k]));
      f.push_back(format_double(a.q[k]));
    }
    f.push_back(format_double(a.p_src));
    out += join(f, ",") + "\n";
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("csv: missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  for (auto line : detail::split(text, '\n')) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    for (auto c : detail::split(line, ',')) cells.emplace_back(c);
    if (t.header.empty()) t.header = std::move(cells);
    else t.rows.push_back(std::move(cells));
  }
  return t;
}

struct AuditResult {
  std::size_t rows_checked = 0;
  std::vector<std::size_t> mismatched_rows;  // 0-based data-row indices

  bool ok() const { return mismatched_rows.empty(); }
};

/// Re-evaluates every row's allocation through rate_model evaluate and
/// requires the rate, ledger and flag columns to reproduce character for
/// character.
inline AuditResult audit_csv(std::string_view csv, const NetworkConfig& cfg, const std::vector<double>& weights = {}) {
  const auto t = parse_csv(csv);
  const std::size_t k_count = cfg.device_count();
  const auto w = weights.empty() ? std::vector<double>(k_count, 1.0) : weights;
  const ChannelSet ch = build_channels(cfg);
  const auto report_cols = report_csv_columns(k_count);
  AuditResult res;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    auto cell = [&](std::string_view name) { return parse_double(row.at(t.column(name))); };
    Allocation a = Allocation::zeros(k_count, cell("p_src"));
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto s = std::to_string(k + 1);
      a.tau_bc[k] = cell("tau_bc_" + s);
      a.tau_ac[k] = cell("tau_ac_" + s);
      a.alpha[k] = cell("alpha_" + s);
      a.q[k] = cell("q_" + s);
    }
    const double p_max = cell("p_max"), g_min = cell("g_min");
    const auto fields = report_csv_fields(p_max, g_min, evaluate(cfg, ch, a, w, g_min, p_max));
    bool same = true;
    for (std::size_t c = 0; c < report_cols.size(); ++c) same = same && row.at(t.column(report_cols[c])) == fields[c];
    ++res.rows_checked;
    if (!same) res.mismatched_rows.push_back(i);
  }
  return res;
}

}  // namespace hapcsr
