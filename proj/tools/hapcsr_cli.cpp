// hapcsr: rate evaluation, single-point optimization, preset sweeps and
// oracle validation for the HAPC-enabled symbiotic radio model.
//
// Exit codes: 0 success, 1 every requested point infeasible, 2 config or
// argument error, 3 audit mismatch.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hapcsr/hapcsr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAudit = 3;

struct Globals {
  std::string config_path;
  std::string out_path;
  bool audit = false;
  std::uint64_t seed = 0;  // reserved for optional fading; no effect
  unsigned threads = 1;
  std::vector<double> weights;
};

hapcsr::NetworkConfig load(const Globals& g) {
  if (g.config_path.empty()) return {};
  auto loaded = hapcsr::load_config(g.config_path);
  if (!loaded.defaulted.empty())
    std::cerr << "hapcsr: defaults used for " << hapcsr::join(loaded.defaulted, ", ") << "\n";
  return loaded.cfg;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + g.out_path + "'");
  out << text;
}

std::string csv_block(const hapcsr::NetworkConfig& cfg, double p_max, double g_min, const hapcsr::RateReport& r) {
  return hapcsr::report_csv_header(cfg.device_count()) + "\n" + hapcsr::report_csv_row(p_max, g_min, r) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HAPC-enabled symbiotic radio: rates, resource allocation and sweeps"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Scenario file (key = value)");
  app.add_option("--out", g.out_path, "Write output here instead of stdout");
  app.add_flag("--audit", g.audit, "Re-evaluate every CSV row and require exact agreement");
  app.add_option("--seed", g.seed, "Reserved for optional fading; no effect on deterministic scenarios");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--weights", g.weights, "Per-device weights, comma separated")->delimiter(',');

  double p_max = 1.0, g_min = 0.0;
  auto* rates = app.add_subcommand("rates", "Evaluate a given allocation");
  std::vector<double> tau_bc, tau_ac, alpha, q;
  rates->add_option("--p-max", p_max, "Source power, W");
  rates->add_option("--g-min", g_min, "Minimum rate gain, bits/s");
  rates->add_option("--tau-bc", tau_bc, "Backscatter time shares")->delimiter(',')->required();
  rates->add_option("--tau-ac", tau_ac, "Active time shares")->delimiter(',')->required();
  rates->add_option("--alpha", alpha, "Reflection coefficients")->delimiter(',')->required();
  rates->add_option("--q", q, "Active transmit powers, W")->delimiter(',')->required();

  auto* opt = app.add_subcommand("optimize", "Solve a single operating point");
  std::string mode_name = "hapc_sr";
  opt->add_option("--p-max", p_max, "Source power cap, W");
  opt->add_option("--g-min", g_min, "Minimum rate gain, bits/s");
  opt->add_option("--mode", mode_name, "hapc_sr or sr_baseline");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  std::string preset_name, axis_name = "p_max";
  std::vector<double> values, fixed;
  std::vector<std::string> mode_names;
  sweep->add_option("--preset", preset_name, "fig4a, fig4b or fig4c");
  sweep->add_option("--axis", axis_name, "p_max or g_min");
  sweep->add_option("--values", values, "Axis values, strictly increasing")->delimiter(',');
  sweep->add_option("--fixed", fixed, "Value(s) of the other parameter")->delimiter(',');
  sweep->add_option("--modes", mode_names, "hapc_sr,sr_baseline")->delimiter(',');

  auto* orc = app.add_subcommand("oracle", "Brute-force grid validation of the allocator (K <= 3)");
  hapcsr::GridSpec grid;
  orc->add_option("--p-max", p_max, "Source power cap, W");
  orc->add_option("--g-min", g_min, "Minimum rate gain, bits/s");
  orc->add_option("--n-tau", grid.n_tau, "Grid points per time share");
  orc->add_option("--n-alpha", grid.n_alpha, "Grid points per reflection coefficient");
  orc->add_option("--n-q", grid.n_q, "Grid points per active power");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const auto cfg = load(g);
    const auto weights = g.weights.empty() ? std::vector<double>(cfg.device_count(), 1.0) : g.weights;
    if (weights.size() != cfg.device_count()) throw std::invalid_argument("--weights: one weight per device");

    if (*rates) {
      hapcsr::Allocation a{tau_bc, tau_ac, alpha, q, p_max};
      const auto ch = hapcsr::build_channels(cfg);
      const auto r = hapcsr::evaluate(cfg, ch, a, weights, g_min, p_max);
      emit(g, hapcsr::report_text(r) + csv_block(cfg, p_max, g_min, r));
      return kExitOk;
    }

    if (*opt) {
      const auto mode = hapcsr::parse_mode(mode_name);
      const auto sol = hapcsr::run_point(cfg, p_max, g_min, mode, weights, g.threads);
      emit(g, hapcsr::solution_text(sol) + csv_block(cfg, p_max, g_min, sol.report));
      return sol.status == hapcsr::SolveStatus::infeasible ? kExitInfeasible : kExitOk;
    }

    if (*sweep) {
      hapcsr::SweepSpec spec;
      if (!preset_name.empty()) {
        spec = hapcsr::preset(preset_name, cfg);
      } else {
        spec.scenario = cfg;
        spec.axis = hapcsr::parse_axis(axis_name);
        spec.values = values;
        spec.fixed = fixed;
      }
      if (!mode_names.empty()) {
        spec.modes.clear();
        for (const auto& m : mode_names) spec.modes.push_back(hapcsr::parse_mode(m));
      }
      spec.weights = weights;
      const auto table = hapcsr::run_sweep(spec, g.threads);
      const auto csv = hapcsr::to_csv(table, cfg);
      emit(g, csv);
      if (g.audit) {
        const auto res = hapcsr::audit_csv(csv, cfg, weights);
        std::cerr << "hapcsr: audit checked " << res.rows_checked << " rows, " << res.mismatched_rows.size()
                  << " mismatched\n";
        if (!res.ok()) return kExitAudit;
      }
      return table.all_infeasible() ? kExitInfeasible : kExitOk;
    }

    if (*orc) {
      hapcsr::ProblemSpec spec;
      spec.cfg = cfg;
      spec.weights = weights;
      spec.p_max = p_max;
      spec.g_min = g_min;
      const auto o = hapcsr::grid_search(spec, grid, g.threads);
      const auto a = hapcsr::optimize(spec, g.threads);
      std::string out = hapcsr::solution_text(o);
      hapcsr::append_kv(out, "allocator_status", hapcsr::to_string(a.status));
      hapcsr::append_kv(out, "allocator_objective", hapcsr::format_double(a.objective));
      if (o.status != hapcsr::SolveStatus::infeasible && a.status != hapcsr::SolveStatus::infeasible) {
        const double gp = hapcsr::gap(a, o);
        hapcsr::append_kv(out, "gap", hapcsr::format_double(gp));
        hapcsr::append_kv(out, "allocator_superior", gp < 0.0 ? "true" : "false");
      }
      emit(g, out);
      return o.status == hapcsr::SolveStatus::infeasible && a.status == hapcsr::SolveStatus::infeasible
                 ? kExitInfeasible
                 : kExitOk;
    }
  } catch (const hapcsr::ConfigError& e) {
    std::cerr << "hapcsr: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hapcsr: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "hapcsr: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
