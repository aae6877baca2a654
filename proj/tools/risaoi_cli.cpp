// Command-line front end: single episodes, element sweeps, MEC comparisons,
// age-evolution traces and the self-check suite.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "risaoi/risaoi.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out = "out.csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonArgs& args, const char* default_out) {
  args.out = default_out;
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--policy", args.policy, "alg1|alg2|alg3|alg4|no_ris");
  cmd->add_option("-o,--out", args.out, "output path");
  cmd->add_option("--set", args.overrides, "extra key=value override (repeatable)");
}

risaoi::SimulationConfig resolve_config(const CommonArgs& args) {
  risaoi::SimulationConfig cfg;
  if (!args.config_path.empty()) cfg = risaoi::load_config(args.config_path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    risaoi::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.seed = *args.seed;
  if (args.policy) cfg.policy = *args.policy;
  cfg.validate();
  return cfg;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AoI-minimizing scheduling in a RIS-assisted downlink"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, mec_args, evo_args, val_args;

  auto* run_cmd = app.add_subcommand("run", "run one episode, write a JSON trace");
  add_common(run_cmd, run_args, "trace.json");

  auto* sweep_cmd = app.add_subcommand("sweep-f", "sum AoI vs RIS elements for every policy");
  add_common(sweep_cmd, sweep_args, "sweep.csv");
  std::string f_list = "20,30,40,50,60";
  int sweep_seeds = 0;
  sweep_cmd->add_option("--f-values", f_list, "comma list of RIS element counts");
  sweep_cmd->add_option("--seeds", sweep_seeds, "number of replications (default: config)");

  auto* mec_cmd = app.add_subcommand("mec-compare", "MEC pipeline vs local-processing baseline");
  add_common(mec_cmd, mec_args, "mec.csv");
  std::string mec_f_list = "20,30,40,50,60";
  std::string gamma_list = "28,30";
  int mec_seeds = 0;
  mec_cmd->add_option("--f-values", mec_f_list, "comma list of RIS element counts");
  mec_cmd->add_option("--gamma-values", gamma_list, "comma list of SNR thresholds (dB)");
  mec_cmd->add_option("--seeds", mec_seeds, "number of replications (default: config)");

  auto* evo_cmd = app.add_subcommand("evolution", "per-slot age series under every policy");
  add_common(evo_cmd, evo_args, "evolution.csv");
  std::string stream_list = "1,2,3";
  evo_cmd->add_option("--streams-subset", stream_list, "1-based stream indices to report");

  auto* val_cmd = app.add_subcommand("validate", "run the statistical and replay self-checks");
  add_common(val_cmd, val_args, "validate.txt");
  bool quick = false;
  val_cmd->add_flag("--quick", quick, "smaller sample counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto cfg = resolve_config(run_args);
      const risaoi::EpisodeTrace tr = risaoi::run_episode(cfg, cfg.seed);
      std::ofstream out(run_args.out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + run_args.out);
      out << risaoi::trace_to_json(tr).dump(1) << "\n";
      std::printf("policy=%s F=%d T=%d seed=%llu sum_aoi=%lld deliveries=%lld -> %s\n",
                  tr.policy.c_str(), tr.elements, tr.horizon,
                  static_cast<unsigned long long>(tr.seed),
                  static_cast<long long>(tr.summary.sum_aoi),
                  static_cast<long long>(tr.summary.deliveries), run_args.out.c_str());
    } else if (*sweep_cmd) {
      const auto cfg = resolve_config(sweep_args);
      const auto seeds = risaoi::make_seeds(cfg.seed, sweep_seeds > 0 ? sweep_seeds : cfg.replications);
      const auto rows = risaoi::sweep_elements(cfg, parse_int_list(f_list), seeds, risaoi::all_policies());
      risaoi::write_sweep_csv(sweep_args.out, rows);
      const auto agg_path = risaoi::aggregate_path_for(sweep_args.out);
      risaoi::write_sweep_aggregate_csv(agg_path, risaoi::aggregate_sweep(rows));
      std::printf("%zu episodes -> %s (aggregate: %s)\n", rows.size(), sweep_args.out.c_str(),
                  agg_path.c_str());
    } else if (*mec_cmd) {
      const auto cfg = resolve_config(mec_args);
      const auto seeds = risaoi::make_seeds(cfg.seed, mec_seeds > 0 ? mec_seeds : cfg.replications);
      const auto rows =
          risaoi::compare_mec(cfg, parse_int_list(mec_f_list), parse_double_list(gamma_list), seeds);
      risaoi::write_mec_csv(mec_args.out, rows);
      const auto agg_path = risaoi::aggregate_path_for(mec_args.out);
      risaoi::write_mec_aggregate_csv(agg_path, risaoi::aggregate_mec(rows));
      std::printf("%zu episodes -> %s (aggregate: %s)\n", rows.size(), mec_args.out.c_str(),
                  agg_path.c_str());
    } else if (*evo_cmd) {
      const auto cfg = resolve_config(evo_args);
      const auto rows = risaoi::trace_evolution(cfg, parse_int_list(stream_list), cfg.seed);
      risaoi::write_evolution_csv(evo_args.out, rows);
      std::printf("%zu rows -> %s\n", rows.size(), evo_args.out.c_str());
    } else if (*val_cmd) {
      const auto cfg = resolve_config(val_args);
      const auto checks = risaoi::run_validation_suite(cfg.seed, quick);
      std::ofstream out(val_args.out, std::ios::binary);
      bool all = true;
      for (const auto& c : checks) {
        const std::string line =
            std::string(c.pass ? "[PASS] " : "[FAIL] ") + c.name + ": " + c.detail;
        std::printf("%s\n", line.c_str());
        if (out) out << line << "\n";
        all = all && c.pass;
      }
      if (!all) return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
