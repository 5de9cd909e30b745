// Command-line front end: simulate, run, evaluate, report.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pwgan/config.h"
#include "pwgan/data.h"
#include "pwgan/errors.h"
#include "pwgan/experiment.h"
#include "pwgan/metrics.h"
#include "pwgan/network.h"
#include "pwgan/simgen.h"

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kRuntimeFailure = 2;

// Config file first, then --key flags in registry order, then --set pairs.
struct ConfigOptions {
  static std::string suffix(const std::string& name) {
    return name.substr(name.find('.') + 1);
  }

  std::string file;
  std::map<std::string, std::string> flags;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "experiment config file");
    std::map<std::string, int> suffix_count;
    for (const auto& key : pwgan::config_keys()) ++suffix_count[suffix(key.name)];
    for (const auto& key : pwgan::config_keys()) {
      // --section.key always works; --key too when no other section uses it
      std::string names = "--" + key.name;
      if (suffix_count[suffix(key.name)] == 1) names += ",--" + suffix(key.name);
      cmd->add_option(names, flags[key.name], key.help);
    }
    cmd->add_option("--set", sets, "override as section.key=value (repeatable)");
  }

  pwgan::ExperimentConfig resolve() const {
    pwgan::ExperimentConfig cfg =
        file.empty() ? pwgan::ExperimentConfig{} : pwgan::load_config_file(file);
    for (const auto& key : pwgan::config_keys()) {
      const auto it = flags.find(key.name);
      if (it != flags.end() && !it->second.empty()) {
        pwgan::set_config_value(cfg, key.name, it->second);
      }
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw pwgan::ConfigError("--set expects section.key=value, got '" + s + "'");
      }
      pwgan::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    return cfg;
  }
};

std::vector<std::size_t> parse_columns(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(start, end - start);
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) {
      throw pwgan::ConfigError("--columns expects 1-based indices, got '" + item + "'");
    }
    out.push_back(v - 1);
    start = end + 1;
  }
  return out;
}

int cmd_simulate(const ConfigOptions& opts, const std::string& out_dir,
                 std::uint64_t seed) {
  const pwgan::ExperimentConfig cfg = opts.resolve();
  const pwgan::SimModelSpec spec = cfg.sim_spec(seed);
  spec.validate();
  const pwgan::SimDataset sim = pwgan::generate(spec);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  pwgan::write_csv((dir / "train.csv").string(), sim.train);
  pwgan::write_csv((dir / "val.csv").string(), sim.val);
  pwgan::write_csv((dir / "test.csv").string(), sim.test);
  std::ofstream truth(dir / "truth.txt");
  for (std::size_t i = 0; i < sim.truth.size(); ++i) {
    truth << (i ? "," : "") << sim.truth[i] + 1;
  }
  truth << "\n";
  std::printf("%s p=%zu n=%zu/%zu/%zu -> %s\n", pwgan::to_string(spec.model).c_str(),
              spec.p, spec.n_train, spec.n_val, spec.n_test, out_dir.c_str());
  return kOk;
}

int cmd_run(const ConfigOptions& opts, bool print_config) {
  const pwgan::ExperimentConfig cfg = opts.resolve();
  if (print_config) {
    std::cout << pwgan::dump_config(cfg);
    return kOk;
  }
  const auto result = pwgan::run_experiment(cfg);
  for (const auto& r : result.replicates) {
    std::printf("replicate %zu: selected %zu", r.index, r.report.selected.size());
    for (const auto& [name, v] : r.metrics) std::printf(" %s=%.4f", name.c_str(), v);
    std::printf("\n");
  }
  std::cout << pwgan::aggregate_csv(result.label, result.table);
  return kOk;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& data_path,
                 const std::string& columns, std::size_t draws,
                 std::uint64_t seed) {
  const pwgan::GeneratorNet g = pwgan::load_generator_file(checkpoint);
  pwgan::Dataset data = pwgan::read_csv(data_path);
  if (!columns.empty()) {
    const auto cols = parse_columns(columns);
    for (std::size_t c : cols) {
      if (c >= data.predictors()) {
        throw pwgan::ConfigError("--columns index outside the data file");
      }
    }
    data = data.select_columns(cols);
  }
  if (data.predictors() != g.predictors()) {
    throw pwgan::ConfigError(
        "generator expects " + std::to_string(g.predictors()) +
        " predictors, data has " + std::to_string(data.predictors()) +
        " (use --columns)");
  }
  const auto sampler = pwgan::generator_sampler(g);
  if (data.is_survival()) {
    const auto pred = pwgan::predict_mean(sampler, data.x, draws, seed);
    std::printf("c_index,%.6f\n", pwgan::c_index(pred, data.y, data.delta));
  } else {
    std::printf("mse,%.6f\n",
                pwgan::prediction_mse(sampler, data.x, data.y, draws, seed));
  }
  return kOk;
}

int cmd_report(const std::string& dir) {
  const auto [label, table] = pwgan::load_experiment_metrics(dir);
  const std::string csv = pwgan::aggregate_csv(label, table);
  std::ofstream out(fs::path(dir) / "aggregate.csv", std::ios::binary);
  out << csv;
  std::cout << csv;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized conditional WGAN: variable selection and "
               "conditional distribution estimation"};
  app.require_subcommand(1);

  ConfigOptions sim_opts;
  std::string sim_out = "data";
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "write train/val/test CSVs for a model");
  sim_opts.attach(sim);
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--seed", sim_seed, "data seed");

  ConfigOptions run_opts;
  bool print_config = false;
  auto* run = app.add_subcommand("run", "run an experiment");
  run_opts.attach(run);
  run->add_flag("--print-config", print_config,
                "print the resolved config and exit");

  std::string ev_checkpoint, ev_data, ev_columns;
  std::size_t ev_draws = 50;
  std::uint64_t ev_seed = 1;
  auto* ev = app.add_subcommand("evaluate", "score a generator checkpoint on a CSV");
  ev->add_option("--checkpoint", ev_checkpoint, "generator checkpoint")->required();
  ev->add_option("--data", ev_data, "CSV with x1..xp, y[, delta]")->required();
  ev->add_option("--columns", ev_columns,
                 "1-based predictor columns the generator was trained on");
  ev->add_option("--draws", ev_draws, "noise draws per prediction");
  ev->add_option("--seed", ev_seed, "noise seed");

  std::string rep_dir;
  auto* rep = app.add_subcommand("report", "rebuild aggregate.csv from replicate files");
  rep->add_option("--dir", rep_dir, "experiment output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*sim) return cmd_simulate(sim_opts, sim_out, sim_seed);
    if (*run) return cmd_run(run_opts, print_config);
    if (*ev) return cmd_evaluate(ev_checkpoint, ev_data, ev_columns, ev_draws, ev_seed);
    if (*rep) return cmd_report(rep_dir);
  } catch (const pwgan::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigFailure;
  } catch (const pwgan::ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeFailure;
  }
  return kOk;
}
