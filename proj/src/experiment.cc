#include "pwgan/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pwgan/rng.h"
#include "pwgan/simgen.h"

namespace pwgan {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct LoadedData {
  Dataset train;
  std::optional<Dataset> val;
  std::optional<Dataset> test;
  std::vector<std::size_t> truth;  // 0-based
  std::optional<SimDataset> sim;
};

LoadedData load_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  LoadedData d;
  if (cfg.mode == DataMode::kSimulate) {
    d.sim = generate(cfg.sim_spec(seed));
    d.train = d.sim->train;
    d.val = d.sim->val;
    d.test = d.sim->test;
    d.truth = d.sim->truth;
    return d;
  }
  d.train = read_csv(cfg.train_path, cfg.schema);
  const Schema schema = d.train.schema();
  if (!cfg.val_path.empty()) d.val = read_csv(cfg.val_path, schema);
  if (!cfg.test_path.empty()) d.test = read_csv(cfg.test_path, schema);
  for (const auto* extra : {&d.val, &d.test}) {
    if (*extra && (*extra)->predictors() != d.train.predictors()) {
      throw ConfigError("validation/test files must have the same predictors "
                        "as the training file");
    }
  }
  for (std::size_t j : cfg.truth) {
    if (j == 0 || j > d.train.predictors()) {
      throw ConfigError("data.truth index " + std::to_string(j) +
                        " outside 1.." + std::to_string(d.train.predictors()));
    }
    d.truth.push_back(j - 1);
  }
  return d;
}

// Sampler over full predictor rows for a generator trained on `columns`.
ConditionalSampler restricted_sampler(const GeneratorNet& g,
                                      std::vector<std::size_t> columns) {
  ConditionalSampler inner = generator_sampler(g);
  return [inner, columns = std::move(columns)](std::span<const double> x,
                                               std::size_t draws, Rng& rng) {
    std::vector<double> sub(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) sub[i] = x[columns[i]];
    return inner(sub, draws, rng);
  };
}

std::string quantile_key(double tau) {
  std::ostringstream os;
  os << "q" << tau << "_mse";
  return os.str();
}

void evaluate(const ExperimentConfig& cfg, const LoadedData& d,
              ReplicateResult& r) {
  const SelectionReport& rep = r.report;
  if (!d.truth.empty()) {
    const auto rates = tpr_fpr(rep.selected, d.truth, d.train.predictors());
    r.metrics["tpr"] = rates.tpr;
    r.metrics["fpr"] = rates.fpr;
  }
  if (d.train.is_survival()) {
    double censored = 0.0;
    for (int v : d.train.delta) censored += v == 0 ? 1.0 : 0.0;
    r.metrics["censoring_rate"] = censored / static_cast<double>(d.train.size());
  }
  if (!d.test) return;
  const Dataset& test = *d.test;
  const Dataset sub = test.select_columns(rep.stage2_columns);
  const auto sampler = generator_sampler(rep.stage2.generator);
  const std::uint64_t pseed = derive_seed(r.seed, kPredictStream);
  if (test.is_survival()) {
    const auto pred = predict_mean(sampler, sub.x, cfg.predict_draws, pseed);
    r.metrics["c_index"] = c_index(pred, test.y, test.delta);
  } else {
    r.metrics["mse"] =
        prediction_mse(sampler, sub.x, test.y, cfg.predict_draws, pseed);
  }
  if (!d.sim || is_survival_model(d.sim->spec.model)) return;
  const SimModelSpec spec = d.sim->spec;
  const M4Network* m4 = d.sim->m4 ? &*d.sim->m4 : nullptr;
  ConditionalOracle oracle;
  const bool moments = has_moments(spec.model);
  if (moments) {
    oracle.mean = [spec, m4](std::span<const double> x) {
      return true_mean(spec, x, m4);
    };
    oracle.sd = [spec, m4](std::span<const double> x) {
      return true_sd(spec, x, m4);
    };
  }
  oracle.quantile = [spec, m4](std::span<const double> x, double tau) {
    return true_quantile(spec, x, tau, m4);
  };
  const auto cm = conditional_mses(
      restricted_sampler(rep.stage2.generator, rep.stage2_columns), test.x,
      oracle, cfg.distribution_draws, cfg.quantile_levels,
      derive_seed(r.seed, kDistributionStream), moments);
  if (cm.mean) r.metrics["mean_mse"] = *cm.mean;
  if (cm.sd) r.metrics["sd_mse"] = *cm.sd;
  for (const auto& [tau, mse] : cm.quantile) r.metrics[quantile_key(tau)] = mse;
}

json candidates_json(const SelectionReport& rep) {
  json arr = json::array();
  for (const auto& c : rep.candidates) {
    arr.push_back({{"lambda0", c.lambda0},
                   {"lambda_n", c.lambda_n},
                   {"validation_score", c.validation_score},
                   {"selected_count", c.selected_count}});
  }
  return arr;
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& v) {
  std::vector<std::size_t> out(v);
  for (auto& j : out) ++j;
  return out;
}

json replicate_json(const ReplicateResult& r) {
  const SelectionReport& rep = r.report;
  json j;
  j["replicate"] = r.index;
  j["seed"] = r.seed;
  j["n_train"] = r.n_train;
  j["predictors"] = r.predictors;
  j["selection"] = {{"selected", one_based(rep.selected)},
                    {"stage2_columns", one_based(rep.stage2_columns)},
                    {"no_selection", rep.no_selection},
                    {"rule", rep.rule.describe()},
                    {"lambda0", rep.lambda0_used},
                    {"lambda_n", rep.lambda_used},
                    {"column_norms", rep.column_norms},
                    {"candidates", candidates_json(rep)}};
  j["metrics"] = r.metrics;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_replicate_outputs(const fs::path& dir, const ReplicateResult& r) {
  const std::string k = std::to_string(r.index);
  write_text(dir / ("replicate_" + k + ".json"), replicate_json(r).dump(2) + "\n");
  // Wall-clock times vary run to run, so they stay out of replicate_<k>.json.
  write_text(dir / ("timings_" + k + ".json"), json(r.timings).dump(2) + "\n");
  if (!r.report.stage1.loss_trace.empty()) {
    write_loss_trace_csv((dir / ("loss_trace_" + k + ".csv")).string(),
                         r.report.stage1);
  }
  write_loss_trace_csv((dir / ("loss_trace_" + k + "_stage2.csv")).string(),
                       r.report.stage2);
  const fs::path ck = dir / "checkpoints";
  fs::create_directories(ck);
  if (!r.report.stage1.loss_trace.empty()) {
    save_checkpoint_file((ck / ("replicate_" + k + "_stage1_generator.txt")).string(),
                         r.report.stage1.generator);
    save_checkpoint_file(
        (ck / ("replicate_" + k + "_stage1_discriminator.txt")).string(),
        r.report.stage1.discriminator);
  }
  save_checkpoint_file((ck / ("replicate_" + k + "_stage2_generator.txt")).string(),
                       r.report.stage2.generator);
  save_checkpoint_file(
      (ck / ("replicate_" + k + "_stage2_discriminator.txt")).string(),
      r.report.stage2.discriminator);
}

json manifest_json(const ExperimentConfig& cfg, const AggregateLabel& label) {
  json j;
  j["format"] = "pwgan-manifest 1";
  json c = json::object();
  for (const auto& key : config_keys()) c[key.name] = key.get(cfg);
  j["config"] = c;
  json resolved;
  resolved["setting"] = label.setting;
  resolved["predictors"] = label.p;
  resolved["n_train"] = label.n;
  resolved["selection_rule"] = cfg.pipeline.resolved_rule().describe();
  if (cfg.mode == DataMode::kSimulate) {
    const SimModelSpec s = cfg.sim_spec(0);
    resolved["p_s"] = s.p_s;
    resolved["n_val"] = s.n_val;
    resolved["n_test"] = s.n_test;
    resolved["split_ratio"] = cfg.resolved_split_ratio(is_survival_model(s.model));
  }
  json seeds = json::array();
  for (std::size_t k = 1; k <= cfg.replicates; ++k) {
    seeds.push_back(replicate_seed(cfg.base_seed, k));
  }
  resolved["replicate_seeds"] = seeds;
  resolved["seed_rule"] =
      "replicate k: derive_seed(base_seed, k); split/stage1/stage2/predict/"
      "distribution streams 31/32/33/41/42 of the replicate seed";
  j["resolved"] = resolved;
  return j;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t k) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(k));
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, std::size_t k,
                              const TrainHooks& stage1_hooks) {
  ReplicateResult r;
  r.index = k;
  r.seed = replicate_seed(cfg.base_seed, k);
  auto t0 = Clock::now();
  const LoadedData d = load_data(cfg, r.seed);
  r.n_train = d.train.size();
  r.predictors = d.train.predictors();
  r.timings["data"] = seconds_since(t0);

  PipelineConfig pc = cfg.pipeline;
  pc.split.ratio = cfg.resolved_split_ratio(d.train.is_survival());
  pc.split.seed = derive_seed(r.seed, kSplitStream);
  pc.stage1.seed = derive_seed(r.seed, kStage1Stream);
  pc.stage2.seed = derive_seed(r.seed, kStage2Stream);

  t0 = Clock::now();
  if (cfg.oracle) {
    r.report = run_oracle_stage2(d.train, d.truth, pc);
    r.timings["stage1"] = 0.0;
  } else {
    // The last stage-1 critic update marks the end of stage 1.
    TrainHooks hooks = stage1_hooks;
    auto stage1_end = Clock::now();
    auto user_after = stage1_hooks.after_critic;
    hooks.after_critic = [&](long it, const DiscriminatorNet& f) {
      stage1_end = Clock::now();
      if (user_after) user_after(it, f);
    };
    const Dataset* val = d.val ? &*d.val : nullptr;
    r.report = run_two_stage(d.train, val, pc, hooks);
    r.timings["stage1"] = std::chrono::duration<double>(stage1_end - t0).count();
    t0 = stage1_end;
  }
  r.timings["stage2"] = seconds_since(t0);

  t0 = Clock::now();
  evaluate(cfg, d, r);
  r.timings["evaluate"] = seconds_since(t0);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  const fs::path dir(cfg.output_dir);
  if (write_outputs) fs::create_directories(dir);

  std::vector<std::optional<ReplicateResult>> slots(cfg.replicates);
  std::vector<std::exception_ptr> errors(cfg.replicates);
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.replicates) return;
      try {
        TrainHooks hooks;
        if (write_outputs && cfg.checkpoint_every > 0) {
          hooks.checkpoint_every = cfg.checkpoint_every;
          // Candidates of a lambda grid restart the iteration count.
          auto candidate = std::make_shared<std::pair<std::size_t, long>>(1, 0);
          hooks.on_checkpoint = [&, i, candidate](long it, const GeneratorNet& g,
                                                  const DiscriminatorNet&) {
            if (it <= candidate->second) ++candidate->first;
            candidate->second = it;
            const fs::path ck = dir / "checkpoints";
            std::lock_guard<std::mutex> lock(io);
            fs::create_directories(ck);
            save_checkpoint_file(
                (ck / ("replicate_" + std::to_string(i + 1) + "_stage1_lambda" +
                       std::to_string(candidate->first) + "_it" +
                       std::to_string(it) + "_generator.txt"))
                    .string(),
                g);
          };
        }
        ReplicateResult r = run_replicate(cfg, i + 1, hooks);
        if (write_outputs) {
          std::lock_guard<std::mutex> lock(io);
          write_replicate_outputs(dir, r);
        }
        slots[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::min(cfg.workers, cfg.replicates);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (auto& s : slots) {
    for (const auto& [name, v] : s->metrics) result.table.add(name, v);
    result.replicates.push_back(std::move(*s));
  }
  const ReplicateResult& first = result.replicates.front();
  result.label.setting =
      cfg.mode == DataMode::kSimulate ? to_string(cfg.model) : "ingest";
  result.label.p = first.predictors;
  result.label.n = first.n_train;
  result.label.replicates = result.replicates.size();

  if (write_outputs) {
    write_text(dir / "manifest.json", manifest_json(cfg, result.label).dump(2) + "\n");
    write_text(dir / "aggregate.csv", aggregate_csv(result.label, result.table));
  }
  return result;
}

std::string format_mean_sd(const MetricSummary& s) {
  return fixed2(s.mean) + "(" + fixed2(s.sd) + ")";
}

std::string aggregate_csv(const AggregateLabel& label, const MetricTable& table) {
  std::vector<std::pair<std::string, std::string>> cols = {
      {"MSE/C-idx", table.has("c_index") ? "c_index" : "mse"},
      {"TPR", "tpr"},
      {"FPR", "fpr"},
      {"mean-MSE", "mean_mse"},
      {"sd-MSE", "sd_mse"}};
  for (const auto& [name, values] : table.values()) {
    if (name.size() > 5 && name.front() == 'q' &&
        name.compare(name.size() - 4, 4, "_mse") == 0) {
      cols.emplace_back(name.substr(0, name.size() - 4) + "-MSE", name);
    }
  }
  std::string header = "setting,p,n,replicates";
  std::string row = label.setting + "," + std::to_string(label.p) + "," +
                    std::to_string(label.n) + "," + std::to_string(label.replicates);
  for (const auto& [title, key] : cols) {
    header += "," + title;
    row += "," + (table.has(key) ? format_mean_sd(table.summary(key)) : "-");
  }
  return header + "\n" + row + "\n";
}

std::pair<AggregateLabel, MetricTable> load_experiment_metrics(
    const std::string& dir) {
  const fs::path root(dir);
  std::ifstream mf(root / "manifest.json");
  if (!mf) throw std::runtime_error("no manifest.json in " + dir);
  const json manifest = json::parse(mf);
  AggregateLabel label;
  label.setting = manifest.at("resolved").at("setting").get<std::string>();
  label.p = manifest.at("resolved").at("predictors").get<std::size_t>();
  label.n = manifest.at("resolved").at("n_train").get<std::size_t>();
  label.replicates =
      std::stoul(manifest.at("config").at("experiment.replicates").get<std::string>());
  MetricTable table;
  for (std::size_t k = 1; k <= label.replicates; ++k) {
    const fs::path path = root / ("replicate_" + std::to_string(k) + ".json");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path.string());
    const json r = json::parse(in);
    for (const auto& [name, v] : r.at("metrics").items()) {
      table.add(name, v.get<double>());
    }
  }
  return {label, table};
}

}  // namespace pwgan
