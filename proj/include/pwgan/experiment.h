#ifndef PWGAN_EXPERIMENT_H_
#define PWGAN_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pwgan/config.h"
#include "pwgan/metrics.h"
#include "pwgan/selection.h"

namespace pwgan {

// Seed streams derived from a replicate seed.
inline constexpr std::uint64_t kSplitStream = 31;
inline constexpr std::uint64_t kStage1Stream = 32;
inline constexpr std::uint64_t kStage2Stream = 33;
inline constexpr std::uint64_t kPredictStream = 41;
inline constexpr std::uint64_t kDistributionStream = 42;

// derive_seed(base_seed, k) for 1-based replicate index k.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t k);

struct ReplicateResult {
  std::size_t index = 0;  // 1-based
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t predictors = 0;
  SelectionReport report;
  // Scalar metrics by name: "mse" or "c_index", "tpr", "fpr",
  // "censoring_rate", "mean_mse", "sd_mse", "q0.25_mse", ...
  std::map<std::string, double> metrics;
  // Wall-clock seconds per stage: "data", "stage1", "stage2", "evaluate".
  std::map<std::string, double> timings;
};

// What an aggregate row describes.
struct AggregateLabel {
  std::string setting;  // model name, or "ingest"
  std::size_t p = 0;
  std::size_t n = 0;  // training sample size
  std::size_t replicates = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  AggregateLabel label;
  std::vector<ReplicateResult> replicates;  // in replicate-index order
  MetricTable table;                        // replicate metrics, same order
};

// Runs one replicate (no files written). `stage1_hooks` instruments every
// stage-1 training run.
ReplicateResult run_replicate(const ExperimentConfig& cfg, std::size_t k,
                              const TrainHooks& stage1_hooks = {});

// Runs every replicate on a pool of cfg.workers threads and folds results in
// index order. When `write_outputs` is set, writes into cfg.output_dir:
// manifest.json, replicate_<k>.json, timings_<k>.json, loss_trace_<k>.csv
// (stage 1), loss_trace_<k>_stage2.csv, checkpoints/ and aggregate.csv. All
// files except timings_<k>.json are determined by the config.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                bool write_outputs = true);

// Table-1 layout: header plus one row with setting, p, n, replicates and
// "mean(sd)" cells (two decimals) for MSE/C-idx, TPR, FPR and the
// conditional mean/sd/quantile MSEs; "-" where a metric does not apply.
std::string aggregate_csv(const AggregateLabel& label, const MetricTable& table);

// Rebuilds the label and metric table from manifest.json and the
// replicate_<k>.json files in `dir`.
std::pair<AggregateLabel, MetricTable> load_experiment_metrics(
    const std::string& dir);

// "m(s)" with two decimals.
std::string format_mean_sd(const MetricSummary& s);

}  // namespace pwgan

#endif  // PWGAN_EXPERIMENT_H_
