#ifndef PWGAN_SELECTION_H_
#define PWGAN_SELECTION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwgan/data.h"
#include "pwgan/metrics.h"
#include "pwgan/train.h"

namespace pwgan {

struct SplitConfig {
  double ratio = 0.5;  // |A1| / n
  std::uint64_t seed = 1;
};

// Index sets of the two halves. `first` trains stage 1, `second` stage 2.
struct DataSplit {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

// Seeded uniform split with |first| = round(ratio * n); both halves sorted.
DataSplit split_data(std::size_t n, const SplitConfig& cfg);

struct SelectionRule {
  enum class Mode { kAbsolute, kRelative };
  Mode mode = Mode::kAbsolute;
  double value = 1e-6;  // c for absolute, tau for relative

  static SelectionRule absolute(double c);
  static SelectionRule relative(double tau);
  // Absolute 1e-6 for kProximal, relative 0.1 otherwise.
  static SelectionRule default_for(ProxMode mode);
  std::string describe() const;
};

// Absolute: {j : norms[j] >= c}. Relative: {j : norms[j] >= tau * max}, and
// empty when every norm is zero. Returns sorted 0-based indices.
std::vector<std::size_t> select_variables(std::span<const double> norms,
                                          const SelectionRule& rule);

// Stage-1 defaults: a slow critic keeps the clipped relu critic from
// collapsing, and the larger batch lowers gradient noise on the first layer.
TrainConfig stage1_defaults();
// Stage-2 defaults: the plain TrainConfig values.
TrainConfig stage2_defaults();

struct PipelineConfig {
  ArchSpec generator;
  ArchSpec discriminator;
  TrainConfig stage1 = stage1_defaults();
  TrainConfig stage2 = stage2_defaults();
  SplitConfig split;
  std::optional<SelectionRule> rule;  // default_for(stage1.prox_mode) if unset
  // Candidate lambda0 values; lambda_n = lambda0 * n1^(-1/(2(p+1))) when
  // scale_lambda is set, else lambda_n = lambda0.
  std::vector<double> lambda_grid = {1.0};
  bool scale_lambda = true;
  // Fraction of A1 held out for lambda selection when no validation set is
  // given and the grid has more than one value.
  double internal_validation_ratio = 0.1;

  SelectionRule resolved_rule() const;
};

struct LambdaCandidate {
  double lambda0 = 0.0;
  double lambda_n = 0.0;
  double validation_score = 0.0;
  std::size_t selected_count = 0;
};

struct SelectionReport {
  std::vector<std::size_t> selected;  // 0-based
  std::vector<double> column_norms;
  double lambda_used = 0.0;
  double lambda0_used = 0.0;
  std::vector<LambdaCandidate> candidates;
  SelectionRule rule;
  bool no_selection = false;
  // Predictor columns stage 2 was trained on (== selected unless fallback).
  std::vector<std::size_t> stage2_columns;
  TrainedPair stage1;
  TrainedPair stage2;
  // Row bookkeeping into the input dataset.
  std::vector<std::size_t> stage1_rows;
  std::vector<std::size_t> stage2_rows;
  MetricTable metrics;
};

// Un-penalized critic objective on held-out data (KM-weighted for survival).
double validation_score(const TrainedPair& pair, const Dataset& val,
                        std::uint64_t seed);

// Split, stage 1 over the lambda grid on A1, pick lambda by validation score
// (smallest; ties toward larger lambda), select, and retrain on A2 restricted
// to the selected columns. An empty selection falls back to all predictors
// and sets no_selection. `stage1_hooks` instruments every stage-1 run.
SelectionReport run_two_stage(const Dataset& data, const Dataset* validation,
                              const PipelineConfig& cfg,
                              const TrainHooks& stage1_hooks = {});

// Skips stage 1: stage 2 on A2 with the given (true) predictor set.
SelectionReport run_oracle_stage2(const Dataset& data,
                                  std::span<const std::size_t> truth,
                                  const PipelineConfig& cfg);

}  // namespace pwgan

#endif  // PWGAN_SELECTION_H_
