#include "pwgan/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pwgan/rng.h"
#include "pwgan/survival.h"

namespace pwgan {
namespace {

constexpr std::uint64_t kValidationNoise = 21;
constexpr std::uint64_t kInternalSplit = 22;

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

TrainConfig stage1_defaults() {
  TrainConfig c;
  c.lr_f = 5e-5;
  c.lr_g = 1e-4;
  c.batch_size = 128;
  c.prox_mode = ProxMode::kAdaptive;
  return c;
}

TrainConfig stage2_defaults() { return TrainConfig{}; }

DataSplit split_data(std::size_t n, const SplitConfig& cfg) {
  if (!(cfg.ratio > 0.0 && cfg.ratio < 1.0)) {
    throw ConfigError("split ratio must lie in (0, 1)");
  }
  const auto n1 = static_cast<std::size_t>(
      std::llround(cfg.ratio * static_cast<double>(n)));
  if (n < 2 || n1 < 1 || n1 >= n) {
    throw ConfigError("split of " + std::to_string(n) + " samples at ratio " +
                      std::to_string(cfg.ratio) + " leaves an empty half");
  }
  Rng rng(cfg.seed);
  const auto perm = rng.permutation(n);
  DataSplit s;
  s.first.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n1));
  s.second.assign(perm.begin() + static_cast<std::ptrdiff_t>(n1), perm.end());
  std::sort(s.first.begin(), s.first.end());
  std::sort(s.second.begin(), s.second.end());
  return s;
}

SelectionRule SelectionRule::absolute(double c) {
  if (!(c >= 0.0)) throw ConfigError("absolute threshold must be >= 0");
  return {Mode::kAbsolute, c};
}

SelectionRule SelectionRule::relative(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("relative threshold must lie in (0, 1)");
  }
  return {Mode::kRelative, tau};
}

SelectionRule SelectionRule::default_for(ProxMode mode) {
  // Adaptive prox leaves unimportant columns near, not exactly at, zero.
  return mode == ProxMode::kProximal ? absolute(1e-6) : relative(0.1);
}

std::string SelectionRule::describe() const {
  std::ostringstream os;
  os << (mode == Mode::kAbsolute ? "absolute(" : "relative(") << value << ')';
  return os.str();
}

std::vector<std::size_t> select_variables(std::span<const double> norms,
                                          const SelectionRule& rule) {
  double cut = rule.value;
  if (rule.mode == SelectionRule::Mode::kRelative) {
    const double mx =
        norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
    if (mx <= 0.0) return {};
    cut = rule.value * mx;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] >= cut) out.push_back(j);
  }
  return out;
}

SelectionRule PipelineConfig::resolved_rule() const {
  return rule.value_or(SelectionRule::default_for(stage1.prox_mode));
}

double validation_score(const TrainedPair& pair, const Dataset& val,
                        std::uint64_t seed) {
  const auto rows = all_rows(val.size());
  Rng rng(seed);
  const Matrix z = rng.normal_matrix(pair.generator.noise_dim(), val.size());
  std::vector<double> weights;
  if (val.is_survival()) weights = km_weights(val.y, val.delta).aligned();
  return stage1_objective(pair.generator, pair.discriminator,
                          val.predictors_t(rows), val.responses_row(rows), z,
                          weights, 0.0);
}

SelectionReport run_two_stage(const Dataset& data, const Dataset* validation,
                              const PipelineConfig& cfg,
                              const TrainHooks& stage1_hooks) {
  data.validate();
  if (cfg.lambda_grid.empty()) throw ConfigError("empty lambda grid");
  SelectionReport report;
  report.rule = cfg.resolved_rule();
  const DataSplit split = split_data(data.size(), cfg.split);
  report.stage1_rows = split.first;
  report.stage2_rows = split.second;

  // Stage-1 rows, optionally minus an internal validation slice.
  std::vector<std::size_t> train_rows = split.first;
  Dataset internal_val;
  if (validation == nullptr && cfg.lambda_grid.size() > 1) {
    Rng rng(derive_seed(cfg.split.seed, kInternalSplit));
    rng.shuffle(train_rows);
    const auto nv = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(
               cfg.internal_validation_ratio *
               static_cast<double>(train_rows.size()))));
    if (nv >= train_rows.size()) throw ConfigError("stage-1 half too small");
    std::vector<std::size_t> val_rows(train_rows.begin(),
                                      train_rows.begin() + static_cast<std::ptrdiff_t>(nv));
    train_rows.erase(train_rows.begin(),
                     train_rows.begin() + static_cast<std::ptrdiff_t>(nv));
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    internal_val = data.subset(val_rows);
    validation = &internal_val;
  }
  const Dataset a1 = data.subset(train_rows);
  const Dataset a2 = data.subset(split.second);

  std::optional<std::size_t> best;
  for (double lambda0 : cfg.lambda_grid) {
    if (!(lambda0 >= 0.0)) throw ConfigError("lambda grid values must be >= 0");
    TrainConfig c1 = cfg.stage1;
    c1.lambda_n = cfg.scale_lambda
                      ? scaled_lambda(lambda0, a1.size(), a1.predictors())
                      : lambda0;
    TrainedPair pair = train_stage1(a1, cfg.generator, cfg.discriminator, c1,
                                   stage1_hooks);
    LambdaCandidate cand{lambda0, c1.lambda_n, 0.0,
                         select_variables(first_layer_column_norms(pair.generator),
                                          report.rule)
                             .size()};
    if (cfg.lambda_grid.size() > 1) {
      cand.validation_score =
          validation_score(pair, *validation, derive_seed(c1.seed, kValidationNoise));
    }
    const bool better =
        !best || cand.validation_score < report.candidates[*best].validation_score ||
        (cand.validation_score == report.candidates[*best].validation_score &&
         cand.lambda_n > report.candidates[*best].lambda_n);
    report.candidates.push_back(cand);
    if (better) {
      best = report.candidates.size() - 1;
      report.stage1 = std::move(pair);
    }
  }
  report.lambda0_used = report.candidates[*best].lambda0;
  report.lambda_used = report.candidates[*best].lambda_n;
  report.column_norms = first_layer_column_norms(report.stage1.generator);
  report.selected = select_variables(report.column_norms, report.rule);

  report.stage2_columns = report.selected;
  if (report.selected.empty()) {
    report.no_selection = true;
    report.stage2_columns = all_rows(data.predictors());
  }
  report.stage2 = train_stage2(a2, report.stage2_columns, cfg.generator,
                               cfg.discriminator, cfg.stage2);
  return report;
}

SelectionReport run_oracle_stage2(const Dataset& data,
                                  std::span<const std::size_t> truth,
                                  const PipelineConfig& cfg) {
  SelectionReport report;
  report.rule = cfg.resolved_rule();
  const DataSplit split = split_data(data.size(), cfg.split);
  report.stage1_rows = split.first;
  report.stage2_rows = split.second;
  report.selected.assign(truth.begin(), truth.end());
  std::sort(report.selected.begin(), report.selected.end());
  report.stage2_columns = report.selected;
  report.stage2 = train_stage2(data.subset(split.second), report.stage2_columns,
                               cfg.generator, cfg.discriminator, cfg.stage2);
  return report;
}

}  // namespace pwgan
