#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "pwgan/selection.h"
#include "pwgan/simgen.h"
#include "test_support.h"

using namespace pwgan;

namespace {

PipelineConfig quick_pipeline() {
  PipelineConfig cfg;
  cfg.generator.hidden_widths = {8, 4};
  cfg.discriminator.hidden_widths = {8, 4};
  for (TrainConfig* c : {&cfg.stage1, &cfg.stage2}) {
    c->iterations = 30;
    c->batch_size = 16;
    c->noise_dim = 2;
  }
  cfg.split.seed = 9;
  return cfg;
}

Dataset toy(std::size_t n, std::size_t p, std::uint64_t seed) {
  SimModelSpec s = SimModelSpec::defaults(SimModel::kM1, p);
  s.p_s = 2;
  s.n_train = n;
  s.seed = seed;
  return generate(s).train;
}

}  // namespace

TEST_CASE("split halves are disjoint, sorted and cover every row") {
  const DataSplit s = split_data(100, {0.5, 3});
  CHECK(s.first.size() == 50);
  CHECK(s.second.size() == 50);
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rng.below(300);
    const double ratio = 0.05 + 0.9 * rng.uniform();
    SplitConfig cfg{ratio, rng.engine()()};
    DataSplit d;
    try {
      d = split_data(n, cfg);
    } catch (const ConfigError&) {
      continue;  // rounding left an empty half
    }
    CHECK(std::is_sorted(d.first.begin(), d.first.end()));
    CHECK(std::is_sorted(d.second.begin(), d.second.end()));
    std::vector<std::size_t> all = d.first;
    all.insert(all.end(), d.second.begin(), d.second.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> want(n);
    std::iota(want.begin(), want.end(), std::size_t{0});
    CHECK(all == want);
  }
  const DataSplit a = split_data(77, {0.3, 11}), b = split_data(77, {0.3, 11});
  CHECK(a.first == b.first);
  CHECK_THROWS_AS(split_data(10, {1.0, 1}), ConfigError);
  CHECK_THROWS_AS(split_data(1, {0.5, 1}), ConfigError);
}

TEST_CASE("selection rules") {
  const std::vector<double> norms{5, 5, 0.01, 0};
  CHECK(select_variables(norms, SelectionRule::relative(0.1)) ==
        std::vector<std::size_t>{0, 1});
  CHECK(select_variables(norms, SelectionRule::absolute(0.0)).size() == 4);
  CHECK(select_variables(norms, SelectionRule::absolute(1e-6)) ==
        std::vector<std::size_t>{0, 1, 2});
  const std::vector<double> zeros(5, 0.0);
  CHECK(select_variables(zeros, SelectionRule::relative(0.1)).empty());
  for (double c : {1e-300, 1e-6, 1.0}) {
    for (std::size_t j : select_variables(norms, SelectionRule::absolute(c))) {
      CHECK(norms[j] > 0.0);
    }
  }
  CHECK(SelectionRule::default_for(ProxMode::kProximal).mode ==
        SelectionRule::Mode::kAbsolute);
  CHECK(SelectionRule::default_for(ProxMode::kAdaptive).mode ==
        SelectionRule::Mode::kRelative);
  CHECK(SelectionRule::default_for(ProxMode::kAdaptive).value == 0.1);
  CHECK_FALSE(SelectionRule::relative(0.1).describe().empty());
}

TEST_CASE("pipeline bookkeeping keeps the halves apart") {
  const Dataset data = toy(120, 5, 1);
  const PipelineConfig cfg = quick_pipeline();
  const SelectionReport r = run_two_stage(data, nullptr, cfg);
  CHECK(r.candidates.size() == 1);
  CHECK(r.stage1_rows.size() + r.stage2_rows.size() == data.size());
  std::vector<std::size_t> common;
  std::set_intersection(r.stage1_rows.begin(), r.stage1_rows.end(),
                        r.stage2_rows.begin(), r.stage2_rows.end(),
                        std::back_inserter(common));
  CHECK(common.empty());
  CHECK(r.column_norms.size() == 5);
  CHECK(r.stage2.generator.predictors() == r.stage2_columns.size());

  // stage 1 never reads A2
  Dataset changed = data;
  for (std::size_t i : r.stage2_rows) changed.y[i] += 100.0;
  const SelectionReport r2 = run_two_stage(changed, nullptr, cfg);
  CHECK(r2.stage1.generator == r.stage1.generator);
  CHECK_FALSE(r2.stage2.generator == r.stage2.generator);

  // stage 2 never reads A1
  Dataset changed1 = data;
  for (std::size_t i : r.stage1_rows) changed1.y[i] -= 50.0;
  const std::vector<std::size_t> truth{0, 1};
  CHECK(run_oracle_stage2(data, truth, cfg).stage2.generator ==
        run_oracle_stage2(changed1, truth, cfg).stage2.generator);
}

TEST_CASE("empty selection falls back to all predictors") {
  const Dataset data = toy(120, 4, 2);
  PipelineConfig cfg = quick_pipeline();
  cfg.stage1.prox_mode = ProxMode::kProximal;
  cfg.lambda_grid = {1e7};
  const SelectionReport r = run_two_stage(data, nullptr, cfg);
  CHECK(r.selected.empty());
  CHECK(r.no_selection);
  CHECK(r.stage2_columns == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("a lambda grid is scored on validation data") {
  const Dataset data = toy(160, 4, 3);
  PipelineConfig cfg = quick_pipeline();
  cfg.lambda_grid = {0.0, 0.5, 2.0};
  const SelectionReport r = run_two_stage(data, nullptr, cfg);
  REQUIRE(r.candidates.size() == 3);
  double best = r.candidates[0].validation_score;
  for (const auto& c : r.candidates) {
    CHECK(std::isfinite(c.validation_score));
    best = std::min(best, c.validation_score);
  }
  bool used_best = false;
  for (const auto& c : r.candidates)
    if (c.lambda_n == r.lambda_used) used_best = c.validation_score == best;
  CHECK(used_best);
  CHECK(r.lambda_used ==
        doctest::Approx(scaled_lambda(r.lambda0_used, 72, 4)));

  const Dataset val = toy(40, 4, 4);
  const SelectionReport rv = run_two_stage(data, &val, cfg);
  CHECK(rv.candidates.size() == 3);
}

TEST_CASE("validation score is the un-penalized critic objective") {
  const Dataset data = toy(60, 3, 5);
  TrainConfig c = quick_pipeline().stage1;
  c.lambda_n = 5.0;
  ArchSpec a;
  a.hidden_widths = {4};
  const TrainedPair pair = train_stage1(data, a, a, c);
  const double s1 = validation_score(pair, data, 1);
  CHECK(s1 == validation_score(pair, data, 1));
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(1);
  const Matrix z = rng.normal_matrix(c.noise_dim, data.size());
  CHECK(s1 == stage1_objective(pair.generator, pair.discriminator,
                               data.predictors_t(rows), data.responses_row(rows),
                               z, {}, 0.0));
}

TEST_CASE("stage defaults") {
  const TrainConfig s1 = stage1_defaults();
  CHECK(s1.prox_mode == ProxMode::kAdaptive);
  CHECK(s1.batch_size == 128);
  CHECK(s1.lr_f == 5e-5);
  CHECK(s1.lr_g == 1e-4);
  const TrainConfig s2 = stage2_defaults();
  CHECK(s2.lr_f == TrainConfig{}.lr_f);
  CHECK(PipelineConfig{}.resolved_rule().mode == SelectionRule::Mode::kRelative);
}
