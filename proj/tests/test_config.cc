#include <fstream>
#include <string>

#include "doctest.h"
#include "pwgan/config.h"
#include "test_support.h"

using namespace pwgan;

namespace {

std::string config_error(const std::string& text) {
  ExperimentConfig cfg;
  try {
    apply_config_text(cfg, text, "exp.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("sections, comments and qualified keys") {
  ExperimentConfig cfg;
  apply_config_text(cfg, R"(
# replicate plan
[experiment]
replicates = 5   # five runs
base_seed = 42
[data]
model = M3
p = 50
experiment.workers = 3
[stage1]
lambda_grid = 0.5, 1, 2
prox_mode = proximal
[selection]
rule = absolute
threshold = 1e-4
[generator]
hidden = 16,8
activation = leaky_relu(0.2)
)");
  CHECK(cfg.replicates == 5);
  CHECK(cfg.base_seed == 42);
  CHECK(cfg.model == SimModel::kM3);
  CHECK(cfg.p == 50);
  CHECK(cfg.workers == 3);
  CHECK(cfg.pipeline.lambda_grid == std::vector<double>{0.5, 1, 2});
  CHECK(cfg.pipeline.stage1.prox_mode == ProxMode::kProximal);
  REQUIRE(cfg.pipeline.rule.has_value());
  CHECK(cfg.pipeline.rule->mode == SelectionRule::Mode::kAbsolute);
  CHECK(cfg.pipeline.rule->value == 1e-4);
  CHECK(cfg.pipeline.generator.hidden_widths == std::vector<std::size_t>{16, 8});
  CHECK(cfg.pipeline.generator.activation.slope == 0.2);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("errors carry source and line") {
  CHECK(config_error("[data]\nbogus = 1\n").find("exp.cfg:2:") == 0);
  CHECK(config_error("[data]\np = ten\n").find("exp.cfg:2:") == 0);
  CHECK(config_error("p = 3\n").find("exp.cfg:1:") == 0);
  CHECK(config_error("[data\n").find("exp.cfg:1:") == 0);
  CHECK(config_error("[data]\njust words\n").find("exp.cfg:2:") == 0);
  CHECK(config_error("[stage1]\nprox_mode = ridge\n") != "");
  CHECK(config_error("[data]\nmodel = M9\n") != "");
  ExperimentConfig cfg;
  CHECK_THROWS_AS(set_config_value(cfg, "data.nope", "1"), ConfigError);
  CHECK_THROWS_AS(get_config_value(cfg, "nope"), ConfigError);
}

TEST_CASE("dump round trips through the parser") {
  ExperimentConfig cfg;
  apply_config_text(cfg, "[experiment]\nreplicates = 2\n[stage2]\nlr_g = 0.00025\n"
                         "[evaluation]\nquantiles = 0.1,0.9\n[data]\nn_train = 300\n");
  const std::string dump = dump_config(cfg);
  ExperimentConfig back;
  apply_config_text(back, dump);
  CHECK(dump_config(back) == dump);
  CHECK(back.pipeline.stage2.lr_g == 0.00025);
  CHECK(back.n_train == std::optional<std::size_t>{300});
  CHECK(dump_config(ExperimentConfig{}).find("p_s = auto") != std::string::npos);
  for (const auto& key : config_keys()) {
    CHECK(dump.find(key.name.substr(key.name.find('.') + 1) + " = ") != std::string::npos);
  }
}

TEST_CASE("every key can be read and set back") {
  ExperimentConfig cfg;
  for (const auto& key : config_keys()) {
    const std::string v = get_config_value(cfg, key.name);
    CHECK_NOTHROW(set_config_value(cfg, key.name, v));
    CHECK(get_config_value(cfg, key.name) == v);
  }
}

TEST_CASE("validation rejects inconsistent configs") {
  ExperimentConfig cfg;
  cfg.replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.p = 10;  // p_s defaults to 30
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.p_s = 4;
  CHECK_NOTHROW(cfg.validate());
  cfg.mode = DataMode::kIngest;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.quantile_levels = {0.5, 1.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.pipeline.stage1.lr_f = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("sample sizes resolve to model defaults") {
  ExperimentConfig cfg;
  cfg.model = SimModel::kM5;
  const SimModelSpec s = cfg.sim_spec(7);
  CHECK(s.n_train == 5000);
  CHECK(s.p_s == 30);
  CHECK(s.seed == 7);
  cfg.n_train = 2000;
  CHECK(cfg.sim_spec(7).n_train == 2000);
}

TEST_CASE("split ratio resolves by schema unless set") {
  ExperimentConfig cfg;
  CHECK(get_config_value(cfg, "selection.split_ratio") == "auto");
  CHECK(cfg.resolved_split_ratio(false) == 0.3);
  CHECK(cfg.resolved_split_ratio(true) == 0.5);
  set_config_value(cfg, "selection.split_ratio", "0.6");
  CHECK(cfg.resolved_split_ratio(false) == 0.6);
  CHECK(cfg.resolved_split_ratio(true) == 0.6);
  set_config_value(cfg, "selection.split_ratio", "1");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  set_config_value(cfg, "selection.split_ratio", "auto");
  CHECK_FALSE(cfg.split_ratio.has_value());
}

TEST_CASE("config files load from disk") {
  const auto dir = testing::temp_dir("config");
  const std::string path = (dir / "exp.cfg").string();
  std::ofstream(path) << "[experiment]\noutput_dir = out\n[data]\nmode = x\n";
  try {
    load_config_file(path);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(path + ":4:") == 0);
  }
  CHECK_THROWS_AS(load_config_file((dir / "missing.cfg").string()), ConfigError);
}
