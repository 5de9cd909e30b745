#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pwgan/experiment.h"
#include "test_support.h"

using namespace pwgan;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(const std::string& out) {
  ExperimentConfig cfg;
  apply_config_text(cfg, R"(
[experiment]
replicates = 2
base_seed = 11
[data]
model = M1
p = 8
p_s = 2
n_train = 300
n_val = 50
n_test = 100
[generator]
hidden = 8,4
[discriminator]
hidden = 8,4
[stage1]
iterations = 60
batch_size = 32
[stage2]
iterations = 60
batch_size = 32
[evaluation]
predict_draws = 10
distribution_draws = 20
)");
  cfg.output_dir = out;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("replicate seeds are a pure function of base seed and index") {
  CHECK(replicate_seed(11, 1) == derive_seed(11, 1));
  CHECK(replicate_seed(11, 2) != replicate_seed(11, 1));
  CHECK(replicate_seed(12, 1) != replicate_seed(11, 1));
}

TEST_CASE("aggregate layout") {
  MetricTable t;
  t.add("mse", 1.5);
  t.add("mse", 1.7);
  t.add("tpr", 1.0);
  t.add("tpr", 1.0);
  t.add("fpr", 0.0);
  t.add("fpr", 0.0);
  t.add("q0.5_mse", 0.25);
  t.add("q0.5_mse", 0.35);
  const std::string csv = aggregate_csv({"M2", 100, 10000, 2}, t);
  CHECK(csv ==
        "setting,p,n,replicates,MSE/C-idx,TPR,FPR,mean-MSE,sd-MSE,q0.5-MSE\n"
        "M2,100,10000,2,1.60(0.14),1.00(0.00),0.00(0.00),-,-,0.30(0.07)\n");
  MetricTable c;
  c.add("c_index", 0.9);
  CHECK(aggregate_csv({"M5", 100, 2000, 1}, c).find("M5,100,2000,1,0.90(0.00)") !=
        std::string::npos);
  CHECK(format_mean_sd({0.126, 0.0051, 2}) == "0.13(0.01)");
}

TEST_CASE("one replicate: the aggregate is that run") {
  const auto dir = testing::temp_dir("exp_single");
  ExperimentConfig cfg = tiny(dir.string());
  cfg.replicates = 1;
  const ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.replicates.size() == 1);
  const ReplicateResult& one = r.replicates[0];
  CHECK(one.index == 1);
  CHECK(one.seed == replicate_seed(11, 1));
  CHECK(one.n_train == 300);
  for (const auto& [name, v] : one.metrics) {
    CHECK(r.table.summary(name).mean == v);
    CHECK(r.table.summary(name).sd == 0.0);
  }
  for (const char* m : {"mse", "tpr", "fpr", "mean_mse", "sd_mse", "q0.25_mse", "q0.5_mse", "q0.75_mse"})
    CHECK(one.metrics.count(m) == 1);
  for (const char* t : {"data", "stage1", "stage2", "evaluate"}) CHECK(one.timings.count(t) == 1);

  for (const char* f : {"manifest.json", "replicate_1.json", "aggregate.csv",
                        "timings_1.json", "loss_trace_1.csv", "loss_trace_1_stage2.csv",
                        "checkpoints/replicate_1_stage1_generator.txt",
                        "checkpoints/replicate_1_stage2_generator.txt",
                        "checkpoints/replicate_1_stage2_discriminator.txt"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto rep = nlohmann::json::parse(slurp(dir / "replicate_1.json"));
  std::vector<std::size_t> selected = rep.at("selection").at("selected");
  for (std::size_t j : selected) CHECK(j >= 1);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  for (const auto& key : config_keys()) CHECK(manifest.at("config").contains(key.name));
}

TEST_CASE("identical manifests give identical bytes at any worker count") {
  const auto a = testing::temp_dir("exp_a");
  const auto b = testing::temp_dir("exp_b");
  ExperimentConfig ca = tiny(a.string());
  ExperimentConfig cb = tiny(b.string());
  cb.workers = 2;
  const ExperimentResult ra = run_experiment(ca);
  const ExperimentResult rb = run_experiment(cb);
  CHECK(slurp(a / "aggregate.csv") == slurp(b / "aggregate.csv"));
  CHECK(slurp(a / "replicate_2.json") == slurp(b / "replicate_2.json"));
  CHECK(slurp(a / "loss_trace_1.csv") == slurp(b / "loss_trace_1.csv"));
  CHECK(ra.replicates[1].metrics == rb.replicates[1].metrics);
  CHECK(ra.replicates[0].seed != ra.replicates[1].seed);

  // the report command rebuilds the same aggregate from the replicate files
  const auto [label, table] = load_experiment_metrics(a.string());
  CHECK(aggregate_csv(label, table) == slurp(a / "aggregate.csv"));
}

TEST_CASE("a single replicate does not depend on its siblings") {
  ExperimentConfig cfg = tiny("unused");
  const ReplicateResult alone = run_replicate(cfg, 2);
  const ExperimentResult all = run_experiment(cfg, false);
  CHECK(alone.metrics == all.replicates[1].metrics);
  CHECK(alone.report.selected == all.replicates[1].report.selected);
}

TEST_CASE("ingest mode reads CSV files and scores against given truth") {
  const auto dir = testing::temp_dir("exp_ingest");
  ExperimentConfig sim = tiny(dir.string());
  const SimDataset d = generate(sim.sim_spec(5));
  write_csv((dir / "train.csv").string(), d.train);
  write_csv((dir / "val.csv").string(), d.val);
  write_csv((dir / "test.csv").string(), d.test);

  ExperimentConfig cfg = tiny((dir / "out").string());
  cfg.replicates = 1;
  set_config_value(cfg, "experiment.mode", "ingest");
  set_config_value(cfg, "data.train_path", (dir / "train.csv").string());
  set_config_value(cfg, "data.val_path", (dir / "val.csv").string());
  set_config_value(cfg, "data.test_path", (dir / "test.csv").string());
  set_config_value(cfg, "data.truth", "1,2");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.label.setting == "ingest");
  CHECK(r.label.p == 8);
  CHECK(r.replicates[0].metrics.count("tpr") == 1);
  CHECK(r.replicates[0].metrics.count("mse") == 1);
  CHECK(r.replicates[0].metrics.count("mean_mse") == 0);

  set_config_value(cfg, "data.train_path", (dir / "nothing.csv").string());
  CHECK_THROWS_AS(run_experiment(cfg), ParseError);
}

TEST_CASE("oracle mode trains stage 2 on the true set") {
  ExperimentConfig cfg = tiny("unused");
  cfg.oracle = true;
  const ReplicateResult r = run_replicate(cfg, 1);
  CHECK(r.report.selected == std::vector<std::size_t>{0, 1});
  CHECK(r.metrics.at("tpr") == 1.0);
  CHECK(r.metrics.at("fpr") == 0.0);
}

TEST_CASE("survival replicates report a c-index and censoring") {
  ExperimentConfig cfg = tiny("unused");
  set_config_value(cfg, "data.model", "M5");
  const ReplicateResult r = run_replicate(cfg, 1);
  CHECK(r.metrics.count("c_index") == 1);
  CHECK(r.metrics.count("mse") == 0);
  CHECK(r.metrics.at("censoring_rate") > 0.0);
  CHECK(r.metrics.at("censoring_rate") < 1.0);
}
