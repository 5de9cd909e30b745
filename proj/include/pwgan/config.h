#ifndef PWGAN_CONFIG_H_
#define PWGAN_CONFIG_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pwgan/data.h"
#include "pwgan/errors.h"
#include "pwgan/selection.h"
#include "pwgan/simgen.h"

namespace pwgan {

enum class DataMode { kSimulate, kIngest };
DataMode parse_data_mode(const std::string& text);
std::string to_string(DataMode m);

// Everything one experiment needs. Field defaults are the documented
// defaults; see config_keys() for the key names used in files and flags.
struct ExperimentConfig {
  // [experiment]
  DataMode mode = DataMode::kSimulate;
  std::size_t replicates = 1;
  std::uint64_t base_seed = 1;
  std::string output_dir = "pwgan_out";
  std::size_t workers = 1;
  long checkpoint_every = 0;
  bool oracle = false;  // stage 2 on the true S*, skipping stage 1

  // [data]
  SimModel model = SimModel::kM1;
  std::size_t p = 100;
  std::optional<std::size_t> p_s;      // 30 when unset
  std::optional<std::size_t> n_train;  // model default when unset
  std::size_t n_val = 100;
  std::size_t n_test = 1000;
  std::uint64_t m4_seed = 20240101;
  std::string train_path;
  std::string val_path;
  std::string test_path;
  std::optional<Schema> schema;  // from the CSV header when unset
  std::vector<std::size_t> truth;  // 1-based; ingest mode only

  // [generator], [discriminator], [stage1], [stage2], [selection]
  PipelineConfig pipeline;  // pipeline.split.ratio is set from split_ratio
  std::optional<double> split_ratio;  // auto when unset

  // split_ratio, or the auto choice: 0.3 for continuous data, 0.5 for
  // survival data, where stage 1 needs more events to rank columns.
  double resolved_split_ratio(bool survival) const;

  // [evaluation]
  std::size_t predict_draws = 50;
  std::size_t distribution_draws = 500;
  std::vector<double> quantile_levels = {0.25, 0.5, 0.75};

  // Sample-size spec for one replicate in simulate mode.
  SimModelSpec sim_spec(std::uint64_t seed) const;
  // Throws ConfigError.
  void validate() const;
};

struct ConfigKey {
  std::string name;  // "section.key"
  std::string help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

// Every settable key, in manifest order.
const std::vector<ConfigKey>& config_keys();

// Sets `name` ("section.key") from text. Throws ConfigError for an unknown
// key or a malformed value.
void set_config_value(ExperimentConfig& cfg, const std::string& name,
                      const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg,
                             const std::string& name);

// Grammar: one "key = value" per line; "[section]" headers prefix later keys
// with "section."; '#' starts a comment; blank lines are ignored. Keys may
// also be written fully qualified. Errors name the source and line.
void apply_config_text(ExperimentConfig& cfg, const std::string& text,
                       const std::string& source = "<config>");
ExperimentConfig load_config_file(const std::string& path);

// "section.key = value" lines for every key, grouped by section.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace pwgan

#endif  // PWGAN_CONFIG_H_
