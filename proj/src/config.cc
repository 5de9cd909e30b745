#include "pwgan/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace pwgan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text +
                      "'");
  }
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
  return static_cast<std::size_t>(parse_u64(key, text));
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key,
                                  const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_double(key, s));
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& key,
                                     const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(text)) out.push_back(parse_size(key, s));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

// Wraps parsers that throw std::invalid_argument into ConfigError.
template <typename F>
auto checked(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void add_arch_keys(std::vector<ConfigKey>& keys, const std::string& section,
                   ArchSpec PipelineConfig::*arch) {
  keys.push_back(
      {section + ".hidden", "hidden layer widths, comma separated",
       [=](ExperimentConfig& c, const std::string& v) {
         auto w = parse_sizes(section + ".hidden", v);
         if (w.empty()) throw ConfigError(section + ".hidden: empty list");
         (c.pipeline.*arch).hidden_widths = std::move(w);
       },
       [=](const ExperimentConfig& c) {
         return join((c.pipeline.*arch).hidden_widths);
       }});
  keys.push_back({section + ".activation", "relu or leaky_relu(slope)",
                  [=](ExperimentConfig& c, const std::string& v) {
                    (c.pipeline.*arch).activation = checked(
                        section + ".activation", [&] { return Activation::parse(v); });
                  },
                  [=](const ExperimentConfig& c) {
                    return (c.pipeline.*arch).activation.name();
                  }});
  keys.push_back({section + ".init", "he_normal or zeros",
                  [=](ExperimentConfig& c, const std::string& v) {
                    (c.pipeline.*arch).init = checked(
                        section + ".init", [&] { return parse_init_scheme(v); });
                  },
                  [=](const ExperimentConfig& c) {
                    return to_string((c.pipeline.*arch).init);
                  }});
}

void add_train_keys(std::vector<ConfigKey>& keys, const std::string& section,
                    TrainConfig PipelineConfig::*tc, bool penalized) {
  auto num = [&](const std::string& key, const std::string& help,
                 double TrainConfig::*field) {
    const std::string name = section + "." + key;
    keys.push_back({name, help,
                    [=](ExperimentConfig& c, const std::string& v) {
                      (c.pipeline.*tc).*field = parse_double(name, v);
                    },
                    [=](const ExperimentConfig& c) {
                      return fmt((c.pipeline.*tc).*field);
                    }});
  };
  auto count = [&](const std::string& key, const std::string& help,
                   std::size_t TrainConfig::*field) {
    const std::string name = section + "." + key;
    keys.push_back({name, help,
                    [=](ExperimentConfig& c, const std::string& v) {
                      (c.pipeline.*tc).*field = parse_size(name, v);
                    },
                    [=](const ExperimentConfig& c) {
                      return std::to_string((c.pipeline.*tc).*field);
                    }});
  };
  count("batch_size", "minibatch size n_b", &TrainConfig::batch_size);
  num("clip", "critic weight clipping bound c", &TrainConfig::clip);
  count("noise_dim", "generator noise dimension m", &TrainConfig::noise_dim);
  num("lr_f", "critic RMSProp learning rate", &TrainConfig::lr_f);
  num("lr_g", "generator RMSProp learning rate", &TrainConfig::lr_g);
  {
    const std::string name = section + ".iterations";
    keys.push_back({name, "training iterations",
                    [=](ExperimentConfig& c, const std::string& v) {
                      (c.pipeline.*tc).iterations =
                          static_cast<long>(parse_u64(name, v));
                    },
                    [=](const ExperimentConfig& c) {
                      return std::to_string((c.pipeline.*tc).iterations);
                    }});
  }
  {
    const std::string name = section + ".critic_steps";
    keys.push_back({name, "critic updates per generator update",
                    [=](ExperimentConfig& c, const std::string& v) {
                      (c.pipeline.*tc).critic_steps_per_gen =
                          static_cast<int>(parse_u64(name, v));
                    },
                    [=](const ExperimentConfig& c) {
                      return std::to_string((c.pipeline.*tc).critic_steps_per_gen);
                    }});
  }
  num("rmsprop_decay", "RMSProp decay rho", &TrainConfig::rmsprop_decay);
  num("rmsprop_epsilon", "RMSProp epsilon", &TrainConfig::rmsprop_epsilon);
  if (penalized) {
    const std::string name = section + ".prox_mode";
    keys.push_back({name, "adaptive, proximal or subgradient",
                    [=](ExperimentConfig& c, const std::string& v) {
                      (c.pipeline.*tc).prox_mode =
                          checked(name, [&] { return parse_prox_mode(v); });
                    },
                    [=](const ExperimentConfig& c) {
                      return to_string((c.pipeline.*tc).prox_mode);
                    }});
  }
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> k;
  k.push_back({"experiment.mode", "simulate or ingest",
               [](ExperimentConfig& c, const std::string& v) {
                 c.mode = parse_data_mode(v);
               },
               [](const ExperimentConfig& c) { return to_string(c.mode); }});
  k.push_back({"experiment.replicates", "number of independent replicates",
               [](ExperimentConfig& c, const std::string& v) {
                 c.replicates = parse_size("experiment.replicates", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.replicates); }});
  k.push_back({"experiment.base_seed", "replicate k uses derive_seed(base_seed, k)",
               [](ExperimentConfig& c, const std::string& v) {
                 c.base_seed = parse_u64("experiment.base_seed", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.base_seed); }});
  k.push_back({"experiment.output_dir", "directory for all outputs",
               [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
               [](const ExperimentConfig& c) { return c.output_dir; }});
  k.push_back({"experiment.workers", "replicates run concurrently",
               [](ExperimentConfig& c, const std::string& v) {
                 c.workers = parse_size("experiment.workers", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.workers); }});
  k.push_back({"experiment.checkpoint_every",
               "stage-1 checkpoint interval in iterations (0 = final only)",
               [](ExperimentConfig& c, const std::string& v) {
                 c.checkpoint_every =
                     static_cast<long>(parse_u64("experiment.checkpoint_every", v));
               },
               [](const ExperimentConfig& c) {
                 return std::to_string(c.checkpoint_every);
               }});
  k.push_back({"experiment.oracle", "train stage 2 on the true S* only",
               [](ExperimentConfig& c, const std::string& v) {
                 c.oracle = parse_bool("experiment.oracle", v);
               },
               [](const ExperimentConfig& c) {
                 return std::string(c.oracle ? "true" : "false");
               }});

  k.push_back({"data.model", "M1..M6 (simulate mode)",
               [](ExperimentConfig& c, const std::string& v) {
                 c.model = checked("data.model", [&] { return parse_sim_model(v); });
               },
               [](const ExperimentConfig& c) { return to_string(c.model); }});
  k.push_back({"data.p", "number of predictors (simulate mode)",
               [](ExperimentConfig& c, const std::string& v) {
                 c.p = parse_size("data.p", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.p); }});
  k.push_back({"data.p_s", "number of important predictors, or auto (30)",
               [](ExperimentConfig& c, const std::string& v) {
                 if (v == "auto") {
                   c.p_s.reset();
                 } else {
                   c.p_s = parse_size("data.p_s", v);
                 }
               },
               [](const ExperimentConfig& c) {
                 return c.p_s ? std::to_string(*c.p_s) : std::string("auto");
               }});
  k.push_back({"data.n_train", "training sample size, or auto (model default)",
               [](ExperimentConfig& c, const std::string& v) {
                 if (v == "auto") {
                   c.n_train.reset();
                 } else {
                   c.n_train = parse_size("data.n_train", v);
                 }
               },
               [](const ExperimentConfig& c) {
                 return c.n_train ? std::to_string(*c.n_train) : std::string("auto");
               }});
  k.push_back({"data.n_val", "validation sample size (simulate mode)",
               [](ExperimentConfig& c, const std::string& v) {
                 c.n_val = parse_size("data.n_val", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.n_val); }});
  k.push_back({"data.n_test", "test sample size (simulate mode)",
               [](ExperimentConfig& c, const std::string& v) {
                 c.n_test = parse_size("data.n_test", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.n_test); }});
  k.push_back({"data.m4_seed", "seed of M4's fixed network",
               [](ExperimentConfig& c, const std::string& v) {
                 c.m4_seed = parse_u64("data.m4_seed", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.m4_seed); }});
  k.push_back({"data.train_path", "training CSV (ingest mode)",
               [](ExperimentConfig& c, const std::string& v) { c.train_path = v; },
               [](const ExperimentConfig& c) { return c.train_path; }});
  k.push_back({"data.val_path", "optional validation CSV (ingest mode)",
               [](ExperimentConfig& c, const std::string& v) { c.val_path = v; },
               [](const ExperimentConfig& c) { return c.val_path; }});
  k.push_back({"data.test_path", "optional test CSV (ingest mode)",
               [](ExperimentConfig& c, const std::string& v) { c.test_path = v; },
               [](const ExperimentConfig& c) { return c.test_path; }});
  k.push_back({"data.schema", "continuous, survival, or auto (from the header)",
               [](ExperimentConfig& c, const std::string& v) {
                 if (v == "auto") {
                   c.schema.reset();
                 } else {
                   c.schema = checked("data.schema", [&] { return parse_schema(v); });
                 }
               },
               [](const ExperimentConfig& c) {
                 return c.schema ? to_string(*c.schema) : std::string("auto");
               }});
  k.push_back({"data.truth",
               "known important predictors, 1-based, comma separated (ingest mode)",
               [](ExperimentConfig& c, const std::string& v) {
                 c.truth = parse_sizes("data.truth", v);
               },
               [](const ExperimentConfig& c) { return join(c.truth); }});

  add_arch_keys(k, "generator", &PipelineConfig::generator);
  add_arch_keys(k, "discriminator", &PipelineConfig::discriminator);

  k.push_back({"stage1.lambda_grid", "candidate lambda0 values, comma separated",
               [](ExperimentConfig& c, const std::string& v) {
                 auto g = parse_doubles("stage1.lambda_grid", v);
                 if (g.empty()) throw ConfigError("stage1.lambda_grid: empty list");
                 c.pipeline.lambda_grid = std::move(g);
               },
               [](const ExperimentConfig& c) { return join(c.pipeline.lambda_grid); }});
  k.push_back({"stage1.scale_lambda",
               "lambda_n = lambda0 * n1^(-1/(2(p+1))) when true, else lambda0",
               [](ExperimentConfig& c, const std::string& v) {
                 c.pipeline.scale_lambda = parse_bool("stage1.scale_lambda", v);
               },
               [](const ExperimentConfig& c) {
                 return std::string(c.pipeline.scale_lambda ? "true" : "false");
               }});
  add_train_keys(k, "stage1", &PipelineConfig::stage1, true);
  add_train_keys(k, "stage2", &PipelineConfig::stage2, false);

  k.push_back({"selection.rule", "auto, relative or absolute",
               [](ExperimentConfig& c, const std::string& v) {
                 if (v == "auto") {
                   c.pipeline.rule.reset();
                 } else if (v == "relative") {
                   c.pipeline.rule = SelectionRule::relative(
                       c.pipeline.rule ? c.pipeline.rule->value : 0.1);
                 } else if (v == "absolute") {
                   c.pipeline.rule = SelectionRule::absolute(
                       c.pipeline.rule ? c.pipeline.rule->value : 1e-6);
                 } else {
                   throw ConfigError("selection.rule: unknown rule '" + v + "'");
                 }
               },
               [](const ExperimentConfig& c) {
                 if (!c.pipeline.rule) return std::string("auto");
                 return std::string(c.pipeline.rule->mode ==
                                            SelectionRule::Mode::kRelative
                                        ? "relative"
                                        : "absolute");
               }});
  k.push_back({"selection.threshold",
               "tau for the relative rule, c for the absolute rule, or auto",
               [](ExperimentConfig& c, const std::string& v) {
                 if (v == "auto") {
                   c.pipeline.rule.reset();
                   return;
                 }
                 const double t = parse_double("selection.threshold", v);
                 const auto mode = c.pipeline.resolved_rule().mode;
                 c.pipeline.rule = mode == SelectionRule::Mode::kRelative
                                       ? SelectionRule::relative(t)
                                       : SelectionRule::absolute(t);
               },
               [](const ExperimentConfig& c) {
                 return c.pipeline.rule ? fmt(c.pipeline.rule->value)
                                        : std::string("auto");
               }});
  k.push_back({"selection.split_ratio",
               "fraction of the training data used by stage 1, or auto "
               "(0.3 continuous, 0.5 survival)",
               [](ExperimentConfig& c, const std::string& v) {
                 if (v == "auto") {
                   c.split_ratio.reset();
                 } else {
                   c.split_ratio = parse_double("selection.split_ratio", v);
                 }
               },
               [](const ExperimentConfig& c) {
                 return c.split_ratio ? fmt(*c.split_ratio) : std::string("auto");
               }});
  k.push_back({"selection.internal_validation_ratio",
               "share of stage-1 data held out for lambda choice without a validation set",
               [](ExperimentConfig& c, const std::string& v) {
                 c.pipeline.internal_validation_ratio =
                     parse_double("selection.internal_validation_ratio", v);
               },
               [](const ExperimentConfig& c) {
                 return fmt(c.pipeline.internal_validation_ratio);
               }});

  k.push_back({"evaluation.predict_draws", "noise draws J per point prediction",
               [](ExperimentConfig& c, const std::string& v) {
                 c.predict_draws = parse_size("evaluation.predict_draws", v);
               },
               [](const ExperimentConfig& c) { return std::to_string(c.predict_draws); }});
  k.push_back({"evaluation.distribution_draws",
               "noise draws J per conditional mean/sd/quantile estimate",
               [](ExperimentConfig& c, const std::string& v) {
                 c.distribution_draws = parse_size("evaluation.distribution_draws", v);
               },
               [](const ExperimentConfig& c) {
                 return std::to_string(c.distribution_draws);
               }});
  k.push_back({"evaluation.quantiles", "quantile levels scored, comma separated",
               [](ExperimentConfig& c, const std::string& v) {
                 c.quantile_levels = parse_doubles("evaluation.quantiles", v);
               },
               [](const ExperimentConfig& c) { return join(c.quantile_levels); }});
  return k;
}

}  // namespace

DataMode parse_data_mode(const std::string& text) {
  if (text == "simulate") return DataMode::kSimulate;
  if (text == "ingest") return DataMode::kIngest;
  throw ConfigError("unknown mode '" + text + "' (simulate or ingest)");
}

std::string to_string(DataMode m) {
  return m == DataMode::kSimulate ? "simulate" : "ingest";
}

double ExperimentConfig::resolved_split_ratio(bool survival) const {
  if (split_ratio) return *split_ratio;
  return survival ? 0.5 : 0.3;
}

SimModelSpec ExperimentConfig::sim_spec(std::uint64_t seed) const {
  SimModelSpec s = SimModelSpec::defaults(model, p);
  if (p_s) s.p_s = *p_s;
  if (n_train) s.n_train = *n_train;
  s.n_val = n_val;
  s.n_test = n_test;
  s.m4_seed = m4_seed;
  s.seed = seed;
  return s;
}

void ExperimentConfig::validate() const {
  if (replicates == 0) throw ConfigError("experiment.replicates must be >= 1");
  if (workers == 0) throw ConfigError("experiment.workers must be >= 1");
  if (output_dir.empty()) throw ConfigError("experiment.output_dir is empty");
  if (mode == DataMode::kSimulate) {
    checked("data", [&] {
      sim_spec(base_seed).validate();
      return 0;
    });
  } else if (train_path.empty()) {
    throw ConfigError("ingest mode needs data.train_path");
  }
  if (oracle && mode == DataMode::kIngest && truth.empty()) {
    throw ConfigError("experiment.oracle in ingest mode needs data.truth");
  }
  for (std::size_t j : truth) {
    if (j == 0) throw ConfigError("data.truth indices are 1-based");
  }
  if (pipeline.lambda_grid.empty()) throw ConfigError("stage1.lambda_grid is empty");
  for (double l : pipeline.lambda_grid) {
    if (!(l >= 0.0)) throw ConfigError("stage1.lambda_grid values must be >= 0");
  }
  if (split_ratio && !(*split_ratio > 0.0 && *split_ratio < 1.0)) {
    throw ConfigError("selection.split_ratio must lie in (0, 1)");
  }
  if (!(pipeline.internal_validation_ratio > 0.0 &&
        pipeline.internal_validation_ratio < 1.0)) {
    throw ConfigError("selection.internal_validation_ratio must lie in (0, 1)");
  }
  if (predict_draws == 0 || distribution_draws == 0) {
    throw ConfigError("evaluation draw counts must be >= 1");
  }
  for (double t : quantile_levels) {
    if (!(t > 0.0 && t < 1.0)) {
      throw ConfigError("evaluation.quantiles must lie in (0, 1)");
    }
  }
  // Batch sizes against sample sizes are checked when training starts; the
  // other TrainConfig fields can be checked now.
  auto check_train = [](const TrainConfig& t, const std::string& section) {
    TrainConfig probe = t;
    probe.batch_size = 1;
    checked(section, [&] {
      probe.validate(1);
      return 0;
    });
    if (t.batch_size == 0) throw ConfigError(section + ".batch_size must be >= 1");
  };
  check_train(pipeline.stage1, "stage1");
  check_train(pipeline.stage2, "stage2");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

namespace {

const ConfigKey& find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& name,
                      const std::string& value) {
  find_key(name).set(cfg, trim(value));
}

std::string get_config_value(const ExperimentConfig& cfg,
                             const std::string& name) {
  return find_key(name).get(cfg);
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text,
                       const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(where + "malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      if (section.empty()) {
        throw ConfigError(where + "key '" + key + "' outside any section");
      }
      key = section + "." + key;
    }
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg;
  apply_config_text(cfg, buf.str(), path);
  return cfg;
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : config_keys()) {
    const auto dot = k.name.find('.');
    const std::string s = k.name.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out += "\n";
      out += "[" + s + "]\n";
      section = s;
    }
    out += k.name.substr(dot + 1) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

}  // namespace pwgan
