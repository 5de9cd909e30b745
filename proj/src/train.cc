#include "pwgan/train.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "pwgan/autodiff.h"
#include "pwgan/optimizer.h"
#include "pwgan/rng.h"
#include "pwgan/survival.h"

namespace pwgan {
namespace {

// Sub-stream ids under TrainConfig::seed.
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kGeneratorInit = 3;
constexpr std::uint64_t kDiscriminatorInit = 4;

// Minibatches without replacement within an epoch; a new shuffled epoch starts
// when fewer than batch_size unused samples remain.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, Rng& rng)
      : n_(n), batch_(batch), rng_(rng) {}

  std::vector<std::size_t> next() {
    if (perm_.empty() || pos_ + batch_ > n_) {
      perm_ = rng_.permutation(n_);
      pos_ = 0;
    }
    std::vector<std::size_t> rows(perm_.begin() + pos_,
                                  perm_.begin() + pos_ + batch_);
    pos_ += batch_;
    return rows;
  }

 private:
  std::size_t n_;
  std::size_t batch_;
  Rng& rng_;
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
};

struct Batch {
  Matrix x;  // p x nb
  Matrix y;  // 1 x nb
  Matrix z;  // m x nb
  std::vector<double> real_weights;
};

Batch draw_batch(const Dataset& data, BatchSampler& sampler, Rng& noise,
                 std::size_t m) {
  const auto rows = sampler.next();
  Batch b{data.predictors_t(rows), data.responses_row(rows),
          noise.normal_matrix(m, rows.size()), {}};
  if (data.is_survival()) {
    std::vector<double> y(rows.size());
    std::vector<int> d(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      y[k] = data.y[rows[k]];
      d[k] = data.delta[rows[k]];
    }
    b.real_weights = km_weights(y, d).aligned();
  } else {
    b.real_weights.assign(rows.size(), 1.0 / static_cast<double>(rows.size()));
  }
  return b;
}

// Critic input for fake and real samples side by side: [x x; fake y].
Matrix critic_input_response(const Matrix& fake, const Matrix& y) {
  Matrix out(1, fake.cols() + y.cols());
  auto o = out.values();
  std::copy(fake.values().begin(), fake.values().end(), o.begin());
  std::copy(y.values().begin(), y.values().end(), o.begin() + fake.cols());
  return out;
}

Matrix repeat_columns(const Matrix& x) {
  Matrix out(x.rows(), 2 * x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto src = x.row_span(r);
    auto dst = out.row_span(r);
    std::copy(src.begin(), src.end(), dst.begin());
    std::copy(src.begin(), src.end(), dst.begin() + x.cols());
  }
  return out;
}

// Objective weights over the concatenated [fake, real] critic outputs.
std::vector<double> objective_weights(std::size_t nb,
                                      std::span<const double> real) {
  std::vector<double> w(2 * nb, 1.0 / static_cast<double>(nb));
  for (std::size_t k = 0; k < nb; ++k) w[nb + k] = -real[k];
  return w;
}

std::vector<Matrix> collect_grads(const Tape& tape, std::span<const Var> vars,
                                  std::size_t count) {
  std::vector<Matrix> grads;
  grads.reserve(count);
  for (std::size_t k = 0; k < count; ++k) grads.push_back(tape.grad(vars[k]));
  return grads;
}

// One critic ascent step. Returns the un-penalized objective on the batch
// before the update.
double critic_step(const GeneratorNet& gen, DiscriminatorNet& disc,
                   const Batch& b, RmsProp& opt, double clip) {
  const std::size_t nb = b.x.cols();
  Tape tape;
  const Matrix fake = gen.forward_batch(b.x, b.z);
  Var x = tape.constant(repeat_columns(b.x));
  Var y = tape.constant(critic_input_response(fake, b.y));
  std::vector<Var> params;
  Var out = disc.forward(tape, x, y, params);
  const auto w = objective_weights(nb, b.real_weights);
  Var loss = weighted_sum(out, w);
  const double value = loss.value()[0];
  tape.backward(loss);
  auto ptrs = disc.mlp().parameters();
  const auto grads = collect_grads(tape, params, ptrs.size());
  opt.step(ptrs, grads, Direction::kAscend);
  clip_params(disc, clip);
  return value;
}

void generator_step(GeneratorNet& gen, const DiscriminatorNet& disc,
                    const Batch& b, RmsProp& opt, const TrainConfig& cfg,
                    double lambda, const TrainHooks& hooks, long it) {
  Tape tape;
  Var x = tape.constant(b.x);
  Var z = tape.constant(b.z);
  std::vector<Var> gparams;
  Var fake = gen.forward(tape, x, z, gparams);
  std::vector<Var> dparams;
  Var out = disc.forward(tape, x, fake, dparams);
  Var loss = mean(out);
  tape.backward(loss);
  auto ptrs = gen.mlp().parameters();
  auto grads = collect_grads(tape, gparams, ptrs.size());
  if (hooks.on_generator_grad) hooks.on_generator_grad(it, grads.front());
  if (hooks.zero_generator_gradients) {
    for (Matrix& g : grads) g.fill(0.0);
  }
  if (lambda > 0.0 && cfg.prox_mode == ProxMode::kSubgradient) {
    axpy(1.0, penalty_subgradient(gen, lambda), grads.front());
  }
  opt.step(ptrs, grads, Direction::kDescend);
  if (lambda > 0.0 && cfg.prox_mode == ProxMode::kProximal) {
    apply_group_prox(gen, cfg.lr_g * lambda);
  } else if (lambda > 0.0 && cfg.prox_mode == ProxMode::kAdaptive) {
    apply_group_prox(gen, adaptive_thresholds(gen, opt.accumulators().front(),
                                              cfg.lr_g, lambda,
                                              cfg.rmsprop_epsilon));
  }
}

TrainedPair train_loop(const Dataset& data, const ArchSpec& arch_g,
                       const ArchSpec& arch_f, const TrainConfig& cfg,
                       double lambda, const TrainHooks& hooks) {
  data.validate();
  cfg.validate(data.size());
  const std::size_t p = data.predictors();
  TrainedPair out{
      GeneratorNet::init(p, cfg.noise_dim, arch_g.hidden_widths,
                         arch_g.activation,
                         derive_seed(cfg.seed, kGeneratorInit), arch_g.init),
      DiscriminatorNet::init(p, arch_f.hidden_widths, arch_f.activation,
                             derive_seed(cfg.seed, kDiscriminatorInit),
                             arch_f.init),
      {},
      {}};
  GeneratorNet& gen = out.generator;
  DiscriminatorNet& disc = out.discriminator;
  clip_params(disc, cfg.clip);

  Rng batch_rng(derive_seed(cfg.seed, kBatchStream));
  Rng noise_rng(derive_seed(cfg.seed, kNoiseStream));
  BatchSampler sampler(data.size(), cfg.batch_size, batch_rng);
  RmsProp opt_f(cfg.lr_f, cfg.rmsprop_decay, cfg.rmsprop_epsilon);
  RmsProp opt_g(cfg.lr_g, cfg.rmsprop_decay, cfg.rmsprop_epsilon);
  out.loss_trace.reserve(static_cast<std::size_t>(cfg.iterations));
  out.penalty_trace.reserve(static_cast<std::size_t>(cfg.iterations));

  for (long it = 1; it <= cfg.iterations; ++it) {
    Batch batch;
    double objective = 0.0;
    try {
      for (int k = 0; k < cfg.critic_steps_per_gen; ++k) {
        batch = draw_batch(data, sampler, noise_rng, cfg.noise_dim);
        const double value = critic_step(gen, disc, batch, opt_f, cfg.clip);
        if (k == 0) objective = value;
        for (const Matrix* m : disc.mlp().parameters()) {
          if (m->max_abs() > cfg.clip) {
            throw ContractError("critic parameter escaped the clip bound");
          }
        }
        if (hooks.after_critic) hooks.after_critic(it, disc);
      }
    } catch (const NumericError& e) {
      throw TrainingError(it, "discriminator", e.what());
    }
    double pen = 0.0;
    if (lambda > 0.0 && cfg.prox_mode != ProxMode::kAdaptive) {
      pen = penalty_value(gen, lambda);
    } else if (lambda > 0.0 && !opt_g.accumulators().empty()) {
      pen = penalty_value(
          gen, lambda * adaptive_gradient_scale(gen, opt_g.accumulators().front()));
    }
    objective += pen;
    if (!std::isfinite(objective)) {
      throw TrainingError(it, "discriminator", "non-finite objective");
    }
    out.loss_trace.push_back(objective);
    out.penalty_trace.push_back(pen);
    try {
      generator_step(gen, disc, batch, opt_g, cfg, lambda, hooks, it);
    } catch (const NumericError& e) {
      throw TrainingError(it, "generator", e.what());
    }
    if (hooks.checkpoint_every > 0 && hooks.on_checkpoint &&
        it % hooks.checkpoint_every == 0) {
      hooks.on_checkpoint(it, gen, disc);
    }
  }
  return out;
}

}  // namespace

void TrainConfig::validate(std::size_t n) const {
  if (!(lambda_n >= 0.0)) throw ConfigError("lambda_n must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (batch_size > n) {
    throw ConfigError("batch_size " + std::to_string(batch_size) +
                      " exceeds the " + std::to_string(n) +
                      " available training samples");
  }
  if (!(clip > 0.0)) throw ConfigError("clip must be > 0");
  if (noise_dim == 0) throw ConfigError("noise_dim must be >= 1");
  if (!(lr_f > 0.0) || !(lr_g > 0.0)) {
    throw ConfigError("learning rates must be > 0");
  }
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (critic_steps_per_gen < 1) {
    throw ConfigError("critic_steps_per_gen must be >= 1");
  }
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) {
    throw ConfigError("rmsprop_decay must lie in (0, 1)");
  }
  if (!(rmsprop_epsilon > 0.0)) throw ConfigError("rmsprop_epsilon must be > 0");
}

TrainingError::TrainingError(long iteration, const std::string& net,
                             const std::string& what)
    : NumericError("iteration " + std::to_string(iteration) + ", " + net +
                   ": " + what),
      iteration_(iteration),
      net_(net) {}

double stage1_objective(const GeneratorNet& gen, const DiscriminatorNet& disc,
                        const Matrix& x, const Matrix& y, const Matrix& z,
                        std::span<const double> weights, double lambda) {
  const std::size_t n = x.cols();
  if (n == 0) throw DimensionError("stage1_objective: empty batch");
  if (!weights.empty() && weights.size() != n) {
    throw DimensionError("stage1_objective: " + std::to_string(weights.size()) +
                         " weights for a batch of " + std::to_string(n));
  }
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be >= 0");
  }
  const Matrix fake = disc.forward_batch(x, gen.forward_batch(x, z));
  const Matrix real = disc.forward_batch(x, y);
  double fake_mean = 0.0;
  for (double v : fake.values()) fake_mean += v;
  fake_mean /= static_cast<double>(n);
  double real_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = weights.empty() ? 1.0 / static_cast<double>(n) : weights[i];
    real_sum += u * real[i];
  }
  return fake_mean - real_sum + penalty_value(gen, lambda);
}

TrainedPair train_stage1(const Dataset& data, const ArchSpec& arch_g,
                         const ArchSpec& arch_f, const TrainConfig& cfg,
                         const TrainHooks& hooks) {
  return train_loop(data, arch_g, arch_f, cfg, cfg.lambda_n, hooks);
}

TrainedPair train_stage2(const Dataset& data,
                         std::span<const std::size_t> selected,
                         const ArchSpec& arch_g, const ArchSpec& arch_f,
                         const TrainConfig& cfg, const TrainHooks& hooks) {
  if (selected.empty()) {
    throw ConfigError("stage 2 needs a nonempty set of selected predictors");
  }
  return train_loop(data.select_columns(selected), arch_g, arch_f, cfg, 0.0,
                    hooks);
}

double scaled_lambda(double lambda0, std::size_t n, std::size_t p) {
  return lambda0 * std::pow(static_cast<double>(n),
                            -1.0 / (2.0 * (static_cast<double>(p) + 1.0)));
}

void write_loss_trace_csv(const std::string& path, const TrainedPair& pair) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "iteration,objective,penalty_value\n";
  for (std::size_t i = 0; i < pair.loss_trace.size(); ++i) {
    out << i + 1 << ',' << pair.loss_trace[i] << ',' << pair.penalty_trace[i]
        << '\n';
  }
}

}  // namespace pwgan
