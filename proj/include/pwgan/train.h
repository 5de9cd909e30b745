#ifndef PWGAN_TRAIN_H_
#define PWGAN_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwgan/data.h"
#include "pwgan/network.h"
#include "pwgan/penalty.h"

namespace pwgan {

// Hidden layers of a network whose input width is fixed by the data.
struct ArchSpec {
  std::vector<std::size_t> hidden_widths = {64, 32};
  Activation activation = Activation::relu();
  InitScheme init = InitScheme::kHeNormal;
};

struct TrainConfig {
  double lambda_n = 0.0;
  std::size_t batch_size = 64;
  double clip = 0.01;
  std::size_t noise_dim = 5;
  double lr_f = 1e-3;
  double lr_g = 1e-3;
  long iterations = 3000;
  int critic_steps_per_gen = 1;
  std::uint64_t seed = 1;
  ProxMode prox_mode = ProxMode::kAdaptive;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;

  // Throws ConfigError; `n` is the number of training samples.
  void validate(std::size_t n) const;
};

struct TrainedPair {
  GeneratorNet generator;
  DiscriminatorNet discriminator;
  // Per iteration: the objective on the critic batch before the critic update,
  // including the penalty term, and the penalty term alone. Under kAdaptive
  // the penalty weight is lambda * adaptive_gradient_scale(...).
  std::vector<double> loss_trace;
  std::vector<double> penalty_trace;
};

// Optional instrumentation for a training run.
struct TrainHooks {
  long checkpoint_every = 0;
  std::function<void(long iteration, const GeneratorNet&,
                     const DiscriminatorNet&)>
      on_checkpoint;
  // Called after every discriminator update (after clipping).
  std::function<void(long iteration, const DiscriminatorNet&)> after_critic;
  // Receives the data gradient of the generator's first-layer weight before
  // any penalty term is added.
  std::function<void(long iteration, const Matrix& grad_w0)> on_generator_grad;
  // Replaces every generator gradient by zero before the optimizer step.
  bool zero_generator_gradients = false;
};

// Non-finite loss or gradient during training.
class TrainingError : public NumericError {
 public:
  TrainingError(long iteration, const std::string& net, const std::string& what);
  long iteration() const { return iteration_; }
  const std::string& net() const { return net_; }

 private:
  long iteration_;
  std::string net_;
};

// (1/n) sum_i f(x_i, g(x_i, z_i)) - sum_i u_i f(x_i, y_i) + lambda * penalty,
// with u_i = 1/n when `weights` is empty. x is (p x n), y is 1 x n, z is m x n.
double stage1_objective(const GeneratorNet& gen, const DiscriminatorNet& disc,
                        const Matrix& x, const Matrix& y, const Matrix& z,
                        std::span<const double> weights, double lambda);

// Penalized alternating minimax training on `data`. For survival data the
// real-sample term uses Kaplan-Meier weights recomputed on every minibatch.
TrainedPair train_stage1(const Dataset& data, const ArchSpec& arch_g,
                         const ArchSpec& arch_f, const TrainConfig& cfg,
                         const TrainHooks& hooks = {});

// Un-penalized retraining on the predictor columns `selected` (0-based).
// cfg.lambda_n is ignored. Throws ConfigError on an empty selection.
TrainedPair train_stage2(const Dataset& data,
                         std::span<const std::size_t> selected,
                         const ArchSpec& arch_g, const ArchSpec& arch_f,
                         const TrainConfig& cfg, const TrainHooks& hooks = {});

// lambda0 * n^(-1 / (2 (p + 1))).
double scaled_lambda(double lambda0, std::size_t n, std::size_t p);

// Writes "iteration,objective,penalty_value" rows.
void write_loss_trace_csv(const std::string& path, const TrainedPair& pair);

}  // namespace pwgan

#endif  // PWGAN_TRAIN_H_
