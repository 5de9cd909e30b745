#ifndef PWGAN_SIMGEN_H_
#define PWGAN_SIMGEN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwgan/data.h"
#include "pwgan/matrix.h"

namespace pwgan {

// Simulation designs. beta = (1_{p_s}, 0_{p - p_s}); X ~ N(0, I_p).
//  M1: Y = X'b + e,                      e ~ N(0, 1)
//  M2: Y = X'b + e,                      e ~ t(1) (Cauchy)
//  M3: Y = X'b + exp(X2 + X3/3) + sin(X4 X5) e
//  M4: Y = h(X) e with h a fixed 16-unit leaky-relu network
//  M5: T = |X'b (1 - X'b)|^(1/2) + |X'b| |e|,   C = 4 exp(X'b)
//  M6: piecewise AFT in 2X'b,                   C = 4 exp(X'b)
enum class SimModel { kM1 = 1, kM2, kM3, kM4, kM5, kM6 };
SimModel parse_sim_model(const std::string& text);
std::string to_string(SimModel m);
bool is_survival_model(SimModel m);

struct SimModelSpec {
  SimModel model = SimModel::kM1;
  std::size_t p = 100;
  std::size_t p_s = 30;
  std::size_t n_train = 1000;
  std::size_t n_val = 100;
  std::size_t n_test = 1000;
  std::uint64_t seed = 1;
  // Seed of M4's fixed network; shared by every replicate.
  std::uint64_t m4_seed = 20240101;
  // Test hook: all error terms are zero.
  bool zero_noise = false;

  // Default sample sizes for the model: M1/M3 1000, M2/M4 10000,
  // M5/M6 5000; validation 100 and test 1000.
  static SimModelSpec defaults(SimModel model, std::size_t p = 100);
  void validate() const;
};

// M4's fixed network h(x) = w1' sigma(W0 x + b0) + b1 with
// sigma(v) = max(0.01 v, v). Columns of W0 beyond p_s are zero.
struct M4Network {
  Matrix w0;  // 16 x p
  Matrix b0;  // 16 x 1
  Matrix w1;  // 1 x 16
  double b1 = 0.0;

  static M4Network draw(std::uint64_t seed, std::size_t p, std::size_t p_s);
  double operator()(std::span<const double> x) const;
};

struct SimDataset {
  SimModelSpec spec;
  Dataset train;
  Dataset val;
  Dataset test;
  // S* (0-based): the first p_s predictors.
  std::vector<std::size_t> truth;
  std::optional<M4Network> m4;
  // Survival models only: the latent event and censoring times of `train`.
  std::vector<double> event_time;
  std::vector<double> censor_time;
};

SimDataset generate(const SimModelSpec& spec);

// Closed-form conditional law of Y given X = x for M1-M4. Mean and sd of M2
// are undefined and raise UndefinedMetricError, as do all quantities for the
// survival models.
double true_mean(const SimModelSpec& spec, std::span<const double> x,
                 const M4Network* m4 = nullptr);
double true_sd(const SimModelSpec& spec, std::span<const double> x,
               const M4Network* m4 = nullptr);
double true_quantile(const SimModelSpec& spec, std::span<const double> x,
                     double tau, const M4Network* m4 = nullptr);
bool has_moments(SimModel m);

// Standard normal quantile.
double normal_quantile(double tau);

}  // namespace pwgan

#endif  // PWGAN_SIMGEN_H_
