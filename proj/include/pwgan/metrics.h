#ifndef PWGAN_METRICS_H_
#define PWGAN_METRICS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pwgan/matrix.h"
#include "pwgan/network.h"
#include "pwgan/rng.h"

namespace pwgan {

struct SelectionRates {
  double tpr = 0.0;
  double fpr = 0.0;
};

// TPR = |S^ n S*| / |S*|, FPR = |S^ n S^c| / |S^c| over indices 0..p-1.
// FPR is 0 when S^c is empty. Throws UndefinedMetricError for an empty S*.
SelectionRates tpr_fpr(std::span<const std::size_t> selected,
                       std::span<const std::size_t> truth, std::size_t p);

// Draws `draws` samples of Y given X = x.
using ConditionalSampler = std::function<std::vector<double>(
    std::span<const double> x, std::size_t draws, Rng& rng)>;

// Sampler backed by a generator: g(x, Z_j) with fresh Z_j ~ N(0, I_m).
ConditionalSampler generator_sampler(GeneratorNet g);

// Noise-averaged point predictions J^-1 sum_j g(x_i, Z_j) for every row of x.
// Every row sees the same draws Z_1..Z_J, so a row's prediction does not
// depend on its position.
std::vector<double> predict_mean(const ConditionalSampler& sampler,
                                 const Matrix& x, std::size_t draws,
                                 std::uint64_t seed);

// T^-1 sum_i (y_i - J^-1 sum_j g(x_i, Z_j))^2, exactly invariant to row order.
double prediction_mse(const ConditionalSampler& sampler, const Matrix& x,
                      std::span<const double> y, std::size_t draws,
                      std::uint64_t seed);

// Harrell's concordance: pair (i, j) is comparable when delta_i = 1 and
// y_i < y_j; it is concordant when pred_i < pred_j and counts 1/2 on a
// prediction tie. Throws UndefinedMetricError with no comparable pair.
double c_index(std::span<const double> pred, std::span<const double> y,
               std::span<const int> delta);

// Type-7 (linear interpolation) quantile of an ascending sample.
double sorted_quantile(std::span<const double> sorted, double tau);

// True conditional law used to score distribution estimates. `mean` and `sd`
// are empty when the moments do not exist.
struct ConditionalOracle {
  std::function<double(std::span<const double>)> mean;
  std::function<double(std::span<const double>)> sd;
  std::function<double(std::span<const double>, double)> quantile;
};

struct ConditionalMse {
  std::optional<double> mean;
  std::optional<double> sd;
  std::vector<std::pair<double, double>> quantile;  // (tau, mse)
};

// Plug-in estimates from `draws` samples per test point (mean, sd with 1/J
// normalization, type-7 quantiles) scored against the oracle. With
// `moments` set, an oracle lacking mean/sd raises UndefinedMetricError.
ConditionalMse conditional_mses(const ConditionalSampler& sampler,
                                const Matrix& x, const ConditionalOracle& oracle,
                                std::size_t draws, std::span<const double> taus,
                                std::uint64_t seed, bool moments = true);

// 1-Wasserstein distance between two equal-size 1-D samples:
// mean |sorted(a) - sorted(b)|.
double empirical_w1_1d(std::span<const double> a, std::span<const double> b);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample sd across replicates, 0 for a single value
  std::size_t count = 0;
};
MetricSummary summarize(std::span<const double> values);

// Named scalar metrics collected per replicate.
class MetricTable {
 public:
  void add(const std::string& name, double value) { values_[name].push_back(value); }
  const std::map<std::string, std::vector<double>>& values() const {
    return values_;
  }
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  MetricSummary summary(const std::string& name) const;

 private:
  std::map<std::string, std::vector<double>> values_;
};

}  // namespace pwgan

#endif  // PWGAN_METRICS_H_
