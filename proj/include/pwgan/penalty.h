#ifndef PWGAN_PENALTY_H_
#define PWGAN_PENALTY_H_

#include <span>
#include <string>
#include <vector>

#include "pwgan/matrix.h"
#include "pwgan/network.h"

namespace pwgan {

// How the group penalty enters the generator update.
//  kSubgradient: lambda * w/||w|| is added to the gradient before RMSProp.
//  kProximal: group soft-thresholding of each predictor column after the
//    RMSProp step, with threshold lr_g * lambda.
//  kAdaptive: like kProximal, but lambda is relative to the current gradient
//    scale. Column j is shrunk by lr_g * lambda * s / (r_j + eps), where r_j
//    is the RMS of the RMSProp accumulator over column j and s is the mean
//    accumulated column gradient norm over all predictor columns. A column at
//    zero stays at zero while its gradient norm is below lambda * s.
enum class ProxMode { kSubgradient, kProximal, kAdaptive };
ProxMode parse_prox_mode(const std::string& text);
std::string to_string(ProxMode m);

struct PenaltyConfig {
  double lambda_n = 0.0;
  ProxMode prox_mode = ProxMode::kAdaptive;
};

// lambda * sum_j ||w0[:, j]|| over predictor columns only.
double penalty_value(const GeneratorNet& g, double lambda);

// Same shape as the first-layer weight; noise columns and zero columns get 0.
Matrix penalty_subgradient(const GeneratorNet& g, double lambda);

// column * max(0, 1 - threshold / ||column||).
std::vector<double> group_prox(std::span<const double> column, double threshold);

// Applies group_prox to every predictor column of the first layer in place.
void apply_group_prox(GeneratorNet& g, double threshold);

// Per-column thresholds: column j is shrunk by thresholds[j].
void apply_group_prox(GeneratorNet& g, std::span<const double> thresholds);

// s for kAdaptive: mean over predictor columns j of sqrt(sum_r acc(r, j)).
// lambda * s is the penalty weight in objective units.
double adaptive_gradient_scale(const GeneratorNet& g, const Matrix& acc);

// The kAdaptive thresholds for every predictor column of the first layer,
// given that layer's RMSProp accumulator.
std::vector<double> adaptive_thresholds(const GeneratorNet& g,
                                              const Matrix& acc, double lr,
                                              double lambda, double eps);

}  // namespace pwgan

#endif  // PWGAN_PENALTY_H_
