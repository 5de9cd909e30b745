#ifndef PWGAN_SURVIVAL_H_
#define PWGAN_SURVIVAL_H_

#include <cstddef>
#include <span>
#include <vector>

namespace pwgan {

// Right-censored observation: y = min(T, C), delta = 1 when the event was
// observed.
struct SurvivalSample {
  std::vector<double> x;
  double y = 0.0;
  int delta = 1;
};

// Kaplan-Meier jump weights. order[k] is the original index of the k-th
// smallest time and omega[k] its weight.
struct KMWeights {
  std::vector<std::size_t> order;
  std::vector<double> omega;

  // Weights placed back at the original sample positions.
  std::vector<double> aligned() const;
  double total() const;
};

// Stable ascending order by time; at equal times events come before censored
// observations, then original index.
std::vector<std::size_t> censored_order(std::span<const double> y,
                                        std::span<const int> delta);
std::vector<SurvivalSample> sort_censored(std::vector<SurvivalSample> samples);

// omega_(1) = D_(1)/n,
// omega_(i) = D_(i)/(n-i+1) * prod_{j<i} ((n-j)/(n-j+1))^{D_(j)}.
// Runs of consecutive events telescope, and are evaluated in closed form so
// that a fully observed sample gets exactly 1/n everywhere.
KMWeights km_weights(std::span<const double> y, std::span<const int> delta);
KMWeights km_weights(std::span<const SurvivalSample> samples);

}  // namespace pwgan

#endif  // PWGAN_SURVIVAL_H_
