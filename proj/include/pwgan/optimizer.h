#ifndef PWGAN_OPTIMIZER_H_
#define PWGAN_OPTIMIZER_H_

#include <span>
#include <vector>

#include "pwgan/matrix.h"
#include "pwgan/network.h"

namespace pwgan {

enum class Direction { kAscend, kDescend };

// RMSProp with one squared-gradient accumulator per parameter matrix:
//   acc <- rho * acc + (1 - rho) * g^2
//   param <- param -/+ lr * g / (sqrt(acc) + eps)
class RmsProp {
 public:
  RmsProp(double learning_rate, double decay = 0.9, double epsilon = 1e-8);

  // Throws NumericError (mentioning the step count) if any gradient entry is
  // not finite; parameters are left untouched in that case.
  void step(std::span<Matrix* const> params, std::span<const Matrix> grads,
            Direction direction);

  double learning_rate() const { return lr_; }
  double decay() const { return rho_; }
  double epsilon() const { return eps_; }
  long steps_taken() const { return steps_; }
  const std::vector<Matrix>& accumulators() const { return acc_; }

 private:
  double lr_;
  double rho_;
  double eps_;
  long steps_ = 0;
  std::vector<Matrix> acc_;
};

// Clamps every weight and bias entry into [-c, c].
void clip_params(DiscriminatorNet& net, double c);
void clip_params(Mlp& net, double c);

}  // namespace pwgan

#endif  // PWGAN_OPTIMIZER_H_
