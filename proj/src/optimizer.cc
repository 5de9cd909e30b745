#include "pwgan/optimizer.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pwgan {

RmsProp::RmsProp(double learning_rate, double decay, double epsilon)
    : lr_(learning_rate), rho_(decay), eps_(epsilon) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (!(decay > 0.0 && decay < 1.0)) {
    throw std::invalid_argument("rmsprop decay must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

void RmsProp::step(std::span<Matrix* const> params,
                   std::span<const Matrix> grads, Direction direction) {
  if (params.size() != grads.size()) {
    throw DimensionError("RmsProp::step: parameter/gradient count mismatch");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_same_shape(*params[k], grads[k], "RmsProp::step");
    if (!grads[k].all_finite()) {
      throw NumericError("non-finite gradient at optimizer step " +
                         std::to_string(steps_ + 1) + " (parameter " +
                         std::to_string(k) + ")");
    }
  }
  if (acc_.empty()) {
    for (Matrix* p : params) acc_.emplace_back(p->rows(), p->cols());
  } else if (acc_.size() != params.size()) {
    throw DimensionError("RmsProp::step: parameter set changed");
  }
  const double sign = direction == Direction::kAscend ? 1.0 : -1.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto acc = acc_[k].values();
    auto p = params[k]->values();
    auto g = grads[k].values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc[i] = rho_ * acc[i] + (1.0 - rho_) * g[i] * g[i];
      p[i] += sign * lr_ * g[i] / (std::sqrt(acc[i]) + eps_);
    }
  }
  ++steps_;
}

void clip_params(Mlp& net, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip bound must be > 0");
  for (Matrix* m : net.parameters()) {
    for (double& v : m->values()) v = std::clamp(v, -c, c);
  }
}

void clip_params(DiscriminatorNet& net, double c) { clip_params(net.mlp(), c); }

}  // namespace pwgan
