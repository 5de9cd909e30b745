#ifndef PWGAN_AUTODIFF_H_
#define PWGAN_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pwgan/matrix.h"

namespace pwgan {

// max(slope * x, x); relu is slope 0. The derivative at 0 is taken as slope.
struct Activation {
  enum class Kind { kRelu, kLeakyRelu };
  Kind kind = Kind::kRelu;
  double slope = 0.0;

  static Activation relu() { return {Kind::kRelu, 0.0}; }
  static Activation leaky_relu(double slope);

  double apply(double x) const { return x > 0.0 ? x : slope * x; }
  double derivative(double x) const { return x > 0.0 ? 1.0 : slope; }
  std::string name() const;
  static Activation parse(const std::string& text);
};

// Elementwise activation without tracing.
Matrix activation(const Matrix& x, const Activation& act);

class Tape;

// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run reverse-mode tape. Nodes are appended in evaluation order, so
// iterating them backwards is a valid reverse topological order. A tape is
// meant to be rebuilt for every forward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that receives a gradient.
  Var parameter(Matrix value);
  // Leaf that never receives a gradient.
  Var constant(Matrix value);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients for every node.
  void backward(Var loss);

  // Gradient of the last backward() loss w.r.t. v. Zero if v does not
  // influence the loss.
  const Matrix& grad(Var v) const;
  const Matrix& value(Var v) const { return nodes_[v.id_].value; }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Used by the op implementations below.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;
  Var record(Matrix value, std::vector<std::size_t> inputs, BackwardFn fn);
  Matrix& grad_slot(std::size_t id) { return nodes_[id].grad; }
  const Matrix& grad_slot_const(std::size_t id) const { return nodes_[id].grad; }
  const Matrix& value_at(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// Traced primitives. All inputs must live on the same tape.
Var matmul(Var a, Var b);
// x + b with b (k x 1) broadcast over columns.
Var add_bias(Var x, Var b);
// w * x + b.
Var linear(Var w, Var x, Var b);
Var activation(Var x, const Activation& act);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
// Elementwise product.
Var mul(Var a, Var b);
// Sum of all entries, 1x1.
Var sum(Var a);
// Mean of all entries, 1x1.
Var mean(Var a);
// sum_i weights[i] * a[i] over the entries of a, 1x1.
Var weighted_sum(Var a, std::span<const double> weights);
Var vstack(Var a, Var b);
// Sum of Euclidean norms of the first `ncols` columns of w, 1x1. The
// subgradient at a zero column is taken as zero.
Var column_norm_sum(Var w, std::size_t ncols);

}  // namespace pwgan

#endif  // PWGAN_AUTODIFF_H_
