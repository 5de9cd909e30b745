#include "pwgan/autodiff.h"

#include <charconv>
#include <cmath>
#include <utility>

namespace pwgan {
namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw ContractError("operands recorded on different tapes");
  }
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (a.tape() == nullptr) throw ContractError("operand is not on a tape");
  return *a.tape();
}

void check_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

}  // namespace

Activation Activation::leaky_relu(double slope) {
  if (!(slope >= 0.0 && slope < 1.0)) {
    throw std::invalid_argument("leaky_relu slope must lie in [0, 1)");
  }
  return {Kind::kLeakyRelu, slope};
}

std::string Activation::name() const {
  if (kind == Kind::kRelu) return "relu";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, slope);
  return "leaky_relu(" + std::string(buf, res.ptr) + ")";
}

Activation Activation::parse(const std::string& text) {
  if (text == "relu") return relu();
  const std::string prefix = "leaky_relu";
  if (text.rfind(prefix, 0) == 0) {
    std::string rest = text.substr(prefix.size());
    if (rest.empty()) return leaky_relu(0.01);
    if (rest.front() == '(' && rest.back() == ')') {
      return leaky_relu(std::stod(rest.substr(1, rest.size() - 2)));
    }
  }
  throw std::invalid_argument("unknown activation '" + text + "'");
}

Matrix activation(const Matrix& x, const Activation& act) {
  Matrix out = x;
  for (double& v : out.values()) v = act.apply(v);
  return out;
}

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw ContractError("empty Var");
  return tape_->value(*this);
}

Var Tape::parameter(Matrix value) {
  check_finite(value, "parameter");
  nodes_.push_back({std::move(value), Matrix(), nullptr, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  check_finite(value, "constant");
  nodes_.push_back({std::move(value), Matrix(), nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::vector<std::size_t> inputs, BackwardFn fn) {
  check_finite(value, "forward op");
  bool needs = false;
  for (std::size_t i : inputs) needs = needs || nodes_[i].needs_grad;
  nodes_.push_back({std::move(value), Matrix(), needs ? std::move(fn) : nullptr,
                    needs});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw ContractError("loss is not on this tape");
  const Matrix& lv = nodes_[loss.id_].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward requires a scalar loss, got " +
                        lv.shape_string());
  }
  for (auto& n : nodes_) n.grad = Matrix(n.value.rows(), n.value.cols());
  nodes_[loss.id_].grad[0] = 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
}

const Matrix& Tape::grad(Var v) const {
  const Node& n = nodes_[v.id_];
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
    throw ContractError("grad requested before backward()");
  }
  return n.grad;
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(matmul(t.value_at(ia), t.value_at(ib)), {ia, ib},
                  [ia, ib](Tape& t, std::size_t self) {
                    const Matrix& g = t.grad_slot_const(self);
                    if (t.needs_grad(ia)) {
                      axpy(1.0, matmul_nt(g, t.value_at(ib)), t.grad_slot(ia));
                    }
                    if (t.needs_grad(ib)) {
                      axpy(1.0, matmul_tn(t.value_at(ia), g), t.grad_slot(ib));
                    }
                  });
}

Var add_bias(Var x, Var b) {
  Tape& t = same_tape(x, b);
  const std::size_t ix = x.id(), ib = b.id();
  const Matrix& xv = t.value_at(ix);
  const Matrix& bv = t.value_at(ib);
  if (bv.cols() != 1 || bv.rows() != xv.rows()) {
    throw DimensionError("add_bias: bias " + bv.shape_string() +
                         " does not match " + xv.shape_string());
  }
  Matrix out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (double& v : out.row_span(r)) v += bv[r];
  }
  return t.record(std::move(out), {ix, ib},
                  [ix, ib](Tape& t, std::size_t self) {
                    const Matrix& g = t.grad_slot_const(self);
                    if (t.needs_grad(ix)) axpy(1.0, g, t.grad_slot(ix));
                    if (t.needs_grad(ib)) {
                      Matrix& gb = t.grad_slot(ib);
                      for (std::size_t r = 0; r < g.rows(); ++r) {
                        double s = 0.0;
                        for (double v : g.row_span(r)) s += v;
                        gb[r] += s;
                      }
                    }
                  });
}

Var linear(Var w, Var x, Var b) { return add_bias(matmul(w, x), b); }

Var activation(Var x, const Activation& act) {
  Tape& t = tape_of(x);
  const std::size_t ix = x.id();
  return t.record(activation(t.value_at(ix), act), {ix},
                  [ix, act](Tape& t, std::size_t self) {
                    const auto g = t.grad_slot_const(self).values();
                    const auto xv = t.value_at(ix).values();
                    auto gx = t.grad_slot(ix).values();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      gx[i] += g[i] * act.derivative(xv[i]);
                    }
                  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  require_same_shape(t.value_at(ia), t.value_at(ib), "add");
  Matrix out = t.value_at(ia);
  axpy(1.0, t.value_at(ib), out);
  return t.record(std::move(out), {ia, ib},
                  [ia, ib](Tape& t, std::size_t self) {
                    const Matrix& g = t.grad_slot_const(self);
                    if (t.needs_grad(ia)) axpy(1.0, g, t.grad_slot(ia));
                    if (t.needs_grad(ib)) axpy(1.0, g, t.grad_slot(ib));
                  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  require_same_shape(t.value_at(ia), t.value_at(ib), "sub");
  Matrix out = t.value_at(ia);
  axpy(-1.0, t.value_at(ib), out);
  return t.record(std::move(out), {ia, ib},
                  [ia, ib](Tape& t, std::size_t self) {
                    const Matrix& g = t.grad_slot_const(self);
                    if (t.needs_grad(ia)) axpy(1.0, g, t.grad_slot(ia));
                    if (t.needs_grad(ib)) axpy(-1.0, g, t.grad_slot(ib));
                  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  Matrix out = t.value_at(ia);
  for (double& v : out.values()) v *= s;
  return t.record(std::move(out), {ia}, [ia, s](Tape& t, std::size_t self) {
    axpy(s, t.grad_slot_const(self), t.grad_slot(ia));
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  require_same_shape(t.value_at(ia), t.value_at(ib), "mul");
  Matrix out = t.value_at(ia);
  {
    auto o = out.values();
    auto bv = t.value_at(ib).values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  }
  return t.record(std::move(out), {ia, ib},
                  [ia, ib](Tape& t, std::size_t self) {
                    const auto g = t.grad_slot_const(self).values();
                    const auto av = t.value_at(ia).values();
                    const auto bv = t.value_at(ib).values();
                    if (t.needs_grad(ia)) {
                      auto ga = t.grad_slot(ia).values();
                      for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += g[i] * bv[i];
                      }
                    }
                    if (t.needs_grad(ib)) {
                      auto gb = t.grad_slot(ib).values();
                      for (std::size_t i = 0; i < g.size(); ++i) {
                        gb[i] += g[i] * av[i];
                      }
                    }
                  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  double s = 0.0;
  for (double v : t.value_at(ia).values()) s += v;
  return t.record(Matrix(1, 1, s), {ia}, [ia](Tape& t, std::size_t self) {
    const double g = t.grad_slot_const(self)[0];
    for (double& v : t.grad_slot(ia).values()) v += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean of empty matrix");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var weighted_sum(Var a, std::span<const double> weights) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  const auto av = t.value_at(ia).values();
  if (weights.size() != av.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(av.size()) +
                         " entries");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += weights[i] * av[i];
  std::vector<double> w(weights.begin(), weights.end());
  return t.record(Matrix(1, 1, s), {ia},
                  [ia, w = std::move(w)](Tape& t, std::size_t self) {
                    const double g = t.grad_slot_const(self)[0];
                    auto ga = t.grad_slot(ia).values();
                    for (std::size_t i = 0; i < ga.size(); ++i) {
                      ga[i] += g * w[i];
                    }
                  });
}

Var vstack(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  const std::size_t na = t.value_at(ia).size();
  return t.record(vstack(t.value_at(ia), t.value_at(ib)), {ia, ib},
                  [ia, ib, na](Tape& t, std::size_t self) {
                    const auto g = t.grad_slot_const(self).values();
                    if (t.needs_grad(ia)) {
                      auto ga = t.grad_slot(ia).values();
                      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                    }
                    if (t.needs_grad(ib)) {
                      auto gb = t.grad_slot(ib).values();
                      for (std::size_t i = 0; i < gb.size(); ++i) {
                        gb[i] += g[na + i];
                      }
                    }
                  });
}

Var column_norm_sum(Var w, std::size_t ncols) {
  Tape& t = tape_of(w);
  const std::size_t iw = w.id();
  const Matrix& wv = t.value_at(iw);
  if (ncols > wv.cols()) {
    throw DimensionError("column_norm_sum: ncols exceeds " + wv.shape_string());
  }
  std::vector<double> norms(ncols, 0.0);
  for (std::size_t r = 0; r < wv.rows(); ++r) {
    for (std::size_t c = 0; c < ncols; ++c) norms[c] += wv(r, c) * wv(r, c);
  }
  double s = 0.0;
  for (double& n : norms) {
    n = std::sqrt(n);
    s += n;
  }
  return t.record(Matrix(1, 1, s), {iw},
                  [iw, norms = std::move(norms)](Tape& t, std::size_t self) {
                    const double g = t.grad_slot_const(self)[0];
                    const Matrix& wv = t.value_at(iw);
                    Matrix& gw = t.grad_slot(iw);
                    for (std::size_t r = 0; r < wv.rows(); ++r) {
                      for (std::size_t c = 0; c < norms.size(); ++c) {
                        if (norms[c] > 0.0) gw(r, c) += g * wv(r, c) / norms[c];
                      }
                    }
                  });
}

}  // namespace pwgan
