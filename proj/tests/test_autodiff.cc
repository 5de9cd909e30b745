#include <functional>

#include "doctest.h"
#include "pwgan/autodiff.h"
#include "test_support.h"

using namespace pwgan;

namespace {

// Central differences of f over every entry of `param`.
Matrix numeric_grad(Matrix& param, const std::function<double()>& f,
                    double h = 1e-6) {
  Matrix g(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double keep = param[i];
    param[i] = keep + h;
    const double up = f();
    param[i] = keep - h;
    const double down = f();
    param[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double sum_all(const Matrix& m) {
  double s = 0;
  for (double v : m.values()) s += v;
  return s;
}

}  // namespace

TEST_CASE("activation names round trip") {
  CHECK(Activation::relu().name() == "relu");
  const Activation a = Activation::leaky_relu(0.01);
  CHECK(a.name() == "leaky_relu(0.01)");
  const Activation b = Activation::parse(a.name());
  CHECK(b.kind == a.kind);
  CHECK(b.slope == a.slope);
  CHECK(Activation::parse("relu").kind == Activation::Kind::kRelu);
  CHECK_THROWS(Activation::parse("tanh"));
}

TEST_CASE("leaky relu derivative at zero is the slope") {
  const Activation a = Activation::leaky_relu(0.2);
  CHECK(a.apply(-1.0) == doctest::Approx(-0.2));
  CHECK(a.derivative(0.0) == 0.2);
  CHECK(a.derivative(1e-9) == 1.0);
}

TEST_CASE("composite expression gradients match finite differences") {
  Rng rng(11);
  Matrix w = testing::random_matrix(rng, 3, 4);
  Matrix x = testing::random_matrix(rng, 4, 5);
  Matrix b = testing::random_matrix(rng, 3, 1);
  Matrix v = testing::random_matrix(rng, 3, 5);
  const Activation act = Activation::leaky_relu(0.1);
  const std::vector<double> weights{0.1, 0.2, 0.3, 0.15, 0.25};

  auto value = [&] {
    const Matrix h = activation(linear(w, x, b), act);
    double s = 0;
    for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * v[i];
    const Matrix top = vstack(h, v);
    double ws = 0;
    for (std::size_t c = 0; c < 5; ++c) ws += weights[c] * top(0, c);
    double norms = 0;
    for (std::size_t c = 0; c < 2; ++c) {
      double n2 = 0;
      for (std::size_t r = 0; r < 3; ++r) n2 += w(r, c) * w(r, c);
      norms += std::sqrt(n2);
    }
    return s / 15.0 - 3.0 * ws + 0.5 * norms;
  };

  Tape tape;
  const Var tw = tape.parameter(w);
  const Var tx = tape.parameter(x);
  const Var tb = tape.parameter(b);
  const Var tv = tape.constant(v);
  const Var h = activation(linear(tw, tx, tb), act);
  const Var top = vstack(h, tv);
  Matrix flat_w(1, 30);
  for (std::size_t c = 0; c < 5; ++c) flat_w[c] = weights[c];
  const Var ws = weighted_sum(top, flat_w.values());
  const Var loss = add(sub(mean(mul(h, tv)), scale(ws, 3.0)),
                       scale(column_norm_sum(tw, 2), 0.5));
  CHECK(loss.value()(0, 0) == doctest::Approx(value()).epsilon(1e-12));
  tape.backward(loss);

  for (auto [param, var] : {std::pair{&w, tw}, {&x, tx}, {&b, tb}}) {
    const Matrix num = numeric_grad(*param, value);
    const Matrix& ana = tape.grad(var);
    for (std::size_t i = 0; i < num.size(); ++i) {
      CHECK(testing::rel_err(ana[i], num[i]) < 1e-6);
    }
  }
  // constants get no gradient
  CHECK(tape.grad(tv).max_abs() == 0.0);
}

TEST_CASE("sum and matmul backward") {
  Rng rng(3);
  Matrix a = testing::random_matrix(rng, 2, 3);
  Matrix b = testing::random_matrix(rng, 3, 4);
  Tape tape;
  const Var ta = tape.parameter(a);
  const Var tb = tape.parameter(b);
  const Var loss = sum(add_bias(matmul(ta, tb), tape.constant(Matrix(2, 1, 1.0))));
  tape.backward(loss);
  const Matrix ga = numeric_grad(a, [&] { return sum_all(matmul(a, b)); });
  const Matrix gb = numeric_grad(b, [&] { return sum_all(matmul(a, b)); });
  for (std::size_t i = 0; i < ga.size(); ++i)
    CHECK(tape.grad(ta)[i] == doctest::Approx(ga[i]).epsilon(1e-7));
  for (std::size_t i = 0; i < gb.size(); ++i)
    CHECK(tape.grad(tb)[i] == doctest::Approx(gb[i]).epsilon(1e-7));
}

TEST_CASE("a zero column gets a zero norm subgradient") {
  Matrix w{{0, 3}, {0, 4}};
  Tape tape;
  const Var tw = tape.parameter(w);
  tape.backward(column_norm_sum(tw, 2));
  CHECK(tape.grad(tw) == Matrix{{0, 0.6}, {0, 0.8}});
}

TEST_CASE("weighted_sum rejects a wrong weight count") {
  Tape tape;
  const Var a = tape.parameter(Matrix(2, 2, 1.0));
  const std::vector<double> w{1, 2, 3};
  CHECK_THROWS_AS(weighted_sum(a, w), DimensionError);
}

TEST_CASE("mixing tapes is refused") {
  Tape t1, t2;
  const Var a = t1.parameter(Matrix(1, 1, 1.0));
  const Var b = t2.parameter(Matrix(1, 1, 1.0));
  CHECK_THROWS_AS(add(a, b), ContractError);
}

TEST_CASE("activation hand values") {
  const Matrix r = activation(Matrix{{-1, 0, 2}}, Activation::relu());
  CHECK(r == Matrix{{0, 0, 2}});
  const Activation l = Activation::leaky_relu(0.01);
  CHECK(activation(Matrix{{-100, 5}}, l) == Matrix{{-1, 5}});
  CHECK_THROWS(Activation::leaky_relu(1.0));
  CHECK_THROWS(Activation::leaky_relu(-0.1));
}

TEST_CASE("gradient of w'w at 3 is 6") {
  Tape tape;
  const Var w = tape.parameter(Matrix{{3}});
  tape.backward(matmul(w, w));
  CHECK(tape.grad(w)(0, 0) == 6.0);
}

TEST_CASE("a linear loss has a gradient independent of w") {
  const Matrix x{{1, 2, 3}};
  Matrix first, second;
  for (double start : {-4.0, 9.0}) {
    Tape tape;
    const Var w = tape.parameter(Matrix{{start}});
    tape.backward(mean(matmul(w, tape.constant(x))));
    (start < 0 ? first : second) = tape.grad(w);
  }
  CHECK(first == second);
  CHECK(first(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("backward contract errors") {
  Tape tape;
  const Var a = tape.parameter(Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(tape.grad(a), ContractError);
  CHECK_THROWS_AS(tape.backward(a), ContractError);
}
