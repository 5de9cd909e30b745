#include <cmath>
#include <functional>

#include "doctest.h"
#include "pwgan/optimizer.h"
#include "pwgan/penalty.h"
#include "test_support.h"

using namespace pwgan;

namespace {

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// argmin_w 0.5 ||w - v||^2 + t ||w|| by zooming grid search in 2-D.
std::vector<double> prox_by_grid(const std::vector<double>& v, double t) {
  auto obj = [&](double a, double b) {
    return 0.5 * ((a - v[0]) * (a - v[0]) + (b - v[1]) * (b - v[1])) +
           t * std::sqrt(a * a + b * b);
  };
  double ca = 0, cb = 0, half = norm(v) + 1.0;
  while (half > 1e-9) {
    double best = obj(ca, cb), ba = ca, bb = cb;
    constexpr int kSteps = 40;
    for (int i = -kSteps; i <= kSteps; ++i) {
      for (int j = -kSteps; j <= kSteps; ++j) {
        const double a = ca + half * i / kSteps, b = cb + half * j / kSteps;
        const double o = obj(a, b);
        if (o < best) best = o, ba = a, bb = b;
      }
    }
    ca = ba, cb = bb;
    half /= 8.0;
  }
  return {ca, cb};
}

}  // namespace

TEST_CASE("prox shrinks (3, 4) toward zero") {
  const std::vector<double> v{3, 4};
  const auto a = group_prox(v, 1.0);
  CHECK(a[0] == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(3.2).epsilon(1e-15));
  CHECK(group_prox(v, 5.0) == std::vector<double>{0, 0});
  CHECK(group_prox(v, 6.0) == std::vector<double>{0, 0});
  CHECK(group_prox(v, 0.0) == v);
  const std::vector<double> zero{0, 0, 0};
  CHECK(group_prox(zero, 0.5) == zero);
  CHECK_THROWS(group_prox(v, -1.0));
}

TEST_CASE("prox matches a grid-search minimizer") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<double> v{2 * rng.normal(), 2 * rng.normal()};
    const double t = 3.0 * rng.uniform();
    const auto closed = group_prox(v, t);
    const auto grid = prox_by_grid(v, t);
    CHECK(std::abs(closed[0] - grid[0]) < 1e-6);
    CHECK(std::abs(closed[1] - grid[1]) < 1e-6);
  }
}

TEST_CASE("prox is non-expansive") {
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(4), b(4), d(4), e(4);
    for (int i = 0; i < 4; ++i) a[i] = rng.normal(), b[i] = rng.normal();
    const double t = rng.uniform() * 2.0;
    const auto pa = group_prox(a, t), pb = group_prox(b, t);
    for (int i = 0; i < 4; ++i) d[i] = pa[i] - pb[i], e[i] = a[i] - b[i];
    CHECK(norm(d) <= norm(e) + 1e-12);
  }
}

TEST_CASE("penalty sums predictor column norms only") {
  GeneratorNet g = GeneratorNet::init(2, 1, {2}, Activation::relu(), 1);
  g.first_weight() = Matrix{{3, 1, 50}, {4, 0, 50}};
  CHECK(penalty_value(g, 2.0) == doctest::Approx(12.0));
  CHECK(penalty_value(g, 0.0) == 0.0);
}

TEST_CASE("subgradient matches finite differences away from zero columns") {
  Rng rng(12);
  GeneratorNet g = GeneratorNet::init(4, 2, {5}, Activation::relu(), 3);
  Matrix& w = g.first_weight();
  for (std::size_t r = 0; r < w.rows(); ++r) w(r, 1) = 0.0;
  const double lambda = 0.7;
  const Matrix sub = penalty_subgradient(g, lambda);
  const double h = 1e-6;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      if (c == 1) {
        CHECK(sub(r, c) == 0.0);
        continue;
      }
      const double keep = w(r, c);
      w(r, c) = keep + h;
      const double up = penalty_value(g, lambda);
      w(r, c) = keep - h;
      const double down = penalty_value(g, lambda);
      w(r, c) = keep;
      const double fd = (up - down) / (2 * h);
      if (c >= 4) CHECK(sub(r, c) == 0.0);
      CHECK(std::abs(sub(r, c) - fd) < 1e-4);
    }
  }
}

TEST_CASE("apply_group_prox leaves noise columns and kills everything at large threshold") {
  GeneratorNet g = GeneratorNet::init(3, 2, {4}, Activation::relu(), 5);
  const Matrix before = g.first_weight();
  apply_group_prox(g, 1e6);
  const Matrix& w = g.first_weight();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(w(r, c) == 0.0);
    for (std::size_t c = 3; c < 5; ++c) CHECK(w(r, c) == before(r, c));
  }
  const std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(apply_group_prox(g, wrong), DimensionError);
}

TEST_CASE("per-column thresholds act column by column") {
  GeneratorNet g = GeneratorNet::init(2, 1, {2}, Activation::relu(), 1);
  g.first_weight() = Matrix{{3, 3, 9}, {4, 4, 9}};
  const std::vector<double> t{1.0, 10.0};
  apply_group_prox(g, t);
  const Matrix want{{2.4, 0, 9}, {3.2, 0, 9}};
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(g.first_weight()[i] == doctest::Approx(want[i]).epsilon(1e-15));
}

TEST_CASE("adaptive thresholds follow the accumulator") {
  GeneratorNet g = GeneratorNet::init(2, 1, {2}, Activation::relu(), 1);
  // column sums 4 and 16 over 2 rows; the noise column is ignored
  const Matrix acc{{1, 8, 100}, {3, 8, 100}};
  const double s = (2.0 + 4.0) / 2.0;
  CHECK(adaptive_gradient_scale(g, acc) == doctest::Approx(s));
  const auto t = adaptive_thresholds(g, acc, 0.1, 0.5, 0.0);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == doctest::Approx(0.1 * 0.5 * s / std::sqrt(2.0)));
  CHECK(t[1] == doctest::Approx(0.1 * 0.5 * s / std::sqrt(8.0)));
  CHECK_THROWS_AS(adaptive_gradient_scale(g, Matrix(2, 2)), DimensionError);
}

TEST_CASE("a zero column stays zero while its gradient is below lambda * s") {
  Rng rng(21);
  const double lambda = 0.8;
  for (int rep = 0; rep < 50; ++rep) {
    GeneratorNet g = GeneratorNet::init(4, 1, {6}, Activation::relu(), 2);
    g.first_weight().fill(0.0);
    Matrix grad = rng.normal_matrix(6, 5);
    // vary column scales so some columns cross the bar
    for (std::size_t c = 0; c < 4; ++c) {
      const double k = 0.2 + 2.0 * rng.uniform();
      for (std::size_t r = 0; r < 6; ++r) grad(r, c) *= k;
    }
    RmsProp opt(0.01, 0.9, 1e-12);
    std::vector<Matrix*> params{&g.first_weight()};
    std::vector<Matrix> grads{grad};
    opt.step(params, grads, Direction::kDescend);
    const Matrix& acc = opt.accumulators().front();
    const double s = adaptive_gradient_scale(g, acc);
    apply_group_prox(g, adaptive_thresholds(g, acc, 0.01, lambda, 1e-12));
    const auto norms = first_layer_column_norms(g);
    for (std::size_t c = 0; c < 4; ++c) {
      const double gn = norm(grad.column_copy(c));
      if (gn < lambda * s * (1 - 1e-9)) CHECK(norms[c] == 0.0);
      if (gn > lambda * s * (1 + 1e-9)) CHECK(norms[c] > 0.0);
    }
  }
}

TEST_CASE("prox mode names") {
  for (ProxMode m : {ProxMode::kSubgradient, ProxMode::kProximal, ProxMode::kAdaptive})
    CHECK(parse_prox_mode(to_string(m)) == m);
  CHECK_THROWS(parse_prox_mode("lasso"));
}

TEST_CASE("penalty hand values and homogeneity") {
  GeneratorNet g = GeneratorNet::init(2, 1, {2}, Activation::relu(), 1);
  g.first_weight() = Matrix{{3, 0, 1}, {4, 0, 1}};
  CHECK(penalty_value(g, 2.0) == 10.0);
  const Matrix sub = penalty_subgradient(g, 1.0);
  CHECK(sub(0, 0) == doctest::Approx(0.6));
  CHECK(sub(1, 0) == doctest::Approx(0.8));
  CHECK(sub(0, 1) == 0.0);
  const auto half = group_prox(std::vector<double>{3, 4}, 2.5);
  CHECK(half[0] == doctest::Approx(1.5));
  CHECK(half[1] == doctest::Approx(2.0));

  GeneratorNet r = GeneratorNet::init(5, 2, {4}, Activation::relu(), 8);
  const double base = penalty_value(r, 0.3);
  for (double& v : r.first_weight().values()) v *= 2.5;
  CHECK(penalty_value(r, 0.3) == doctest::Approx(2.5 * base).epsilon(1e-14));
  GeneratorNet zero = GeneratorNet::init(3, 1, {2}, Activation::relu(), 1,
                                         InitScheme::kZeros);
  CHECK(penalty_value(zero, 4.0) == 0.0);
}
