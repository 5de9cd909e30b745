#include "pwgan/metrics.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace pwgan {

SelectionRates tpr_fpr(std::span<const std::size_t> selected,
                       std::span<const std::size_t> truth, std::size_t p) {
  const std::set<std::size_t> star(truth.begin(), truth.end());
  if (star.empty()) throw UndefinedMetricError("TPR needs a nonempty S*");
  const std::set<std::size_t> hat(selected.begin(), selected.end());
  for (std::size_t j : star) {
    if (j >= p) throw std::out_of_range("truth index out of range");
  }
  std::size_t tp = 0, fp = 0;
  for (std::size_t j : hat) {
    if (j >= p) throw std::out_of_range("selected index out of range");
    if (star.count(j) != 0) {
      ++tp;
    } else {
      ++fp;
    }
  }
  const std::size_t negatives = p - star.size();
  return {static_cast<double>(tp) / static_cast<double>(star.size()),
          negatives == 0 ? 0.0
                         : static_cast<double>(fp) /
                               static_cast<double>(negatives)};
}

ConditionalSampler generator_sampler(GeneratorNet g) {
  return [g = std::move(g)](std::span<const double> x, std::size_t draws,
                            Rng& rng) {
    Matrix xs(g.predictors(), draws);
    for (std::size_t r = 0; r < xs.rows(); ++r) {
      for (double& v : xs.row_span(r)) v = x[r];
    }
    const Matrix z = rng.normal_matrix(g.noise_dim(), draws);
    const Matrix out = g.forward_batch(xs, z);
    return std::vector<double>(out.values().begin(), out.values().end());
  };
}

std::vector<double> predict_mean(const ConditionalSampler& sampler,
                                 const Matrix& x, std::size_t draws,
                                 std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("need at least one noise draw");
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    Rng rng(seed);
    const auto s = sampler(x.row_span(i), draws, rng);
    double sum = 0.0;
    for (double v : s) sum += v;
    out[i] = sum / static_cast<double>(draws);
  }
  return out;
}

double prediction_mse(const ConditionalSampler& sampler, const Matrix& x,
                      std::span<const double> y, std::size_t draws,
                      std::uint64_t seed) {
  if (y.size() != x.rows()) throw DimensionError("prediction_mse: x/y length");
  if (y.empty()) throw std::invalid_argument("prediction_mse: empty test set");
  const auto pred = predict_mean(sampler, x, draws, seed);
  std::vector<double> se(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    se[i] = (y[i] - pred[i]) * (y[i] - pred[i]);
  }
  // summing in sorted order makes the result independent of row order
  std::sort(se.begin(), se.end());
  double s = 0.0;
  for (double v : se) s += v;
  return s / static_cast<double>(y.size());
}

double c_index(std::span<const double> pred, std::span<const double> y,
               std::span<const int> delta) {
  if (pred.size() != y.size() || delta.size() != y.size()) {
    throw DimensionError("c_index: length mismatch");
  }
  // Sort by time; for each event i, every later j with y_j > y_i is
  // comparable. O(n^2) worst case but with a cheap inner loop.
  const std::size_t n = y.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  double concordant = 0.0;
  double comparable = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t i = idx[a];
    if (delta[i] != 1) continue;
    std::size_t b = a + 1;
    while (b < n && y[idx[b]] == y[i]) ++b;
    for (; b < n; ++b) {
      const std::size_t j = idx[b];
      comparable += 1.0;
      if (pred[i] < pred[j]) {
        concordant += 1.0;
      } else if (pred[i] == pred[j]) {
        concordant += 0.5;
      }
    }
  }
  if (comparable == 0.0) {
    throw UndefinedMetricError("c_index: no comparable pairs");
  }
  return concordant / comparable;
}

double sorted_quantile(std::span<const double> sorted, double tau) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  }
  const double h = (static_cast<double>(sorted.size()) - 1.0) * tau;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ConditionalMse conditional_mses(const ConditionalSampler& sampler,
                                const Matrix& x, const ConditionalOracle& oracle,
                                std::size_t draws, std::span<const double> taus,
                                std::uint64_t seed, bool moments) {
  if (draws == 0) throw std::invalid_argument("need at least one noise draw");
  if (x.rows() == 0) throw std::invalid_argument("empty test set");
  if (moments && (!oracle.mean || !oracle.sd)) {
    throw UndefinedMetricError("conditional mean/sd are undefined");
  }
  if (!taus.empty() && !oracle.quantile) {
    throw UndefinedMetricError("conditional quantile is undefined");
  }
  Rng rng(seed);
  double se_mean = 0.0, se_sd = 0.0;
  std::vector<double> se_q(taus.size(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row_span(i);
    auto s = sampler(xi, draws, rng);
    if (moments) {
      double mu = 0.0;
      for (double v : s) mu += v;
      mu /= static_cast<double>(draws);
      double var = 0.0;
      for (double v : s) var += (v - mu) * (v - mu);
      const double sd = std::sqrt(var / static_cast<double>(draws));
      se_mean += (mu - oracle.mean(xi)) * (mu - oracle.mean(xi));
      se_sd += (sd - oracle.sd(xi)) * (sd - oracle.sd(xi));
    }
    if (!taus.empty()) {
      std::sort(s.begin(), s.end());
      for (std::size_t k = 0; k < taus.size(); ++k) {
        const double d = sorted_quantile(s, taus[k]) - oracle.quantile(xi, taus[k]);
        se_q[k] += d * d;
      }
    }
  }
  const auto n = static_cast<double>(x.rows());
  ConditionalMse out;
  if (moments) {
    out.mean = se_mean / n;
    out.sd = se_sd / n;
  }
  for (std::size_t k = 0; k < taus.size(); ++k) {
    out.quantile.emplace_back(taus[k], se_q[k] / n);
  }
  return out;
}

double empirical_w1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("empirical_w1_1d: samples differ in size");
  }
  if (a.empty()) throw std::invalid_argument("empirical_w1_1d: empty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) s += std::abs(sa[i] - sb[i]);
  return s / static_cast<double>(sa.size());
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

MetricSummary MetricTable::summary(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::out_of_range("no metric '" + name + "'");
  return summarize(it->second);
}

}  // namespace pwgan
