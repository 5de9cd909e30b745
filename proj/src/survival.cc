#include "pwgan/survival.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pwgan/matrix.h"

namespace pwgan {

std::vector<double> KMWeights::aligned() const {
  std::vector<double> out(order.size(), 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = omega[k];
  return out;
}

double KMWeights::total() const {
  return std::accumulate(omega.begin(), omega.end(), 0.0);
}

std::vector<std::size_t> censored_order(std::span<const double> y,
                                        std::span<const int> delta) {
  if (y.size() != delta.size()) {
    throw DimensionError("censored_order: y and delta lengths differ");
  }
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (y[a] != y[b]) return y[a] < y[b];
    return delta[a] > delta[b];
  });
  return idx;
}

std::vector<SurvivalSample> sort_censored(std::vector<SurvivalSample> samples) {
  std::vector<double> y;
  std::vector<int> d;
  for (const auto& s : samples) {
    y.push_back(s.y);
    d.push_back(s.delta);
  }
  std::vector<SurvivalSample> out;
  out.reserve(samples.size());
  for (std::size_t i : censored_order(y, d)) out.push_back(std::move(samples[i]));
  return out;
}

KMWeights km_weights(std::span<const double> y, std::span<const int> delta) {
  for (int d : delta) {
    if (d != 0 && d != 1) throw std::invalid_argument("delta must be 0 or 1");
  }
  KMWeights w;
  w.order = censored_order(y, delta);
  const std::size_t n = y.size();
  w.omega.assign(n, 0.0);
  // closed: product over events that belong to finished runs.
  // run_start: 1-based index of the first event of the open run, 0 if none.
  double closed = 1.0;
  std::size_t run_start = 0;
  const auto nd = static_cast<double>(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const int d = delta[w.order[i - 1]];
    if (d == 1) {
      // prod over the open run a..i-1 is (n-i+1)/(n-a+1), which cancels the
      // leading 1/(n-i+1).
      const std::size_t a = run_start == 0 ? i : run_start;
      w.omega[i - 1] = closed / (nd - static_cast<double>(a) + 1.0);
      if (run_start == 0) run_start = i;
    } else if (run_start != 0) {
      closed *= (nd - static_cast<double>(i) + 1.0) /
                (nd - static_cast<double>(run_start) + 1.0);
      run_start = 0;
    }
  }
  return w;
}

KMWeights km_weights(std::span<const SurvivalSample> samples) {
  std::vector<double> y;
  std::vector<int> d;
  for (const auto& s : samples) {
    y.push_back(s.y);
    d.push_back(s.delta);
  }
  return km_weights(y, d);
}

}  // namespace pwgan
