#include "pwgan/penalty.h"

#include <cmath>
#include <stdexcept>

namespace pwgan {

ProxMode parse_prox_mode(const std::string& text) {
  if (text == "proximal") return ProxMode::kProximal;
  if (text == "subgradient") return ProxMode::kSubgradient;
  if (text == "adaptive") return ProxMode::kAdaptive;
  throw std::invalid_argument("unknown prox mode '" + text + "'");
}

std::string to_string(ProxMode m) {
  switch (m) {
    case ProxMode::kProximal:
      return "proximal";
    case ProxMode::kAdaptive:
      return "adaptive";
    case ProxMode::kSubgradient:
      break;
  }
  return "subgradient";
}

double penalty_value(const GeneratorNet& g, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  double s = 0.0;
  for (double n : first_layer_column_norms(g)) s += n;
  return lambda * s;
}

Matrix penalty_subgradient(const GeneratorNet& g, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const Matrix& w = g.first_weight();
  const auto norms = first_layer_column_norms(g);
  Matrix out(w.rows(), w.cols());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < norms.size(); ++c) {
      if (norms[c] > 0.0) out(r, c) = lambda * w(r, c) / norms[c];
    }
  }
  return out;
}

std::vector<double> group_prox(std::span<const double> column,
                               double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("threshold must be >= 0");
  double sq = 0.0;
  for (double v : column) sq += v * v;
  const double norm = std::sqrt(sq);
  std::vector<double> out(column.size(), 0.0);
  if (norm <= threshold || norm == 0.0) return out;
  const double factor = 1.0 - threshold / norm;
  for (std::size_t i = 0; i < column.size(); ++i) out[i] = factor * column[i];
  return out;
}

void apply_group_prox(GeneratorNet& g, double threshold) {
  Matrix& w = g.first_weight();
  for (std::size_t c = 0; c < g.predictors(); ++c) {
    w.set_column(c, group_prox(w.column_copy(c), threshold));
  }
}

void apply_group_prox(GeneratorNet& g, std::span<const double> thresholds) {
  if (thresholds.size() != g.predictors()) {
    throw DimensionError("apply_group_prox: one threshold per predictor");
  }
  Matrix& w = g.first_weight();
  for (std::size_t c = 0; c < g.predictors(); ++c) {
    w.set_column(c, group_prox(w.column_copy(c), thresholds[c]));
  }
}

namespace {

void check_accumulator(const GeneratorNet& g, const Matrix& acc) {
  const Matrix& w = g.first_weight();
  if (acc.rows() != w.rows() || acc.cols() != w.cols()) {
    throw DimensionError("adaptive penalty: accumulator " + acc.shape_string() +
                         " vs weight " + w.shape_string());
  }
}

double column_sum(const Matrix& acc, std::size_t c) {
  double sum = 0.0;
  for (std::size_t r = 0; r < acc.rows(); ++r) sum += acc(r, c);
  return sum;
}

}  // namespace

double adaptive_gradient_scale(const GeneratorNet& g, const Matrix& acc) {
  check_accumulator(g, acc);
  const std::size_t p = g.predictors();
  double scale = 0.0;
  for (std::size_t c = 0; c < p; ++c) scale += std::sqrt(column_sum(acc, c));
  return scale / static_cast<double>(p);
}

std::vector<double> adaptive_thresholds(const GeneratorNet& g,
                                        const Matrix& acc, double lr,
                                        double lambda, double eps) {
  const double scale = adaptive_gradient_scale(g, acc);
  std::vector<double> out(g.predictors());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double rms = std::sqrt(column_sum(acc, c) / static_cast<double>(acc.rows()));
    out[c] = lr * lambda * scale / (rms + eps);
  }
  return out;
}

}  // namespace pwgan
