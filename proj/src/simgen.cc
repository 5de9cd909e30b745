#include "pwgan/simgen.h"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

#include "pwgan/rng.h"

namespace pwgan {
namespace {

constexpr std::uint64_t kTrainStream = 11;
constexpr std::uint64_t kValStream = 12;
constexpr std::uint64_t kTestStream = 13;
constexpr std::size_t kM4Width = 16;

double linear_index(std::span<const double> x, std::size_t p_s) {
  double s = 0.0;
  for (std::size_t j = 0; j < p_s; ++j) s += x[j];
  return s;
}

double leaky(double v) { return v > 0.0 ? v : 0.01 * v; }

struct Draw {
  double y = 0.0;
  int delta = 1;
  double t = 0.0;
  double c = 0.0;
};

double m6_event_time(std::span<const double> x, double xb, double eps) {
  const double u = 2.0 * xb;
  if (u <= -6.5) {
    return std::exp(std::sqrt(0.1 * std::abs(xb))) - 1.1 + 0.3 * std::abs(eps);
  }
  if (u <= 0.0) {
    return std::abs(0.7 * x[0] * x[0] * x[0] + 0.2 * x[1] * x[1] + 0.3 * x[2] +
                    eps);
  }
  if (u <= 6.5) return std::exp(0.4 * xb + eps);
  return std::abs(std::log(3.0 * xb + eps));
}

Draw draw_response(const SimModelSpec& spec, std::span<const double> x,
                   const M4Network* m4, Rng& rng) {
  double eps = 0.0;
  if (spec.model == SimModel::kM2) {
    // t(1) as a ratio of independent standard normals.
    const double a = rng.normal();
    const double b = rng.normal();
    eps = a / b;
  } else {
    eps = rng.normal();
  }
  if (spec.zero_noise) eps = 0.0;
  const double xb = linear_index(x, spec.p_s);
  Draw d;
  switch (spec.model) {
    case SimModel::kM1:
    case SimModel::kM2:
      d.y = xb + eps;
      break;
    case SimModel::kM3:
      d.y = xb + std::exp(x[1] + x[2] / 3.0) + std::sin(x[3] * x[4]) * eps;
      break;
    case SimModel::kM4:
      d.y = (*m4)(x)*eps;
      break;
    case SimModel::kM5:
    case SimModel::kM6: {
      d.t = spec.model == SimModel::kM5
                ? std::sqrt(std::abs(xb * (1.0 - xb))) + std::abs(xb) * std::abs(eps)
                : m6_event_time(x, xb, eps);
      d.c = 4.0 * std::exp(xb);
      d.y = std::min(d.t, d.c);
      d.delta = d.t <= d.c ? 1 : 0;
      break;
    }
  }
  return d;
}

Dataset draw_dataset(const SimModelSpec& spec, std::size_t n,
                     std::uint64_t seed, const M4Network* m4,
                     std::vector<double>* t, std::vector<double>* c) {
  Rng rng(seed);
  Dataset data;
  data.x = Matrix(n, spec.p);
  data.y.resize(n);
  const bool survival = is_survival_model(spec.model);
  if (survival) data.delta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = data.x.row_span(i);
    for (double& v : row) v = rng.normal();
    const Draw d = draw_response(spec, row, m4, rng);
    data.y[i] = d.y;
    if (survival) {
      data.delta[i] = d.delta;
      if (t != nullptr) t->push_back(d.t);
      if (c != nullptr) c->push_back(d.c);
    }
  }
  return data;
}

void require_moments(const SimModelSpec& spec) {
  if (spec.model == SimModel::kM2) {
    throw UndefinedMetricError(
        "M2 has t(1) errors: conditional mean and sd are undefined");
  }
  if (is_survival_model(spec.model)) {
    throw UndefinedMetricError("no closed-form conditionals for " +
                               to_string(spec.model));
  }
}

const M4Network& need_m4(const M4Network* m4) {
  if (m4 == nullptr) throw ConfigError("M4 conditionals need the M4 network");
  return *m4;
}

}  // namespace

SimModel parse_sim_model(const std::string& text) {
  if (text.size() == 2 && (text[0] == 'M' || text[0] == 'm') &&
      text[1] >= '1' && text[1] <= '6') {
    return static_cast<SimModel>(text[1] - '0');
  }
  throw std::invalid_argument("unknown simulation model '" + text + "'");
}

std::string to_string(SimModel m) {
  return "M" + std::to_string(static_cast<int>(m));
}

bool is_survival_model(SimModel m) {
  return m == SimModel::kM5 || m == SimModel::kM6;
}

bool has_moments(SimModel m) {
  return m == SimModel::kM1 || m == SimModel::kM3 || m == SimModel::kM4;
}

SimModelSpec SimModelSpec::defaults(SimModel model, std::size_t p) {
  SimModelSpec s;
  s.model = model;
  s.p = p;
  switch (model) {
    case SimModel::kM1:
    case SimModel::kM3:
      s.n_train = 1000;
      break;
    case SimModel::kM2:
    case SimModel::kM4:
      s.n_train = 10000;
      break;
    case SimModel::kM5:
    case SimModel::kM6:
      s.n_train = 5000;
      break;
  }
  return s;
}

void SimModelSpec::validate() const {
  if (p_s == 0 || p_s > p) throw ConfigError("need 1 <= p_s <= p");
  if (n_train == 0) throw ConfigError("n_train must be >= 1");
  if (model == SimModel::kM3 && p < 5) throw ConfigError("M3 needs p >= 5");
  if (model == SimModel::kM6 && p < 3) throw ConfigError("M6 needs p >= 3");
}

M4Network M4Network::draw(std::uint64_t seed, std::size_t p, std::size_t p_s) {
  Rng rng(seed);
  M4Network net;
  net.w0 = Matrix(kM4Width, p);
  for (std::size_t r = 0; r < kM4Width; ++r) {
    for (std::size_t c = 0; c < p_s; ++c) net.w0(r, c) = rng.normal();
  }
  net.b0 = rng.normal_matrix(kM4Width, 1);
  net.w1 = rng.normal_matrix(1, kM4Width);
  net.b1 = rng.normal();
  return net;
}

double M4Network::operator()(std::span<const double> x) const {
  double out = b1;
  for (std::size_t r = 0; r < w0.rows(); ++r) {
    double h = b0[r];
    const auto row = w0.row_span(r);
    for (std::size_t c = 0; c < row.size(); ++c) h += row[c] * x[c];
    out += w1[r] * leaky(h);
  }
  return out;
}

SimDataset generate(const SimModelSpec& spec) {
  spec.validate();
  SimDataset out;
  out.spec = spec;
  if (spec.model == SimModel::kM4) {
    out.m4 = M4Network::draw(spec.m4_seed, spec.p, spec.p_s);
  }
  const M4Network* m4 = out.m4 ? &*out.m4 : nullptr;
  out.train = draw_dataset(spec, spec.n_train, derive_seed(spec.seed, kTrainStream),
                           m4, &out.event_time, &out.censor_time);
  out.val = draw_dataset(spec, spec.n_val, derive_seed(spec.seed, kValStream), m4,
                         nullptr, nullptr);
  out.test = draw_dataset(spec, spec.n_test, derive_seed(spec.seed, kTestStream),
                          m4, nullptr, nullptr);
  for (std::size_t j = 0; j < spec.p_s; ++j) out.truth.push_back(j);
  return out;
}

double normal_quantile(double tau) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), tau);
}

double true_mean(const SimModelSpec& spec, std::span<const double> x,
                 const M4Network* m4) {
  require_moments(spec);
  const double xb = linear_index(x, spec.p_s);
  switch (spec.model) {
    case SimModel::kM1:
      return xb;
    case SimModel::kM3:
      return xb + std::exp(x[1] + x[2] / 3.0);
    case SimModel::kM4:
      need_m4(m4);
      return 0.0;
    default:
      break;
  }
  throw UndefinedMetricError("no conditional mean");
}

double true_sd(const SimModelSpec& spec, std::span<const double> x,
               const M4Network* m4) {
  require_moments(spec);
  switch (spec.model) {
    case SimModel::kM1:
      return 1.0;
    case SimModel::kM3:
      return std::abs(std::sin(x[3] * x[4]));
    case SimModel::kM4:
      return std::abs(need_m4(m4)(x));
    default:
      break;
  }
  throw UndefinedMetricError("no conditional sd");
}

double true_quantile(const SimModelSpec& spec, std::span<const double> x,
                     double tau, const M4Network* m4) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  }
  if (is_survival_model(spec.model)) require_moments(spec);
  const double xb = linear_index(x, spec.p_s);
  switch (spec.model) {
    case SimModel::kM1:
      return xb + normal_quantile(tau);
    case SimModel::kM2:
      return xb + std::tan(std::numbers::pi * (tau - 0.5));
    case SimModel::kM3:
      return true_mean(spec, x) + true_sd(spec, x) * normal_quantile(tau);
    case SimModel::kM4: {
      const double h = need_m4(m4)(x);
      return h >= 0.0 ? h * normal_quantile(tau) : h * normal_quantile(1.0 - tau);
    }
    default:
      break;
  }
  throw UndefinedMetricError("no conditional quantile");
}

}  // namespace pwgan
