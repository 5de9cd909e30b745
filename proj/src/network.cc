#include "pwgan/network.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pwgan/rng.h"

namespace pwgan {
namespace {

constexpr const char* kMagic = "pwgan-network";
constexpr int kFormatVersion = 1;

void write_matrix(std::ostream& out, const char* tag, const Matrix& m) {
  out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  const auto v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << v[i] << ((i + 1) % m.cols() == 0 ? '\n' : ' ');
  }
}

void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  if (!(in >> got) || got != want) {
    throw std::runtime_error("checkpoint: expected '" + want + "', got '" +
                             got + "'");
  }
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw std::runtime_error(std::string("checkpoint: bad ") + what);
  return v;
}

Matrix read_matrix(std::istream& in, const char* tag) {
  expect_token(in, tag);
  const auto rows = read_value<std::size_t>(in, "rows");
  const auto cols = read_value<std::size_t>(in, "cols");
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    // operator>> rejects "inf"/"nan"; parameters are always finite.
    std::string tok = read_value<std::string>(in, "value");
    std::size_t used = 0;
    v = std::stod(tok, &used);
    if (used != tok.size()) throw std::runtime_error("checkpoint: bad value " + tok);
  }
  return Matrix(rows, cols, std::move(data));
}

void write_mlp(std::ostream& out, const Mlp& mlp) {
  const NetworkArch& a = mlp.arch();
  out << "input_dim " << a.input_dim << '\n';
  out << "hidden " << a.hidden_widths.size();
  for (auto w : a.hidden_widths) out << ' ' << w;
  out << '\n';
  out << "output_dim " << a.output_dim << '\n';
  out << "activation " << static_cast<int>(a.activation.kind) << ' '
      << a.activation.slope << '\n';
  for (const Layer& l : mlp.layers()) {
    write_matrix(out, "weight", l.weight);
    write_matrix(out, "bias", l.bias);
  }
}

Mlp read_mlp(std::istream& in) {
  NetworkArch a;
  expect_token(in, "input_dim");
  a.input_dim = read_value<std::size_t>(in, "input_dim");
  expect_token(in, "hidden");
  a.hidden_widths.resize(read_value<std::size_t>(in, "hidden count"));
  for (auto& w : a.hidden_widths) w = read_value<std::size_t>(in, "width");
  expect_token(in, "output_dim");
  a.output_dim = read_value<std::size_t>(in, "output_dim");
  expect_token(in, "activation");
  const int kind = read_value<int>(in, "activation kind");
  a.activation.kind = static_cast<Activation::Kind>(kind);
  a.activation.slope = std::stod(read_value<std::string>(in, "slope"));
  a.validate();
  std::vector<Layer> layers(a.hidden_widths.size() + 1);
  for (Layer& l : layers) {
    l.weight = read_matrix(in, "weight");
    l.bias = read_matrix(in, "bias");
  }
  return Mlp(a, std::move(layers));
}

void write_header(std::ostream& out, const char* kind) {
  out << kMagic << ' ' << kFormatVersion << '\n' << "kind " << kind << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
}

void read_header(std::istream& in, const char* kind) {
  expect_token(in, kMagic);
  const int version = read_value<int>(in, "version");
  if (version != kFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  }
  expect_token(in, "kind");
  expect_token(in, kind);
}

}  // namespace

void NetworkArch::validate() const {
  if (input_dim == 0 || output_dim == 0) {
    throw std::invalid_argument("NetworkArch: input/output dims must be >= 1");
  }
  if (hidden_widths.empty()) {
    throw std::invalid_argument("NetworkArch: at least one hidden layer");
  }
  for (auto w : hidden_widths) {
    if (w == 0) throw std::invalid_argument("NetworkArch: zero hidden width");
  }
}

InitScheme parse_init_scheme(const std::string& text) {
  if (text == "he_normal") return InitScheme::kHeNormal;
  if (text == "zeros") return InitScheme::kZeros;
  throw std::invalid_argument("unknown init scheme '" + text + "'");
}

std::string to_string(InitScheme s) {
  return s == InitScheme::kHeNormal ? "he_normal" : "zeros";
}

Mlp::Mlp(NetworkArch arch, std::vector<Layer> layers)
    : arch_(std::move(arch)), layers_(std::move(layers)) {
  arch_.validate();
  if (layers_.size() != arch_.hidden_widths.size() + 1) {
    throw DimensionError("Mlp: layer count does not match arch");
  }
  std::size_t fan_in = arch_.input_dim;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::size_t fan_out = i < arch_.hidden_widths.size()
                                    ? arch_.hidden_widths[i]
                                    : arch_.output_dim;
    const Layer& l = layers_[i];
    if (l.weight.rows() != fan_out || l.weight.cols() != fan_in ||
        l.bias.rows() != fan_out || l.bias.cols() != 1) {
      throw DimensionError("Mlp: layer " + std::to_string(i) +
                           " shape mismatch");
    }
    fan_in = fan_out;
  }
}

Mlp Mlp::init(const NetworkArch& arch, std::uint64_t seed, InitScheme scheme) {
  arch.validate();
  Rng rng(seed);
  std::vector<Layer> layers;
  std::size_t fan_in = arch.input_dim;
  for (std::size_t i = 0; i <= arch.hidden_widths.size(); ++i) {
    const std::size_t fan_out = i < arch.hidden_widths.size()
                                    ? arch.hidden_widths[i]
                                    : arch.output_dim;
    Layer l{Matrix(fan_out, fan_in), Matrix(fan_out, 1)};
    if (scheme == InitScheme::kHeNormal) {
      const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (double& v : l.weight.values()) v = sd * rng.normal();
    }
    layers.push_back(std::move(l));
    fan_in = fan_out;
  }
  return Mlp(arch, std::move(layers));
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Matrix Mlp::forward(const Matrix& input) const {
  if (input.rows() != arch_.input_dim) {
    throw DimensionError("Mlp::forward: input " + input.shape_string() +
                         " but input_dim " + std::to_string(arch_.input_dim));
  }
  Matrix h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = linear(layers_[i].weight, h, layers_[i].bias);
    if (i + 1 < layers_.size()) h = activation(h, arch_.activation);
  }
  return h;
}

Var Mlp::forward(Tape& tape, Var input, std::vector<Var>& params) const {
  if (input.value().rows() != arch_.input_dim) {
    throw DimensionError("Mlp::forward: input " +
                         input.value().shape_string() + " but input_dim " +
                         std::to_string(arch_.input_dim));
  }
  Var h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Var w = tape.parameter(layers_[i].weight);
    Var b = tape.parameter(layers_[i].bias);
    params.push_back(w);
    params.push_back(b);
    h = linear(w, h, b);
    if (i + 1 < layers_.size()) h = activation(h, arch_.activation);
  }
  return h;
}

std::vector<Matrix*> Mlp::parameters() {
  std::vector<Matrix*> out;
  for (Layer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Matrix*> Mlp::parameters() const {
  std::vector<const Matrix*> out;
  for (const Layer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

GeneratorNet::GeneratorNet(std::size_t predictors, std::size_t noise_dim,
                           Mlp mlp)
    : p_(predictors), m_(noise_dim), mlp_(std::move(mlp)) {
  if (mlp_.arch().input_dim != p_ + m_ || mlp_.arch().output_dim != 1) {
    throw DimensionError("GeneratorNet: arch must be (p + m) -> 1");
  }
}

GeneratorNet GeneratorNet::init(std::size_t predictors, std::size_t noise_dim,
                                std::vector<std::size_t> hidden_widths,
                                const Activation& act, std::uint64_t seed,
                                InitScheme scheme) {
  NetworkArch arch{predictors + noise_dim, std::move(hidden_widths), 1, act};
  return GeneratorNet(predictors, noise_dim, Mlp::init(arch, seed, scheme));
}

double GeneratorNet::forward(std::span<const double> x,
                             std::span<const double> z) const {
  if (x.size() != p_ || z.size() != m_) {
    throw DimensionError("GeneratorNet::forward: expected " +
                         std::to_string(p_) + " predictors and " +
                         std::to_string(m_) + " noise values");
  }
  return forward_batch(Matrix::column(x), Matrix::column(z))[0];
}

Matrix GeneratorNet::forward_batch(const Matrix& x, const Matrix& z) const {
  if (x.rows() != p_ || z.rows() != m_ || x.cols() != z.cols()) {
    throw DimensionError("GeneratorNet::forward_batch: x " + x.shape_string() +
                         ", z " + z.shape_string());
  }
  return mlp_.forward(vstack(x, z));
}

Var GeneratorNet::forward(Tape& tape, Var x, Var z,
                          std::vector<Var>& params) const {
  return mlp_.forward(tape, vstack(x, z), params);
}

DiscriminatorNet::DiscriminatorNet(std::size_t predictors, Mlp mlp)
    : p_(predictors), mlp_(std::move(mlp)) {
  if (mlp_.arch().input_dim != p_ + 1 || mlp_.arch().output_dim != 1) {
    throw DimensionError("DiscriminatorNet: arch must be (p + 1) -> 1");
  }
}

DiscriminatorNet DiscriminatorNet::init(std::size_t predictors,
                                        std::vector<std::size_t> hidden_widths,
                                        const Activation& act,
                                        std::uint64_t seed, InitScheme scheme) {
  NetworkArch arch{predictors + 1, std::move(hidden_widths), 1, act};
  return DiscriminatorNet(predictors, Mlp::init(arch, seed, scheme));
}

Matrix DiscriminatorNet::forward_batch(const Matrix& x, const Matrix& y) const {
  if (x.rows() != p_ || y.rows() != 1 || x.cols() != y.cols()) {
    throw DimensionError("DiscriminatorNet::forward_batch: x " +
                         x.shape_string() + ", y " + y.shape_string());
  }
  return mlp_.forward(vstack(x, y));
}

Var DiscriminatorNet::forward(Tape& tape, Var x, Var y,
                              std::vector<Var>& params) const {
  return mlp_.forward(tape, vstack(x, y), params);
}

std::vector<double> first_layer_column_norms(const GeneratorNet& g) {
  const Matrix& w = g.first_weight();
  std::vector<double> norms(g.predictors(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < norms.size(); ++c) norms[c] += w(r, c) * w(r, c);
  }
  for (double& n : norms) n = std::sqrt(n);
  return norms;
}

void save_checkpoint(std::ostream& out, const GeneratorNet& g) {
  const auto old = out.precision();
  write_header(out, "generator");
  out << "predictors " << g.predictors() << "\nnoise_dim " << g.noise_dim()
      << '\n';
  write_mlp(out, g.mlp());
  out.precision(old);
}

void save_checkpoint(std::ostream& out, const DiscriminatorNet& f) {
  const auto old = out.precision();
  write_header(out, "discriminator");
  out << "predictors " << f.predictors() << '\n';
  write_mlp(out, f.mlp());
  out.precision(old);
}

GeneratorNet load_generator(std::istream& in) {
  read_header(in, "generator");
  expect_token(in, "predictors");
  const auto p = read_value<std::size_t>(in, "predictors");
  expect_token(in, "noise_dim");
  const auto m = read_value<std::size_t>(in, "noise_dim");
  return GeneratorNet(p, m, read_mlp(in));
}

DiscriminatorNet load_discriminator(std::istream& in) {
  read_header(in, "discriminator");
  expect_token(in, "predictors");
  const auto p = read_value<std::size_t>(in, "predictors");
  return DiscriminatorNet(p, read_mlp(in));
}

void save_checkpoint_file(const std::string& path, const GeneratorNet& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_checkpoint(out, g);
}

void save_checkpoint_file(const std::string& path, const DiscriminatorNet& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_checkpoint(out, f);
}

GeneratorNet load_generator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_generator(in);
}

}  // namespace pwgan
