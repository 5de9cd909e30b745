#ifndef PWGAN_NETWORK_H_
#define PWGAN_NETWORK_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pwgan/autodiff.h"
#include "pwgan/matrix.h"

namespace pwgan {

struct NetworkArch {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths = {64, 32};
  std::size_t output_dim = 1;
  Activation activation = Activation::relu();

  // Throws std::invalid_argument on zero widths or an empty hidden list.
  void validate() const;
  bool operator==(const NetworkArch& o) const {
    return input_dim == o.input_dim && hidden_widths == o.hidden_widths &&
           output_dim == o.output_dim && activation.kind == o.activation.kind &&
           activation.slope == o.activation.slope;
  }
};

enum class InitScheme { kHeNormal, kZeros };
InitScheme parse_init_scheme(const std::string& text);
std::string to_string(InitScheme s);

// weight is (fan_out x fan_in), bias is (fan_out x 1).
struct Layer {
  Matrix weight;
  Matrix bias;
  bool operator==(const Layer&) const = default;
};

// Fully connected network: hidden layers use the arch activation, the output
// layer is affine.
class Mlp {
 public:
  Mlp() = default;
  Mlp(NetworkArch arch, std::vector<Layer> layers);
  static Mlp init(const NetworkArch& arch, std::uint64_t seed,
                  InitScheme scheme);

  const NetworkArch& arch() const { return arch_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  // input is (input_dim x batch); returns (output_dim x batch).
  Matrix forward(const Matrix& input) const;
  // Traced forward. Parameters are added to the tape in layer order
  // (w0, b0, w1, b1, ...) and their handles appended to `params`.
  Var forward(Tape& tape, Var input, std::vector<Var>& params) const;

  // Flat views over all parameters, same order as the traced forward.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;

  bool operator==(const Mlp&) const = default;

 private:
  NetworkArch arch_;
  std::vector<Layer> layers_;
};

// g(x, z): input is predictors stacked over noise. Columns [0, p) of the first
// weight matrix connect predictors, columns [p, p + m) connect noise.
class GeneratorNet {
 public:
  GeneratorNet() = default;
  GeneratorNet(std::size_t predictors, std::size_t noise_dim, Mlp mlp);
  static GeneratorNet init(std::size_t predictors, std::size_t noise_dim,
                           std::vector<std::size_t> hidden_widths,
                           const Activation& act, std::uint64_t seed,
                           InitScheme scheme = InitScheme::kHeNormal);

  std::size_t predictors() const { return p_; }
  std::size_t noise_dim() const { return m_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  Matrix& first_weight() { return mlp_.layers().front().weight; }
  const Matrix& first_weight() const { return mlp_.layers().front().weight; }

  double forward(std::span<const double> x, std::span<const double> z) const;
  // x is (p x n), z is (m x n); returns 1 x n.
  Matrix forward_batch(const Matrix& x, const Matrix& z) const;
  Var forward(Tape& tape, Var x, Var z, std::vector<Var>& params) const;

  bool operator==(const GeneratorNet&) const = default;

 private:
  std::size_t p_ = 0;
  std::size_t m_ = 0;
  Mlp mlp_;
};

// f(x, y): input is predictors stacked over the scalar response.
class DiscriminatorNet {
 public:
  DiscriminatorNet() = default;
  DiscriminatorNet(std::size_t predictors, Mlp mlp);
  static DiscriminatorNet init(std::size_t predictors,
                               std::vector<std::size_t> hidden_widths,
                               const Activation& act, std::uint64_t seed,
                               InitScheme scheme = InitScheme::kHeNormal);

  std::size_t predictors() const { return p_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }

  // x is (p x n), y is (1 x n); returns 1 x n.
  Matrix forward_batch(const Matrix& x, const Matrix& y) const;
  Var forward(Tape& tape, Var x, Var y, std::vector<Var>& params) const;

  bool operator==(const DiscriminatorNet&) const = default;

 private:
  std::size_t p_ = 0;
  Mlp mlp_;
};

// Euclidean norm of each predictor column of the generator's first layer.
std::vector<double> first_layer_column_norms(const GeneratorNet& g);

// Versioned text checkpoints. Values are written with 17 significant digits,
// so a save/load round trip is exact.
void save_checkpoint(std::ostream& out, const GeneratorNet& g);
void save_checkpoint(std::ostream& out, const DiscriminatorNet& f);
GeneratorNet load_generator(std::istream& in);
DiscriminatorNet load_discriminator(std::istream& in);
void save_checkpoint_file(const std::string& path, const GeneratorNet& g);
void save_checkpoint_file(const std::string& path, const DiscriminatorNet& f);
GeneratorNet load_generator_file(const std::string& path);

}  // namespace pwgan

#endif  // PWGAN_NETWORK_H_
