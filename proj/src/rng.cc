#include "pwgan/rng.h"

#include <numeric>

namespace pwgan {

std::size_t Rng::below(std::size_t n) {
  // Rejection sampling; avoids std::uniform_int_distribution so the stream is
  // the same across standard library implementations.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = ~0ULL - (~0ULL % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

Matrix Rng::normal_matrix(std::size_t rows, std::size_t cols, double sd) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = sd * normal();
  return m;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle(idx);
  return idx;
}

}  // namespace pwgan
