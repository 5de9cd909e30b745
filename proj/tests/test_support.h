#ifndef PWGAN_TESTS_TEST_SUPPORT_H_
#define PWGAN_TESTS_TEST_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "pwgan/matrix.h"
#include "pwgan/rng.h"

namespace pwgan::testing {

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c,
                            double sd = 1.0) {
  return rng.normal_matrix(r, c, sd);
}

// |a - b| / max(|a|, |b|, floor).
inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("pwgan_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pwgan::testing

#endif  // PWGAN_TESTS_TEST_SUPPORT_H_
