#ifndef PWGAN_ERRORS_H_
#define PWGAN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace pwgan {

// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was used outside its contract.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A metric is not defined for the given input (empty truth set, no
// comparable pairs, undefined moment).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace pwgan

#endif  // PWGAN_ERRORS_H_
