#ifndef PWGAN_DATA_H_
#define PWGAN_DATA_H_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwgan/matrix.h"

namespace pwgan {

enum class Schema { kContinuous, kSurvival };
Schema parse_schema(const std::string& text);
std::string to_string(Schema s);

// n samples of p predictors (row i of x is sample i), response y and, for
// survival data, the event indicator delta.
struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<int> delta;

  std::size_t size() const { return y.size(); }
  std::size_t predictors() const { return x.cols(); }
  bool is_survival() const { return !delta.empty(); }
  Schema schema() const {
    return is_survival() ? Schema::kSurvival : Schema::kContinuous;
  }

  // Throws DimensionError if field lengths disagree.
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
  // Keeps predictor columns `cols` (0-based) in the given order.
  Dataset select_columns(std::span<const std::size_t> cols) const;
  // Predictors of `rows` as a (p x rows.size()) matrix, one sample per column.
  Matrix predictors_t(std::span<const std::size_t> rows) const;
  // Responses of `rows` as a 1 x rows.size() matrix.
  Matrix responses_row(std::span<const std::size_t> rows) const;
};

// Schema or content violation while reading a data file. `line` is the
// 1-based line number in the file (0 when not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// CSV with header x1..xp, y[, delta]. Values are written with 17 significant
// digits so that write/read round-trips exactly.
void write_csv(const std::string& path, const Dataset& data);
// `schema` decides whether a delta column is required (survival) or must be
// absent (continuous); nullopt takes the schema from the header. Missing
// values are rejected.
Dataset read_csv(const std::string& path,
                 std::optional<Schema> schema = std::nullopt);

}  // namespace pwgan

#endif  // PWGAN_DATA_H_
