#include "pwgan/data.h"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace pwgan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Schema parse_schema(const std::string& text) {
  if (text == "continuous") return Schema::kContinuous;
  if (text == "survival") return Schema::kSurvival;
  throw std::invalid_argument("unknown schema '" + text + "'");
}

std::string to_string(Schema s) {
  return s == Schema::kContinuous ? "continuous" : "survival";
}

void Dataset::validate() const {
  if (x.rows() != y.size()) {
    throw DimensionError("Dataset: " + std::to_string(x.rows()) +
                         " predictor rows but " + std::to_string(y.size()) +
                         " responses");
  }
  if (!delta.empty() && delta.size() != y.size()) {
    throw DimensionError("Dataset: delta length differs from y");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x = Matrix(rows.size(), predictors());
  out.y.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = x.row_span(rows[k]);
    std::copy(src.begin(), src.end(), out.x.row_span(k).begin());
    out.y.push_back(y[rows[k]]);
    if (is_survival()) out.delta.push_back(delta[rows[k]]);
  }
  return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const {
  Dataset out;
  out.x = Matrix(size(), cols.size());
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] >= predictors()) {
        throw DimensionError("select_columns: column out of range");
      }
      out.x(i, k) = x(i, cols[k]);
    }
  }
  out.y = y;
  out.delta = delta;
  return out;
}

Matrix Dataset::predictors_t(std::span<const std::size_t> rows) const {
  Matrix out(predictors(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = x.row_span(rows[k]);
    for (std::size_t j = 0; j < src.size(); ++j) out(j, k) = src[j];
  }
  return out;
}

Matrix Dataset::responses_row(std::span<const std::size_t> rows) const {
  Matrix out(1, rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out[k] = y[rows[k]];
  return out;
}

ParseError::ParseError(const std::string& path, std::size_t line,
                       const std::string& msg)
    : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : "") +
                         ": " + msg),
      line_(line) {}

void write_csv(const std::string& path, const Dataset& data) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t j = 0; j < data.predictors(); ++j) out << 'x' << j + 1 << ',';
  out << 'y';
  if (data.is_survival()) out << ",delta";
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x.row_span(i)) out << v << ',';
    out << data.y[i];
    if (data.is_survival()) out << ',' << data.delta[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_csv(const std::string& path, std::optional<Schema> schema) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing header row");
  const auto header = split(line);
  std::vector<std::size_t> x_cols;
  std::optional<std::size_t> y_col, delta_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") {
      y_col = c;
    } else if (name == "delta") {
      delta_col = c;
    } else if (name.size() > 1 && name[0] == 'x') {
      x_cols.push_back(c);
    } else {
      throw ParseError(path, 1, "unexpected column '" + name + "'");
    }
  }
  if (!y_col) throw ParseError(path, 1, "missing y column");
  if (x_cols.empty()) throw ParseError(path, 1, "no predictor columns");
  const Schema resolved =
      schema.value_or(delta_col ? Schema::kSurvival : Schema::kContinuous);
  if (resolved == Schema::kSurvival && !delta_col) {
    throw ParseError(path, 1, "survival schema requires a delta column");
  }
  if (resolved == Schema::kContinuous && delta_col) {
    throw ParseError(path, 1, "continuous schema does not take a delta column");
  }

  std::vector<double> xs;
  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(header.size()) +
                           " cells, found " + std::to_string(cells.size()));
    }
    auto number = [&](std::size_t c) {
      const std::string& s = cells[c];
      if (s.empty() || s == "NA" || s == "NaN" || s == "nan") {
        throw ParseError(path, line_no, "missing value in column '" +
                                            header[c] + "'");
      }
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ParseError(path, line_no, "non-numeric value '" + s +
                                            "' in column '" + header[c] + "'");
      }
      return v;
    };
    for (std::size_t c : x_cols) xs.push_back(number(c));
    data.y.push_back(number(*y_col));
    if (delta_col) {
      const double d = number(*delta_col);
      if (d != 0.0 && d != 1.0) {
        throw ParseError(path, line_no,
                         "delta must be 0 or 1, got '" + cells[*delta_col] + "'");
      }
      data.delta.push_back(static_cast<int>(d));
      if (data.y.back() < 0.0) {
        throw ParseError(path, line_no, "negative survival time");
      }
    }
  }
  if (data.y.empty()) throw ParseError(path, line_no, "no data rows");
  data.x = Matrix(data.y.size(), x_cols.size(), std::move(xs));
  return data;
}

}  // namespace pwgan
