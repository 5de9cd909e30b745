#include <fstream>
#include <string>

#include "doctest.h"
#include "pwgan/data.h"
#include "pwgan/survival.h"
#include "test_support.h"

using namespace pwgan;

namespace {

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = testing::temp_dir("data_" + name) / "in.csv";
  std::ofstream(path) << text;
  return path.string();
}

// Line number carried by the ParseError, or 0 when none is thrown.
std::size_t parse_error_line(const std::string& path,
                             std::optional<Schema> schema = std::nullopt) {
  try {
    read_csv(path, schema);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("a small continuous file round trips exactly") {
  Dataset d;
  d.x = Matrix{{0.1, -2.5e-300}, {1.0 / 3.0, 7}, {-0.0, 1e10}};
  d.y = {0.2, 1.0 / 7.0, -3};
  const auto dir = testing::temp_dir("data_rt");
  const std::string path = (dir / "d.csv").string();
  write_csv(path, d);
  const Dataset back = read_csv(path);
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
  CHECK_FALSE(back.is_survival());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,y");
}

TEST_CASE("survival files round trip and keep delta") {
  Dataset d;
  d.x = Matrix{{1}, {2}};
  d.y = {0.5, 2.0};
  d.delta = {1, 0};
  const auto dir = testing::temp_dir("data_surv");
  const std::string path = (dir / "s.csv").string();
  write_csv(path, d);
  const Dataset back = read_csv(path, Schema::kSurvival);
  CHECK(back.delta == d.delta);
  CHECK(back.schema() == Schema::kSurvival);
  CHECK(parse_error_line(path, Schema::kContinuous) == 1);
}

TEST_CASE("all-event survival data gets uniform KM weights") {
  const std::string path = write_file("allevents", "x1,y,delta\n1,3,1\n2,1,1\n3,2,1\n4,5,1\n");
  const Dataset d = read_csv(path);
  for (double w : km_weights(d.y, d.delta).aligned()) CHECK(w == 0.25);
}

TEST_CASE("schema violations name the offending line") {
  CHECK(parse_error_line(write_file("half", "x1,y,delta\n1,2,1\n1,2,0.5\n")) == 3);
  CHECK(parse_error_line(write_file("two", "x1,y,delta\n1,2,2\n")) == 2);
  CHECK(parse_error_line(write_file("noy", "x1,x2\n1,2\n")) == 1);
  CHECK(parse_error_line(write_file("ragged", "x1,x2,y\n1,2,3\n1,2\n")) == 3);
  CHECK(parse_error_line(write_file("text", "x1,y\n1,2\nabc,3\n")) == 3);
  CHECK(parse_error_line(write_file("missing", "x1,y\n1,\n")) == 2);
  CHECK(parse_error_line(write_file("nodelta", "x1,y\n1,2\n"), Schema::kSurvival) == 1);
  CHECK(parse_error_line(write_file("extra", "x1,z,y\n1,2,3\n")) == 1);
  CHECK(parse_error_line(write_file("empty", "x1,y\n")) != 0);
  CHECK(parse_error_line(write_file("negative", "x1,y,delta\n1,-2,1\n")) == 2);
  CHECK(parse_error_line("/nonexistent/file.csv") == 0);

  try {
    read_csv(write_file("msg", "x1,y,delta\n1,2,1\n1,2,0.5\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("subset and column selection") {
  Dataset d;
  d.x = Matrix{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  d.y = {10, 20, 30};
  d.delta = {1, 0, 1};
  const std::vector<std::size_t> rows{2, 0};
  const Dataset s = d.subset(rows);
  CHECK(s.x == Matrix{{7, 8, 9}, {1, 2, 3}});
  CHECK(s.y == std::vector<double>{30, 10});
  CHECK(s.delta == std::vector<int>{1, 1});
  const std::vector<std::size_t> cols{2, 0};
  CHECK(d.select_columns(cols).x == Matrix{{3, 1}, {6, 4}, {9, 7}});
  CHECK(d.predictors_t(rows) == Matrix{{7, 1}, {8, 2}, {9, 3}});
  CHECK(d.responses_row(rows) == Matrix{{30, 10}});
  Dataset bad = d;
  bad.y.pop_back();
  CHECK_THROWS_AS(bad.validate(), DimensionError);
  CHECK(parse_schema(to_string(Schema::kSurvival)) == Schema::kSurvival);
  CHECK_THROWS(parse_schema("binary"));
}
