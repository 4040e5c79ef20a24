#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sgn/errors.hpp"
#include "sgn/report.hpp"

using namespace sgn;

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 123456789.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Table, CsvQuotingAndEmptyCells) {
  Table t({"name", "value", "n"});
  t.add_row({std::string("plain"), 1.5, cell(std::size_t{3})});
  t.add_row({std::string("a,b \"q\""), Cell{}, cell(std::size_t{0})});
  EXPECT_EQ(t.to_csv(), "name,value,n\nplain,1.5,3\n\"a,b \"\"q\"\"\",,0\n");
  EXPECT_THROW(t.add_row({std::string("short")}), ShapeError);
}

TEST(Table, JsonRowsWithNullAndNonFinite) {
  Table t({"x", "y"});
  t.add_row({Cell{}, std::numeric_limits<double>::infinity()});
  const auto j = t.to_json();
  ASSERT_TRUE(j.is_array());
  EXPECT_TRUE(j[0]["x"].is_null());
  EXPECT_EQ(j[0]["y"], "inf");
}

TEST(DumpJson, TrailingNewline) {
  const std::string s = dump_json(nlohmann::json{{"a", 1}});
  EXPECT_EQ(s.back(), '\n');
  EXPECT_EQ(s, "{\n  \"a\": 1\n}\n");
}
