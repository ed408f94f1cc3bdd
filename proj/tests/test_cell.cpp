#include "tablerl/cell.hpp"

#include <doctest.h>

#include <cstdlib>
#include <random>
#include <string>

using namespace tablerl;

TEST_CASE("numeric detection accepts signed, grouped, and decimal forms") {
  CHECK(looks_numeric("0"));
  CHECK(looks_numeric("42"));
  CHECK(looks_numeric("-7"));
  CHECK(looks_numeric("+3"));
  CHECK(looks_numeric("3.5"));
  CHECK(looks_numeric("-0.5"));
  CHECK(looks_numeric("1,000"));
  CHECK(looks_numeric("12,345,678"));
  CHECK(looks_numeric("1,000.25"));

  CHECK_FALSE(looks_numeric(""));
  CHECK_FALSE(looks_numeric("abc"));
  CHECK_FALSE(looks_numeric("1e5"));
  CHECK_FALSE(looks_numeric("1."));
  CHECK_FALSE(looks_numeric(".5"));
  CHECK_FALSE(looks_numeric("1,00"));
  CHECK_FALSE(looks_numeric("1234,567"));
  CHECK_FALSE(looks_numeric("1,0000"));
  CHECK_FALSE(looks_numeric(" 42"));
  CHECK_FALSE(looks_numeric("42 "));
  CHECK_FALSE(looks_numeric("-"));
  CHECK_FALSE(looks_numeric("3.5.1"));
}

TEST_CASE("from_raw types cells deterministically") {
  CHECK(CellValue::from_raw("").is_empty());
  CHECK(CellValue::from_raw("abc").is_text());
  CHECK(CellValue::from_raw("abc").as_text() == "abc");

  CellValue grouped = CellValue::from_raw("1,000");
  REQUIRE(grouped.is_number());
  CHECK(grouped.as_number() == 1000.0);
  CHECK(grouped == CellValue::from_raw("1000"));

  CHECK(CellValue::from_raw("+3") == CellValue::number(3.0));
  CHECK(CellValue::from_raw("-0.5").as_number() == -0.5);
}

TEST_CASE("empty is distinct from blank-looking text") {
  CHECK(CellValue::empty() == CellValue());
  CHECK(CellValue::empty() != CellValue::from_raw(" "));
  CHECK(CellValue::from_raw(" ").is_text());
  CHECK(CellValue::empty().canonical() == "");
}

TEST_CASE("format_number emits shortest plain decimal") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(15.0) == "15");
  CHECK(format_number(1000.0) == "1000");
  CHECK(format_number(3.5) == "3.5");
  CHECK(format_number(-2.5) == "-2.5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e21) == "1000000000000000000000");
  CHECK(format_number(1e-7) == "0.0000001");
  CHECK(format_number(-1.5e-3) == "-0.0015");
}

TEST_CASE("format_number round-trips doubles exactly") {
  std::mt19937_64 rng(20260822);
  for (int trial = 0; trial < 10000; ++trial) {
    double mantissa =
        static_cast<double>(static_cast<std::int64_t>(rng() % 2000001) - 1000000) / 1000.0;
    int scale = static_cast<int>(rng() % 21) - 10;
    double v = mantissa * std::pow(10.0, scale);
    std::string s = format_number(v);
    CHECK(s.find('e') == std::string::npos);
    CHECK(s.find('E') == std::string::npos);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == (v == 0.0 ? 0.0 : v));
  }
}

TEST_CASE("negative zero folds into zero") {
  CHECK(CellValue::number(-0.0) == CellValue::number(0.0));
  CHECK(CellValue::number(-0.0).canonical() == "0");
}
