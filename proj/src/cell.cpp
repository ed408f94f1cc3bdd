#include "tablerl/cell.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace tablerl {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Expands a std::to_chars "1.25e+07" style string into plain decimal digits.
// The input mantissa is already the shortest round-trip form, so shifting the
// decimal point is exact string surgery.
std::string expand_scientific(std::string_view mantissa, int exponent, bool negative) {
  std::string digits;
  int point = 0;  // digits before the decimal point
  bool seen_dot = false;
  for (char c : mantissa) {
    if (c == '.') {
      seen_dot = true;
      continue;
    }
    digits.push_back(c);
    if (!seen_dot) ++point;
  }
  point += exponent;

  std::string out;
  if (negative) out.push_back('-');
  if (point <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-point), '0');
    out += digits;
  } else if (static_cast<std::size_t>(point) >= digits.size()) {
    out += digits;
    out.append(static_cast<std::size_t>(point) - digits.size(), '0');
  } else {
    out.append(digits, 0, static_cast<std::size_t>(point));
    out.push_back('.');
    out.append(digits, static_cast<std::size_t>(point), std::string::npos);
  }
  return out;
}

}  // namespace

bool looks_numeric(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  if (i >= s.size() || !is_digit(s[i])) return false;

  // Integer part: either plain digits or 1-3 digits followed by ",ddd" groups.
  std::size_t start = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  std::size_t lead = i - start;
  if (i < s.size() && s[i] == ',') {
    if (lead > 3) return false;
    while (i < s.size() && s[i] == ',') {
      ++i;
      for (int k = 0; k < 3; ++k, ++i) {
        if (i >= s.size() || !is_digit(s[i])) return false;
      }
    }
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    if (i >= s.size() || !is_digit(s[i])) return false;
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  return i == s.size();
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // covers -0
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";

  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  assert(res.ec == std::errc());
  std::string s(buf, res.ptr);

  bool negative = false;
  std::string_view sv = s;
  if (!sv.empty() && sv.front() == '-') {
    negative = true;
    sv.remove_prefix(1);
  }
  std::size_t e = sv.find('e');
  if (e == std::string_view::npos) return s;
  int exponent = std::atoi(std::string(sv.substr(e + 1)).c_str());
  return expand_scientific(sv.substr(0, e), exponent, negative);
}

CellValue CellValue::number(double v) {
  CellValue c;
  c.kind_ = Kind::Number;
  c.number_ = (v == 0.0) ? 0.0 : v;  // fold -0 into 0
  return c;
}

CellValue CellValue::from_raw(std::string_view raw) {
  if (raw.empty()) return CellValue::empty();
  if (looks_numeric(raw)) {
    std::string plain;
    plain.reserve(raw.size());
    for (char c : raw) {
      if (c != ',' && c != '+') plain.push_back(c);
    }
    return CellValue::number(std::strtod(plain.c_str(), nullptr));
  }
  CellValue c;
  c.kind_ = Kind::Text;
  c.text_ = std::string(raw);
  return c;
}

std::string CellValue::canonical() const {
  switch (kind_) {
    case Kind::Empty:
      return "";
    case Kind::Text:
      return text_;
    case Kind::Number:
      return format_number(number_);
  }
  return "";
}

bool CellValue::operator==(const CellValue& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::Empty:
      return true;
    case Kind::Text:
      return text_ == other.text_;
    case Kind::Number:
      return number_ == other.number_;
  }
  return false;
}

}  // namespace tablerl
