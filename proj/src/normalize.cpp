#include "tablerl/normalize.hpp"

#include <cctype>
#include <cstdlib>

#include "tablerl/cell.hpp"

namespace tablerl {

namespace {

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string_view strip_quotes(std::string_view s) {
  if (s.size() >= 2 &&
      ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

}  // namespace

std::string normalize_answer(std::string_view raw) {
  std::string_view body = trim(strip_quotes(trim(raw)));

  // Numeric canonicalization, with an optional trailing percent sign.
  bool percent = false;
  std::string_view numeric_part = body;
  if (!numeric_part.empty() && numeric_part.back() == '%') {
    percent = true;
    numeric_part = trim(numeric_part.substr(0, numeric_part.size() - 1));
  }
  if (looks_numeric(numeric_part)) {
    std::string plain;
    plain.reserve(numeric_part.size());
    for (char c : numeric_part) {
      if (c != ',' && c != '+') plain.push_back(c);
    }
    std::string out = format_number(std::strtod(plain.c_str(), nullptr));
    if (percent) out.push_back('%');
    return out;
  }

  std::string out;
  out.reserve(body.size());
  bool pending_space = false;
  for (char c : body) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace tablerl
