#pragma once

#include <string>
#include <string_view>

namespace tablerl {

/// One table cell: empty, free text, or a unitless decimal number.
///
/// Cells are normalized at construction: any raw string that looks numeric
/// (optional sign, digits with optional comma thousands-grouping, optional
/// decimal part) becomes the number variant, so a text cell never carries a
/// numeric-looking payload. empty is distinct from text("").
class CellValue {
 public:
  enum class Kind { Empty, Text, Number };

  CellValue() : kind_(Kind::Empty), number_(0.0) {}

  static CellValue empty() { return CellValue(); }
  static CellValue number(double v);
  /// Builds a cell from raw source text: "" -> empty, numeric-looking -> number,
  /// anything else -> text.
  static CellValue from_raw(std::string_view raw);

  Kind kind() const { return kind_; }
  bool is_empty() const { return kind_ == Kind::Empty; }
  bool is_text() const { return kind_ == Kind::Text; }
  bool is_number() const { return kind_ == Kind::Number; }

  /// Valid only for the number variant.
  double as_number() const { return number_; }
  /// Valid only for the text variant.
  const std::string& as_text() const { return text_; }

  /// Canonical string form: "" for empty, the text bytes for text, and the
  /// shortest plain-decimal round-trip form for numbers ("1000", "3.5", "0").
  std::string canonical() const;

  bool operator==(const CellValue& other) const;
  bool operator!=(const CellValue& other) const { return !(*this == other); }

 private:
  Kind kind_;
  std::string text_;
  double number_;
};

/// True iff `s` matches: optional sign, digits with optional comma
/// thousands-grouping, optional "." followed by digits. No exponents.
bool looks_numeric(std::string_view s);

/// Shortest plain-decimal representation that re-parses to exactly `v`.
/// Never emits exponent notation; -0 collapses to "0".
std::string format_number(double v);

}  // namespace tablerl
