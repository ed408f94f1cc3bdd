#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tablerl/cell.hpp"

namespace tablerl {

using CellRow = std::vector<CellValue>;
using CellMatrix = std::vector<CellRow>;

/// Describes the top header: number of header rows and its structural kind.
struct HeaderLayout {
  enum class Kind { Flat, BiLevel, Hierarchical };

  Kind kind = Kind::Flat;
  std::size_t depth = 1;

  static HeaderLayout flat() { return {Kind::Flat, 1}; }
  static HeaderLayout bi_level() { return {Kind::BiLevel, 2}; }
  static HeaderLayout hierarchical(std::size_t depth) { return {Kind::Hierarchical, depth}; }
  /// Kind implied by a bare depth: 1 -> flat, >=2 -> hierarchical.
  static HeaderLayout infer(std::size_t depth) {
    return depth == 1 ? flat() : hierarchical(depth);
  }

  /// flat => depth 1, bi_level => depth 2, hierarchical => depth >= 2.
  bool valid() const {
    switch (kind) {
      case Kind::Flat:
        return depth == 1;
      case Kind::BiLevel:
        return depth == 2;
      case Kind::Hierarchical:
        return depth >= 2;
    }
    return false;
  }

  bool operator==(const HeaderLayout& o) const { return kind == o.kind && depth == o.depth; }
  bool operator!=(const HeaderLayout& o) const { return !(*this == o); }
};

std::string to_string(HeaderLayout::Kind kind);
std::optional<HeaderLayout::Kind> layout_kind_from_string(const std::string& s);

/// Rectangular cell grid with a mandatory top header and an optional left
/// header. Immutable after construction; every transform produces a new table.
class Table {
 public:
  /// Validates all structural invariants; throws FormatError on violation.
  /// An all-empty depth-1 left header is canonicalized to absent.
  Table(std::string id, HeaderLayout layout, CellMatrix top_header,
        std::optional<CellMatrix> left_header, CellMatrix body);

  /// Flat-header convenience constructor.
  static Table flat(std::string id, CellRow header, CellMatrix body);

  const std::string& id() const { return id_; }
  const HeaderLayout& layout() const { return layout_; }
  const CellMatrix& top_header() const { return top_header_; }
  const std::optional<CellMatrix>& left_header() const { return left_header_; }
  const CellMatrix& body() const { return body_; }

  std::size_t width() const { return width_; }
  std::size_t height() const { return body_.size(); }
  std::size_t left_depth() const { return left_header_ ? (*left_header_)[0].size() : 0; }

  /// Survives transposition so a bi-level top header round-trips; not part of
  /// any serialized form or equality.
  const std::optional<HeaderLayout::Kind>& left_kind_hint() const { return left_kind_hint_; }
  Table with_left_kind_hint(HeaderLayout::Kind kind) const;
  Table with_id(std::string id) const;

  /// Column header path: cells of column j from top to bottom joined " / ".
  std::string column_path(std::size_t j) const;
  std::string column_leaf(std::size_t j) const;
  /// Row header path for tables with a left header, left to right.
  std::string row_path(std::size_t i) const;
  std::string row_leaf(std::size_t i) const;

 private:
  std::string id_;
  HeaderLayout layout_;
  CellMatrix top_header_;
  std::optional<CellMatrix> left_header_;
  CellMatrix body_;
  std::size_t width_ = 0;
  std::optional<HeaderLayout::Kind> left_kind_hint_;
};

/// Headers, layout, and body compared cell-wise under CellValue normalization.
/// Ids and hints are ignored.
bool tables_equal(const Table& a, const Table& b);

/// One QA benchmark item.
struct QaInstance {
  Table table;
  std::string question;
  std::vector<std::string> gold_answer;  // non-empty
  std::string dataset_tag;
  std::string id;
};

/// Returns a copy with at most `k` body rows (left header truncated alongside);
/// top headers unchanged.
Table truncate_rows(const Table& t, std::size_t k);

}  // namespace tablerl
