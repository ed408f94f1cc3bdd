#include "tablerl/table.hpp"

#include <algorithm>

#include "tablerl/errors.hpp"

namespace tablerl {

std::string to_string(HeaderLayout::Kind kind) {
  switch (kind) {
    case HeaderLayout::Kind::Flat:
      return "flat";
    case HeaderLayout::Kind::BiLevel:
      return "bi_level";
    case HeaderLayout::Kind::Hierarchical:
      return "hierarchical";
  }
  return "flat";
}

std::optional<HeaderLayout::Kind> layout_kind_from_string(const std::string& s) {
  if (s == "flat") return HeaderLayout::Kind::Flat;
  if (s == "bi_level") return HeaderLayout::Kind::BiLevel;
  if (s == "hierarchical") return HeaderLayout::Kind::Hierarchical;
  return std::nullopt;
}

namespace {

bool rectangular(const CellMatrix& m, std::size_t width) {
  return std::all_of(m.begin(), m.end(),
                     [width](const CellRow& r) { return r.size() == width; });
}

bool all_empty(const CellMatrix& m) {
  for (const auto& row : m) {
    for (const auto& cell : row) {
      if (!cell.is_empty()) return false;
    }
  }
  return true;
}

}  // namespace

Table::Table(std::string id, HeaderLayout layout, CellMatrix top_header,
             std::optional<CellMatrix> left_header, CellMatrix body)
    : id_(std::move(id)),
      layout_(layout),
      top_header_(std::move(top_header)),
      left_header_(std::move(left_header)),
      body_(std::move(body)) {
  if (!layout_.valid()) {
    throw FormatError(0, "invalid header layout: " + to_string(layout_.kind) + " with depth " +
                             std::to_string(layout_.depth));
  }
  if (top_header_.size() != layout_.depth) {
    throw FormatError(0, "top header has " + std::to_string(top_header_.size()) +
                             " rows but layout depth is " + std::to_string(layout_.depth));
  }
  width_ = top_header_.empty() ? 0 : top_header_[0].size();
  if (!rectangular(top_header_, width_)) throw FormatError(0, "ragged top header");
  if (!rectangular(body_, width_)) {
    throw FormatError(0, "ragged body: expected width " + std::to_string(width_));
  }
  if (left_header_) {
    if (left_header_->size() != body_.size()) {
      throw FormatError(0, "left header height " + std::to_string(left_header_->size()) +
                               " does not match body height " + std::to_string(body_.size()));
    }
    std::size_t left_width = left_header_->empty() ? 0 : (*left_header_)[0].size();
    if (!rectangular(*left_header_, left_width)) throw FormatError(0, "ragged left header");
    if (left_width == 0) {
      left_header_.reset();
    } else if (left_width == 1 && all_empty(*left_header_)) {
      // Canonical form: an information-free single-column left header is absent.
      left_header_.reset();
    }
  }
}

Table Table::flat(std::string id, CellRow header, CellMatrix body) {
  return Table(std::move(id), HeaderLayout::flat(), {std::move(header)}, std::nullopt,
               std::move(body));
}

Table Table::with_left_kind_hint(HeaderLayout::Kind kind) const {
  Table t = *this;
  t.left_kind_hint_ = kind;
  return t;
}

Table Table::with_id(std::string id) const {
  Table t = *this;
  t.id_ = std::move(id);
  return t;
}

std::string Table::column_path(std::size_t j) const {
  std::string path;
  for (std::size_t i = 0; i < top_header_.size(); ++i) {
    if (i > 0) path += " / ";
    path += top_header_[i][j].canonical();
  }
  return path;
}

std::string Table::column_leaf(std::size_t j) const {
  return top_header_.back()[j].canonical();
}

std::string Table::row_path(std::size_t i) const {
  if (!left_header_) return "";
  std::string path;
  const CellRow& row = (*left_header_)[i];
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j > 0) path += " / ";
    path += row[j].canonical();
  }
  return path;
}

std::string Table::row_leaf(std::size_t i) const {
  if (!left_header_) return "";
  return (*left_header_)[i].back().canonical();
}

bool tables_equal(const Table& a, const Table& b) {
  if (a.layout() != b.layout()) return false;
  if (a.top_header() != b.top_header()) return false;
  if (a.left_header().has_value() != b.left_header().has_value()) return false;
  if (a.left_header() && *a.left_header() != *b.left_header()) return false;
  return a.body() == b.body();
}

Table truncate_rows(const Table& t, std::size_t k) {
  if (k >= t.height()) return t;
  CellMatrix body(t.body().begin(), t.body().begin() + static_cast<std::ptrdiff_t>(k));
  std::optional<CellMatrix> left;
  if (t.left_header()) {
    left = CellMatrix(t.left_header()->begin(),
                      t.left_header()->begin() + static_cast<std::ptrdiff_t>(k));
  }
  Table out(t.id(), t.layout(), t.top_header(), std::move(left), std::move(body));
  if (t.left_kind_hint()) out = out.with_left_kind_hint(*t.left_kind_hint());
  return out;
}

}  // namespace tablerl
