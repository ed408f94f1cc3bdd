#include <algorithm>
#include <numeric>

#include "tablerl/dsl.hpp"
#include "tablerl/normalize.hpp"

namespace tablerl {

namespace {

[[noreturn]] void raise(DslErrorKind kind, std::size_t stage, const std::string& detail) {
  throw DslRuntimeError(kind, stage, detail);
}

std::size_t resolve_col(const Table& t, const HeaderKey& key, std::size_t stage) {
  if (const auto* index = std::get_if<std::size_t>(&key)) {
    if (*index >= t.width()) {
      raise(DslErrorKind::UnknownHeader, stage,
            "column index " + std::to_string(*index) + " out of range");
    }
    return *index;
  }
  const std::string& label = std::get<std::string>(key);
  for (std::size_t j = 0; j < t.width(); ++j) {
    if (t.column_path(j) == label) return j;
  }
  std::vector<std::size_t> leaf_matches;
  for (std::size_t j = 0; j < t.width(); ++j) {
    if (t.column_leaf(j) == label) leaf_matches.push_back(j);
  }
  if (leaf_matches.size() == 1) return leaf_matches[0];
  raise(DslErrorKind::UnknownHeader, stage,
        leaf_matches.empty() ? "no column named \"" + label + "\""
                             : "ambiguous column label \"" + label + "\"");
}

std::size_t resolve_row(const Table& t, const HeaderKey& key, std::size_t stage) {
  if (const auto* index = std::get_if<std::size_t>(&key)) {
    if (*index >= t.height()) {
      raise(DslErrorKind::UnknownHeader, stage,
            "row index " + std::to_string(*index) + " out of range");
    }
    return *index;
  }
  const std::string& label = std::get<std::string>(key);
  if (t.left_header()) {
    for (std::size_t i = 0; i < t.height(); ++i) {
      if (t.row_path(i) == label) return i;
    }
    std::vector<std::size_t> leaf_matches;
    for (std::size_t i = 0; i < t.height(); ++i) {
      if (t.row_leaf(i) == label) leaf_matches.push_back(i);
    }
    if (leaf_matches.size() == 1) return leaf_matches[0];
    if (!leaf_matches.empty()) {
      raise(DslErrorKind::UnknownHeader, stage, "ambiguous row label \"" + label + "\"");
    }
  }
  raise(DslErrorKind::UnknownHeader, stage, "no row named \"" + label + "\"");
}

Table rebuild_rows(const Table& t, const std::vector<std::size_t>& order) {
  CellMatrix body;
  std::optional<CellMatrix> left;
  if (t.left_header()) left.emplace();
  for (std::size_t i : order) {
    body.push_back(t.body()[i]);
    if (left) left->push_back((*t.left_header())[i]);
  }
  Table out(t.id(), t.layout(), t.top_header(), std::move(left), std::move(body));
  if (t.left_kind_hint()) out = out.with_left_kind_hint(*t.left_kind_hint());
  return out;
}

/// Ordered comparisons are numeric-only; an empty cell never satisfies them.
bool test_cell(const CellValue& cell, Cmp cmp, const CellValue& rhs, std::size_t stage) {
  switch (cmp) {
    case Cmp::Eq:
      return cell == rhs;
    case Cmp::Ne:
      return cell != rhs;
    default:
      break;
  }
  if (cell.is_empty()) return false;
  if (!cell.is_number() || !rhs.is_number()) {
    raise(DslErrorKind::TypeMismatch, stage, "ordered comparison needs numbers");
  }
  double a = cell.as_number(), b = rhs.as_number();
  switch (cmp) {
    case Cmp::Lt:
      return a < b;
    case Cmp::Le:
      return a <= b;
    case Cmp::Gt:
      return a > b;
    case Cmp::Ge:
      return a >= b;
    default:
      return false;
  }
}

const Table& as_table(const DslValue& v, std::size_t stage, const char* what) {
  if (const Table* t = std::get_if<Table>(&v)) return *t;
  raise(DslErrorKind::TypeMismatch, stage, std::string(what) + " needs a table");
}

DslValue run_select(const SelectStage& stage, const DslValue& cur, std::size_t idx) {
  const Table& t = as_table(cur, idx, "selection");
  std::vector<CellValue> cells;
  if (stage.is_col) {
    std::size_t j = resolve_col(t, stage.key, idx);
    for (const CellRow& row : t.body()) cells.push_back(row[j]);
  } else {
    std::size_t i = resolve_row(t, stage.key, idx);
    cells = t.body()[i];
  }
  return cells;
}

DslValue run_filter(const FilterStage& stage, const DslValue& cur, std::size_t idx) {
  if (stage.on_col) {
    const Table& t = as_table(cur, idx, "filter col");
    std::size_t j = resolve_col(t, stage.col_key, idx);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < t.height(); ++i) {
      if (test_cell(t.body()[i][j], stage.cmp, stage.rhs, idx)) keep.push_back(i);
    }
    return rebuild_rows(t, keep);
  }
  const auto* list = std::get_if<std::vector<CellValue>>(&cur);
  if (list == nullptr) raise(DslErrorKind::TypeMismatch, idx, "filter it needs a list");
  std::vector<CellValue> kept;
  for (const CellValue& cell : *list) {
    if (test_cell(cell, stage.cmp, stage.rhs, idx)) kept.push_back(cell);
  }
  return kept;
}

DslValue run_aggregate(const AggregateStage& stage, const DslValue& cur, std::size_t idx) {
  if (stage.agg == Agg::Count) {
    if (const Table* t = std::get_if<Table>(&cur)) {
      return CellValue::number(static_cast<double>(t->height()));
    }
    if (const auto* list = std::get_if<std::vector<CellValue>>(&cur)) {
      return CellValue::number(static_cast<double>(list->size()));
    }
    raise(DslErrorKind::TypeMismatch, idx, "count needs a table or a list");
  }
  const auto* list = std::get_if<std::vector<CellValue>>(&cur);
  if (list == nullptr) raise(DslErrorKind::TypeMismatch, idx, "aggregation needs a list");
  std::vector<double> values;
  for (const CellValue& cell : *list) {
    if (cell.is_empty()) continue;
    if (!cell.is_number()) raise(DslErrorKind::TypeMismatch, idx, "aggregation over text cells");
    values.push_back(cell.as_number());
  }
  switch (stage.agg) {
    case Agg::Sum:
      return CellValue::number(std::accumulate(values.begin(), values.end(), 0.0));
    case Agg::Avg:
      if (values.empty()) raise(DslErrorKind::EmptyAggregate, idx, "avg of nothing");
      return CellValue::number(std::accumulate(values.begin(), values.end(), 0.0) /
                               static_cast<double>(values.size()));
    case Agg::Min:
      if (values.empty()) raise(DslErrorKind::EmptyAggregate, idx, "min of nothing");
      return CellValue::number(*std::min_element(values.begin(), values.end()));
    case Agg::Max:
      if (values.empty()) raise(DslErrorKind::EmptyAggregate, idx, "max of nothing");
      return CellValue::number(*std::max_element(values.begin(), values.end()));
    default:
      raise(DslErrorKind::TypeMismatch, idx, "unreachable aggregate");
  }
}

DslValue run_sort(const SortStage& stage, const DslValue& cur, std::size_t idx) {
  const Table& t = as_table(cur, idx, "sort");
  std::size_t j = resolve_col(t, stage.col_key, idx);

  bool has_number = false, has_text = false;
  for (const CellRow& row : t.body()) {
    if (row[j].is_number()) has_number = true;
    if (row[j].is_text()) has_text = true;
  }
  if (has_number && has_text) {
    raise(DslErrorKind::TypeMismatch, idx, "sort column mixes numbers and text");
  }

  std::vector<std::size_t> order(t.height());
  std::iota(order.begin(), order.end(), 0);
  auto before = [&](std::size_t a, std::size_t b) {
    const CellValue& ca = t.body()[a][j];
    const CellValue& cb = t.body()[b][j];
    if (ca.is_empty()) return false;  // empties sort last either way
    if (cb.is_empty()) return true;
    if (has_number) {
      return stage.ascending ? ca.as_number() < cb.as_number()
                             : cb.as_number() < ca.as_number();
    }
    return stage.ascending ? ca.as_text() < cb.as_text() : cb.as_text() < ca.as_text();
  };
  std::stable_sort(order.begin(), order.end(), before);
  return rebuild_rows(t, order);
}

DslValue run_transform(const TransformStage& stage, const DslValue& cur, std::size_t idx) {
  const Table& t = as_table(cur, idx, "transform");
  try {
    return apply_op(stage.op, t);
  } catch (const IndexOutOfRangeError& e) {
    raise(DslErrorKind::UnknownHeader, idx, e.what());
  }
}

double as_arith_operand(const DslValue& v, std::size_t idx) {
  const CellValue* cell = std::get_if<CellValue>(&v);
  if (cell == nullptr || !cell->is_number()) {
    raise(DslErrorKind::TypeMismatch, idx, "arithmetic needs scalar numbers");
  }
  return cell->as_number();
}

DslValue eval_expr(const Expr& e, const DslValue& cur, std::size_t idx) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return CellValue::number(e.number);
    case Expr::Kind::String:
      return CellValue::from_raw(e.text);
    case Expr::Kind::It:
      return cur;
    case Expr::Kind::TableRef:
      return as_table(cur, idx, "'table'");
    case Expr::Kind::Neg:
      return CellValue::number(-as_arith_operand(eval_expr(*e.lhs, cur, idx), idx));
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      double a = as_arith_operand(eval_expr(*e.lhs, cur, idx), idx);
      double b = as_arith_operand(eval_expr(*e.rhs, cur, idx), idx);
      switch (e.kind) {
        case Expr::Kind::Add:
          return CellValue::number(a + b);
        case Expr::Kind::Sub:
          return CellValue::number(a - b);
        case Expr::Kind::Mul:
          return CellValue::number(a * b);
        default:
          if (b == 0.0) raise(DslErrorKind::DivisionByZero, idx, "division by zero");
          return CellValue::number(a / b);
      }
    }
  }
  raise(DslErrorKind::TypeMismatch, idx, "unreachable expression kind");
}

}  // namespace

DslValue execute(const DslProgram& p, const Table& t) {
  DslValue cur = t;
  for (std::size_t idx = 0; idx < p.stages.size(); ++idx) {
    const DslStage& stage = p.stages[idx];
    if (const auto* s = std::get_if<SelectStage>(&stage)) {
      cur = run_select(*s, cur, idx);
    } else if (const auto* f = std::get_if<FilterStage>(&stage)) {
      cur = run_filter(*f, cur, idx);
    } else if (const auto* a = std::get_if<AggregateStage>(&stage)) {
      cur = run_aggregate(*a, cur, idx);
    } else if (const auto* so = std::get_if<SortStage>(&stage)) {
      cur = run_sort(*so, cur, idx);
    } else if (const auto* tr = std::get_if<TransformStage>(&stage)) {
      cur = run_transform(*tr, cur, idx);
    } else {
      cur = eval_expr(*std::get<EmitStage>(stage).expr, cur, idx);
    }
  }
  return cur;
}

std::vector<std::string> extract_answer(const DslValue& v) {
  std::vector<std::string> out;
  if (const CellValue* cell = std::get_if<CellValue>(&v)) {
    out.push_back(normalize_answer(cell->canonical()));
  } else if (const auto* list = std::get_if<std::vector<CellValue>>(&v)) {
    for (const CellValue& cell : *list) out.push_back(normalize_answer(cell.canonical()));
  } else {
    const Table& t = std::get<Table>(v);
    for (const CellRow& row : t.body()) {
      for (const CellValue& cell : row) out.push_back(normalize_answer(cell.canonical()));
    }
  }
  return out;
}

}  // namespace tablerl
