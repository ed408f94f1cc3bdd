#include "tablerl/transform.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "tablerl/errors.hpp"

namespace tablerl {

namespace {

void check_indices(const std::vector<std::size_t>& indices, std::size_t bound,
                   std::string_view op) {
  std::unordered_set<std::size_t> seen;
  for (std::size_t idx : indices) {
    if (idx >= bound) throw IndexOutOfRangeError(std::string(op), idx);
    if (!seen.insert(idx).second) {
      throw Error("duplicate index " + std::to_string(idx) + " in " + std::string(op));
    }
  }
  if (indices.empty()) throw Error("empty index list in " + std::string(op));
}

std::vector<std::size_t> sorted_copy(const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> out = indices;
  std::sort(out.begin(), out.end());
  return out;
}

/// Survivors of the body rows listed in `keep` (already sorted ascending).
Table keep_rows(const Table& t, const std::vector<std::size_t>& keep) {
  CellMatrix body;
  std::optional<CellMatrix> left;
  if (t.left_header()) left.emplace();
  for (std::size_t i : keep) {
    body.push_back(t.body()[i]);
    if (left) left->push_back((*t.left_header())[i]);
  }
  Table out(t.id(), t.layout(), t.top_header(), std::move(left), std::move(body));
  if (t.left_kind_hint()) out = out.with_left_kind_hint(*t.left_kind_hint());
  return out;
}

Table keep_columns(const Table& t, const std::vector<std::size_t>& keep) {
  auto project = [&keep](const CellRow& row) {
    CellRow out;
    out.reserve(keep.size());
    for (std::size_t j : keep) out.push_back(row[j]);
    return out;
  };
  CellMatrix top;
  for (const CellRow& row : t.top_header()) top.push_back(project(row));
  CellMatrix body;
  for (const CellRow& row : t.body()) body.push_back(project(row));
  std::optional<CellMatrix> left;
  if (t.left_header()) left = *t.left_header();
  Table out(t.id(), t.layout(), std::move(top), std::move(left), std::move(body));
  if (t.left_kind_hint()) out = out.with_left_kind_hint(*t.left_kind_hint());
  return out;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& removed, std::size_t bound) {
  std::vector<bool> gone(bound, false);
  for (std::size_t idx : removed) gone[idx] = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < bound; ++i) {
    if (!gone[i]) keep.push_back(i);
  }
  return keep;
}

std::vector<CellValue> normalize_values(const std::vector<std::string>& values) {
  std::vector<CellValue> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(CellValue::from_raw(v));
  return out;
}

bool row_has_any(const Table& t, std::size_t i, const std::vector<CellValue>& wanted) {
  for (const CellValue& cell : t.body()[i]) {
    for (const CellValue& w : wanted) {
      if (cell == w) return true;
    }
  }
  return false;
}

bool column_has_any(const Table& t, std::size_t j, const std::vector<CellValue>& wanted) {
  for (const CellRow& row : t.body()) {
    for (const CellValue& w : wanted) {
      if (row[j] == w) return true;
    }
  }
  return false;
}

Table transpose_table(const Table& t) {
  const std::size_t h = t.height();
  const std::size_t w = t.width();

  CellMatrix body(w, CellRow(h, CellValue::empty()));
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) body[j][i] = t.body()[i][j];
  }

  CellMatrix top;
  HeaderLayout layout = HeaderLayout::flat();
  if (t.left_header()) {
    const CellMatrix& old_left = *t.left_header();
    const std::size_t d = t.left_depth();
    top.assign(d, CellRow(h, CellValue::empty()));
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t c = 0; c < d; ++c) top[c][i] = old_left[i][c];
    }
    layout = HeaderLayout::infer(d);
    if (t.left_kind_hint()) {
      HeaderLayout hinted{*t.left_kind_hint(), d};
      if (hinted.valid()) layout = hinted;
    }
  } else {
    // A table without a left header gains an information-free top header row.
    top.assign(1, CellRow(h, CellValue::empty()));
  }

  const std::size_t old_depth = t.layout().depth;
  CellMatrix left(w, CellRow(old_depth, CellValue::empty()));
  for (std::size_t r = 0; r < old_depth; ++r) {
    for (std::size_t j = 0; j < w; ++j) left[j][r] = t.top_header()[r][j];
  }

  Table out(t.id(), layout, std::move(top), std::move(left), std::move(body));
  return out.with_left_kind_hint(t.layout().kind);
}

}  // namespace

std::string_view op_name(const TransformOp& op) {
  struct Namer {
    std::string_view operator()(const RowSwap&) const { return "row_swap"; }
    std::string_view operator()(const ColumnSwap&) const { return "column_swap"; }
    std::string_view operator()(const RowDeletion&) const { return "row_deletion"; }
    std::string_view operator()(const ColumnDeletion&) const { return "column_deletion"; }
    std::string_view operator()(const ExtractRows&) const { return "extract_rows"; }
    std::string_view operator()(const ExtractColumns&) const { return "extract_columns"; }
    std::string_view operator()(const ExtractRowsHavingCells&) const {
      return "extract_rows_having_cells";
    }
    std::string_view operator()(const ExtractColumnsHavingCells&) const {
      return "extract_columns_having_cells";
    }
    std::string_view operator()(const Transpose&) const { return "transpose"; }
  };
  return std::visit(Namer{}, op);
}

Table apply_op(const TransformOp& op, const Table& t) {
  struct Applier {
    const Table& t;

    Table operator()(const RowSwap& op) const {
      if (op.i >= t.height()) throw IndexOutOfRangeError("row_swap", op.i);
      if (op.j >= t.height()) throw IndexOutOfRangeError("row_swap", op.j);
      CellMatrix body = t.body();
      std::swap(body[op.i], body[op.j]);
      std::optional<CellMatrix> left;
      if (t.left_header()) {
        left = *t.left_header();
        std::swap((*left)[op.i], (*left)[op.j]);
      }
      Table out(t.id(), t.layout(), t.top_header(), std::move(left), std::move(body));
      if (t.left_kind_hint()) out = out.with_left_kind_hint(*t.left_kind_hint());
      return out;
    }

    Table operator()(const ColumnSwap& op) const {
      if (op.i >= t.width()) throw IndexOutOfRangeError("column_swap", op.i);
      if (op.j >= t.width()) throw IndexOutOfRangeError("column_swap", op.j);
      CellMatrix top = t.top_header();
      for (CellRow& row : top) std::swap(row[op.i], row[op.j]);
      CellMatrix body = t.body();
      for (CellRow& row : body) std::swap(row[op.i], row[op.j]);
      std::optional<CellMatrix> left;
      if (t.left_header()) left = *t.left_header();
      Table out(t.id(), t.layout(), std::move(top), std::move(left), std::move(body));
      if (t.left_kind_hint()) out = out.with_left_kind_hint(*t.left_kind_hint());
      return out;
    }

    Table operator()(const RowDeletion& op) const {
      check_indices(op.indices, t.height(), "row_deletion");
      return keep_rows(t, complement(op.indices, t.height()));
    }

    Table operator()(const ColumnDeletion& op) const {
      check_indices(op.indices, t.width(), "column_deletion");
      return keep_columns(t, complement(op.indices, t.width()));
    }

    Table operator()(const ExtractRows& op) const {
      check_indices(op.indices, t.height(), "extract_rows");
      return keep_rows(t, sorted_copy(op.indices));
    }

    Table operator()(const ExtractColumns& op) const {
      check_indices(op.indices, t.width(), "extract_columns");
      return keep_columns(t, sorted_copy(op.indices));
    }

    Table operator()(const ExtractRowsHavingCells& op) const {
      auto wanted = normalize_values(op.values);
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < t.height(); ++i) {
        if (row_has_any(t, i, wanted)) keep.push_back(i);
      }
      return keep_rows(t, keep);
    }

    Table operator()(const ExtractColumnsHavingCells& op) const {
      auto wanted = normalize_values(op.values);
      std::vector<std::size_t> keep;
      for (std::size_t j = 0; j < t.width(); ++j) {
        if (column_has_any(t, j, wanted)) keep.push_back(j);
      }
      return keep_columns(t, keep);
    }

    Table operator()(const Transpose&) const { return transpose_table(t); }
  };
  return std::visit(Applier{t}, op);
}

Table apply_program(const TransformProgram& p, const Table& t) {
  Table cur = t;
  for (std::size_t step = 0; step < p.ops.size(); ++step) {
    try {
      cur = apply_op(p.ops[step], cur);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " at step " + std::to_string(step));
    }
  }
  return cur;
}

namespace {

/// Deterministic across standard libraries, unlike uniform_int_distribution.
/// Modulo bias is below 2^-60 for the ranges used here.
std::size_t draw(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

std::vector<std::size_t> draw_distinct(std::mt19937_64& rng, std::size_t count, std::size_t k) {
  std::vector<std::size_t> pool(count);
  for (std::size_t i = 0; i < count; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = draw(rng, i, count - 1);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::string> distinct_body_values(const Table& t) {
  std::set<std::string> values;
  for (const CellRow& row : t.body()) {
    for (const CellValue& cell : row) {
      if (!cell.is_empty()) values.insert(cell.canonical());
    }
  }
  return {values.begin(), values.end()};
}

enum class Family {
  RowSwapF,
  ColumnSwapF,
  RowDeletionF,
  ColumnDeletionF,
  ExtractRowsF,
  ExtractColumnsF,
  ExtractRowsHavingF,
  ExtractColumnsHavingF,
  TransposeF,
};

}  // namespace

TransformProgram sample_program(const Table& t, std::uint64_t seed) {
  if (t.height() < 2 || t.width() < 2) {
    throw TableTooSmallError("need at least 2 rows and 2 columns, got " +
                             std::to_string(t.height()) + "x" + std::to_string(t.width()));
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = draw(rng, 1, 3);

  TransformProgram program;
  Table cur = t;
  for (std::size_t step = 0; step < n; ++step) {
    std::vector<std::string> values = distinct_body_values(cur);
    std::vector<Family> families;
    if (cur.height() >= 2) {
      families.push_back(Family::RowSwapF);
      families.push_back(Family::RowDeletionF);
    }
    if (cur.width() >= 2) {
      families.push_back(Family::ColumnSwapF);
      families.push_back(Family::ColumnDeletionF);
    }
    families.push_back(Family::ExtractRowsF);
    families.push_back(Family::ExtractColumnsF);
    if (!values.empty()) {
      families.push_back(Family::ExtractRowsHavingF);
      families.push_back(Family::ExtractColumnsHavingF);
    }
    // Transposing a table with a multi-column left header would lose the
    // header kind on serialization, so the sampler avoids it.
    if (!cur.left_header() || cur.left_depth() == 1) families.push_back(Family::TransposeF);

    Family family = families[draw(rng, 0, families.size() - 1)];
    TransformOp op;
    switch (family) {
      case Family::RowSwapF: {
        auto picked = draw_distinct(rng, cur.height(), 2);
        op = RowSwap{picked[0], picked[1]};
        break;
      }
      case Family::ColumnSwapF: {
        auto picked = draw_distinct(rng, cur.width(), 2);
        op = ColumnSwap{picked[0], picked[1]};
        break;
      }
      case Family::RowDeletionF: {
        std::size_t k = draw(rng, 1, cur.height() - 1);
        op = RowDeletion{draw_distinct(rng, cur.height(), k)};
        break;
      }
      case Family::ColumnDeletionF: {
        std::size_t k = draw(rng, 1, cur.width() - 1);
        op = ColumnDeletion{draw_distinct(rng, cur.width(), k)};
        break;
      }
      case Family::ExtractRowsF: {
        std::size_t k = draw(rng, 1, cur.height());
        op = ExtractRows{draw_distinct(rng, cur.height(), k)};
        break;
      }
      case Family::ExtractColumnsF: {
        std::size_t k = draw(rng, 1, cur.width());
        op = ExtractColumns{draw_distinct(rng, cur.width(), k)};
        break;
      }
      case Family::ExtractRowsHavingF:
      case Family::ExtractColumnsHavingF: {
        std::size_t m = draw(rng, 1, std::min<std::size_t>(2, values.size()));
        auto picked = draw_distinct(rng, values.size(), m);
        std::vector<std::string> chosen;
        for (std::size_t idx : picked) chosen.push_back(values[idx]);
        if (family == Family::ExtractRowsHavingF) {
          op = ExtractRowsHavingCells{std::move(chosen)};
        } else {
          op = ExtractColumnsHavingCells{std::move(chosen)};
        }
        break;
      }
      case Family::TransposeF:
        op = Transpose{};
        break;
    }
    cur = apply_op(op, cur);
    program.ops.push_back(std::move(op));
  }

  apply_program(program, t);  // dry-run revalidation
  return program;
}

namespace {

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  out += '"';
  return out;
}

void append_indices(std::string& line, const std::vector<std::size_t>& indices) {
  for (std::size_t idx : indices) {
    line += ' ';
    line += std::to_string(idx);
  }
}

std::string serialize_op(const TransformOp& op) {
  std::string line{op_name(op)};
  struct Args {
    std::string& line;
    void operator()(const RowSwap& op) const {
      line += ' ' + std::to_string(op.i) + ' ' + std::to_string(op.j);
    }
    void operator()(const ColumnSwap& op) const {
      line += ' ' + std::to_string(op.i) + ' ' + std::to_string(op.j);
    }
    void operator()(const RowDeletion& op) const { append_indices(line, op.indices); }
    void operator()(const ColumnDeletion& op) const { append_indices(line, op.indices); }
    void operator()(const ExtractRows& op) const { append_indices(line, op.indices); }
    void operator()(const ExtractColumns& op) const { append_indices(line, op.indices); }
    void operator()(const ExtractRowsHavingCells& op) const {
      for (const auto& v : op.values) line += ' ' + quote_string(v);
    }
    void operator()(const ExtractColumnsHavingCells& op) const {
      for (const auto& v : op.values) line += ' ' + quote_string(v);
    }
    void operator()(const Transpose&) const {}
  };
  std::visit(Args{line}, op);
  return line;
}

struct Token {
  enum class Kind { Word, Integer, String };
  Kind kind;
  std::string text;
  std::size_t number = 0;
};

std::vector<Token> tokenize_line(std::string_view line, std::size_t lineno) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    char c = line[pos];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++pos;
      continue;
    }
    if (c == '"') {
      std::string text;
      ++pos;
      bool closed = false;
      while (pos < line.size()) {
        char d = line[pos];
        if (d == '\\') {
          if (pos + 1 >= line.size()) throw FormatError(lineno, "dangling escape");
          char e = line[pos + 1];
          switch (e) {
            case '"':
              text += '"';
              break;
            case '\\':
              text += '\\';
              break;
            case 'n':
              text += '\n';
              break;
            case 't':
              text += '\t';
              break;
            default:
              throw FormatError(lineno, std::string("unknown escape \\") + e);
          }
          pos += 2;
          continue;
        }
        if (d == '"') {
          closed = true;
          ++pos;
          break;
        }
        text += d;
        ++pos;
      }
      if (!closed) throw FormatError(lineno, "unterminated string");
      tokens.push_back({Token::Kind::String, std::move(text)});
      continue;
    }
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
    std::string word(line.substr(start, pos - start));
    bool digits = !word.empty() && std::all_of(word.begin(), word.end(), [](unsigned char ch) {
      return ch >= '0' && ch <= '9';
    });
    if (digits) {
      tokens.push_back({Token::Kind::Integer, word, std::stoull(word)});
    } else {
      tokens.push_back({Token::Kind::Word, std::move(word)});
    }
  }
  return tokens;
}

std::vector<std::size_t> parse_index_args(const std::vector<Token>& tokens, std::size_t lineno,
                                          std::string_view op) {
  if (tokens.size() < 2) {
    throw FormatError(lineno, std::string(op) + " needs at least one index");
  }
  std::vector<std::size_t> indices;
  std::unordered_set<std::size_t> seen;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i].kind != Token::Kind::Integer) {
      throw FormatError(lineno, std::string(op) + " arguments must be nonnegative integers");
    }
    if (!seen.insert(tokens[i].number).second) {
      throw FormatError(lineno, "duplicate index " + tokens[i].text + " in " + std::string(op));
    }
    indices.push_back(tokens[i].number);
  }
  return indices;
}

std::vector<std::string> parse_string_args(const std::vector<Token>& tokens, std::size_t lineno,
                                           std::string_view op) {
  if (tokens.size() < 2) {
    throw FormatError(lineno, std::string(op) + " needs at least one value");
  }
  std::vector<std::string> values;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i].kind != Token::Kind::String) {
      throw FormatError(lineno, std::string(op) + " arguments must be quoted strings");
    }
    values.push_back(tokens[i].text);
  }
  return values;
}

TransformOp parse_op_line(std::string_view line, std::size_t lineno) {
  auto tokens = tokenize_line(line, lineno);
  if (tokens.empty() || tokens[0].kind != Token::Kind::Word) {
    throw FormatError(lineno, "expected an operation name");
  }
  const std::string& name = tokens[0].text;
  auto pair_args = [&](std::string_view op) -> std::pair<std::size_t, std::size_t> {
    if (tokens.size() != 3 || tokens[1].kind != Token::Kind::Integer ||
        tokens[2].kind != Token::Kind::Integer) {
      throw FormatError(lineno, std::string(op) + " needs exactly two indices");
    }
    return {tokens[1].number, tokens[2].number};
  };
  if (name == "row_swap") {
    auto [i, j] = pair_args(name);
    return RowSwap{i, j};
  }
  if (name == "column_swap") {
    auto [i, j] = pair_args(name);
    return ColumnSwap{i, j};
  }
  if (name == "row_deletion") return RowDeletion{parse_index_args(tokens, lineno, name)};
  if (name == "column_deletion") return ColumnDeletion{parse_index_args(tokens, lineno, name)};
  if (name == "extract_rows") return ExtractRows{parse_index_args(tokens, lineno, name)};
  if (name == "extract_columns") return ExtractColumns{parse_index_args(tokens, lineno, name)};
  if (name == "extract_rows_having_cells") {
    return ExtractRowsHavingCells{parse_string_args(tokens, lineno, name)};
  }
  if (name == "extract_columns_having_cells") {
    return ExtractColumnsHavingCells{parse_string_args(tokens, lineno, name)};
  }
  if (name == "transpose") {
    if (tokens.size() != 1) throw FormatError(lineno, "transpose takes no arguments");
    return Transpose{};
  }
  throw FormatError(lineno, "unknown operation: " + name);
}

}  // namespace

std::string serialize_program(const TransformProgram& p) {
  std::string out;
  for (std::size_t i = 0; i < p.ops.size(); ++i) {
    if (i > 0) out += '\n';
    out += serialize_op(p.ops[i]);
  }
  return out;
}

TransformProgram parse_program(std::string_view text) {
  TransformProgram program;
  std::size_t start = 0, lineno = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, (nl == std::string_view::npos ? text.size() : nl) - start);
    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.back() == '\r' || stripped.back() == ' ' ||
                                 stripped.back() == '\t')) {
      stripped.remove_suffix(1);
    }
    if (!stripped.empty()) program.ops.push_back(parse_op_line(line, lineno));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
    ++lineno;
  }
  return program;
}

}  // namespace tablerl
