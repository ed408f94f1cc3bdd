#include "tablerl/table_io.hpp"

#include <json.hpp>

#include "tablerl/errors.hpp"

namespace tablerl {

namespace {

using nlohmann::json;

CellValue cell_from_json(const json& j, std::size_t line) {
  if (j.is_null()) return CellValue::empty();
  if (j.is_number()) return CellValue::number(j.get<double>());
  if (j.is_string()) return CellValue::from_raw(j.get<std::string>());
  throw FormatError(line, "cell must be a string, number, or null");
}

json cell_to_json(const CellValue& c) {
  switch (c.kind()) {
    case CellValue::Kind::Empty:
      return nullptr;
    case CellValue::Kind::Number:
      return c.as_number();
    case CellValue::Kind::Text:
      return c.as_text();
  }
  return nullptr;
}

CellMatrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw FormatError(0, std::string(name) + " must be an array of rows");
  CellMatrix m;
  for (const auto& row : j) {
    if (!row.is_array()) throw FormatError(0, std::string(name) + " rows must be arrays");
    CellRow r;
    for (const auto& cell : row) r.push_back(cell_from_json(cell, 0));
    m.push_back(std::move(r));
  }
  return m;
}

json matrix_to_json(const CellMatrix& m) {
  json rows = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& cell : row) r.push_back(cell_to_json(cell));
    rows.push_back(std::move(r));
  }
  return rows;
}

Table parse_json_table(std::string_view source) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::parse_error& e) {
    throw FormatError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError(0, "table JSON must be an object");
  if (!j.contains("layout") || !j["layout"].is_object()) {
    throw FormatError(0, "missing layout object");
  }
  const json& jl = j["layout"];
  if (!jl.contains("kind") || !jl["kind"].is_string() || !jl.contains("depth") ||
      !jl["depth"].is_number_unsigned()) {
    throw FormatError(0, "layout needs a kind string and a depth integer");
  }
  auto kind = layout_kind_from_string(jl["kind"].get<std::string>());
  if (!kind) throw FormatError(0, "unknown layout kind: " + jl["kind"].get<std::string>());
  HeaderLayout layout{*kind, jl["depth"].get<std::size_t>()};
  if (!layout.valid()) {
    throw FormatError(0, "layout kind " + to_string(layout.kind) + " incompatible with depth " +
                             std::to_string(layout.depth));
  }

  std::string id = j.value("id", std::string());
  if (!j.contains("top_header")) throw FormatError(0, "missing top_header");
  CellMatrix top = matrix_from_json(j["top_header"], "top_header");
  std::optional<CellMatrix> left;
  if (j.contains("left_header") && !j["left_header"].is_null()) {
    left = matrix_from_json(j["left_header"], "left_header");
  }
  if (!j.contains("body")) throw FormatError(0, "missing body");
  CellMatrix body = matrix_from_json(j["body"], "body");
  return Table(std::move(id), layout, std::move(top), std::move(left), std::move(body));
}

std::string serialize_json_table(const Table& t) {
  json j;
  j["id"] = t.id();
  j["layout"] = {{"kind", to_string(t.layout().kind)}, {"depth", t.layout().depth}};
  j["top_header"] = matrix_to_json(t.top_header());
  j["left_header"] = t.left_header() ? matrix_to_json(*t.left_header()) : json(nullptr);
  j["body"] = matrix_to_json(t.body());
  return j.dump();
}

// CSV with quoted fields, "" escapes, and multi-line quoted cells.
std::vector<std::vector<std::string>> split_csv(std::string_view source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < source.size()) {
    char c = source[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < source.size() && source[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() || field_started || !row.empty()) end_row();
    } else if (c == '\r') {
      // swallowed; \r\n handled by the \n branch
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (!field.empty() || field_started || !row.empty()) end_row();
  return rows;
}

Table parse_csv_table(std::string_view source, const ParseOptions& opts) {
  auto rows = split_csv(source);
  std::size_t depth = opts.csv_header_depth == 0 ? 1 : opts.csv_header_depth;
  if (rows.size() < depth) {
    throw FormatError(rows.size(), "expected " + std::to_string(depth) + " header rows, got " +
                                       std::to_string(rows.size()));
  }
  std::size_t width = rows[0].size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw FormatError(r, "ragged row: expected " + std::to_string(width) + " cells, got " +
                               std::to_string(rows[r].size()));
    }
  }
  CellMatrix top, body;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    CellRow out;
    out.reserve(width);
    for (const auto& f : rows[r]) out.push_back(CellValue::from_raw(f));
    (r < depth ? top : body).push_back(std::move(out));
  }
  return Table(opts.id, HeaderLayout::infer(depth), std::move(top), std::nullopt,
               std::move(body));
}

std::string decode_md_cell(std::string_view raw) {
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\\' && i + 1 < raw.size()) {
      char n = raw[i + 1];
      if (n == '|' || n == '\\') {
        out.push_back(n);
        ++i;
        continue;
      }
      if (n == 'n') {
        out.push_back('\n');
        ++i;
        continue;
      }
    }
    out.push_back(raw[i]);
  }
  return out;
}

std::string encode_md_cell(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    switch (c) {
      case '|':
        out += "\\|";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

// Splits one `| a | b |` line into trimmed cell strings, honoring \| escapes.
std::vector<std::string> split_md_row(std::string_view line, std::size_t lineno) {
  std::size_t b = 0, e = line.size();
  while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
  while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t' || line[e - 1] == '\r')) --e;
  if (b >= e || line[b] != '|' || line[e - 1] != '|') {
    throw FormatError(lineno, "markdown table rows must start and end with '|'");
  }
  std::vector<std::string> cells;
  std::string cur;
  for (std::size_t i = b + 1; i < e; ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < e) {
      cur.push_back(c);
      cur.push_back(line[i + 1]);
      ++i;
      continue;
    }
    if (c == '|') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  cells.pop_back();  // text after the final '|'
  for (auto& cell : cells) {
    std::size_t cb = cell.find_first_not_of(" \t");
    std::size_t ce = cell.find_last_not_of(" \t");
    cell = (cb == std::string::npos) ? std::string() : cell.substr(cb, ce - cb + 1);
  }
  return cells;
}

bool is_md_separator(const std::vector<std::string>& cells) {
  if (cells.empty()) return false;
  for (const auto& c : cells) {
    if (c.size() < 3) return false;
    for (std::size_t i = 0; i < c.size(); ++i) {
      char ch = c[i];
      bool edge_colon = (ch == ':') && (i == 0 || i + 1 == c.size());
      if (ch != '-' && !edge_colon) return false;
    }
  }
  return true;
}

Table parse_markdown_table(std::string_view source, const ParseOptions& opts) {
  std::vector<std::pair<std::string_view, std::size_t>> lines;  // content, physical line
  std::size_t start = 0, lineno = 0;
  while (start <= source.size()) {
    std::size_t nl = source.find('\n', start);
    std::string_view line =
        source.substr(start, (nl == std::string_view::npos ? source.size() : nl) - start);
    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.back() == '\r' || stripped.back() == ' ')) {
      stripped.remove_suffix(1);
    }
    if (!stripped.empty()) lines.emplace_back(line, lineno);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
    ++lineno;
  }
  if (lines.size() < 2) throw FormatError(0, "markdown table needs a header and separator row");

  auto header = split_md_row(lines[0].first, lines[0].second);
  auto sep = split_md_row(lines[1].first, lines[1].second);
  if (!is_md_separator(sep)) {
    throw FormatError(lines[1].second, "second row must be a --- separator");
  }
  std::size_t width = header.size();
  if (sep.size() != width) {
    throw FormatError(lines[1].second, "separator has " + std::to_string(sep.size()) +
                                           " cells, header has " + std::to_string(width));
  }

  CellRow header_row;
  for (const auto& h : header) header_row.push_back(CellValue::from_raw(decode_md_cell(h)));
  CellMatrix body;
  for (std::size_t r = 2; r < lines.size(); ++r) {
    auto cells = split_md_row(lines[r].first, lines[r].second);
    if (cells.size() != width) {
      throw FormatError(lines[r].second, "ragged row: expected " + std::to_string(width) +
                                             " cells, got " + std::to_string(cells.size()));
    }
    CellRow row;
    for (const auto& c : cells) row.push_back(CellValue::from_raw(decode_md_cell(c)));
    body.push_back(std::move(row));
  }
  return Table::flat(opts.id, std::move(header_row), std::move(body));
}

std::string serialize_markdown_table(const Table& t) {
  if (t.layout().kind != HeaderLayout::Kind::Flat || t.left_header()) {
    throw FormatError(0, "markdown supports flat headers without a left header");
  }
  std::string out;
  auto write_row = [&out](const CellRow& row) {
    out.push_back('|');
    for (const auto& cell : row) {
      out.push_back(' ');
      out += encode_md_cell(cell.canonical());
      out += " |";
    }
    out.push_back('\n');
  };
  write_row(t.top_header()[0]);
  out.push_back('|');
  for (std::size_t j = 0; j < t.width(); ++j) out += " --- |";
  out.push_back('\n');
  for (const auto& row : t.body()) write_row(row);
  return out;
}

}  // namespace

Table parse_table(std::string_view source, TableFormat format, const ParseOptions& opts) {
  switch (format) {
    case TableFormat::Json:
      return parse_json_table(source);
    case TableFormat::Csv:
      return parse_csv_table(source, opts);
    case TableFormat::Markdown:
      return parse_markdown_table(source, opts);
  }
  throw FormatError(0, "unknown table format");
}

std::string serialize_table(const Table& t, TableFormat format) {
  switch (format) {
    case TableFormat::Json:
      return serialize_json_table(t);
    case TableFormat::Markdown:
      return serialize_markdown_table(t);
    case TableFormat::Csv:
      throw FormatError(0, "CSV is a parse-only format");
  }
  throw FormatError(0, "unknown table format");
}

std::string serialize_for_prompt(const Table& t) {
  if (t.layout().kind == HeaderLayout::Kind::Flat && !t.left_header()) {
    return serialize_table(t, TableFormat::Markdown);
  }
  return serialize_table(t, TableFormat::Json);
}

}  // namespace tablerl
