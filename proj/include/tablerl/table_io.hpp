#pragma once

#include <string>
#include <string_view>

#include "tablerl/table.hpp"

namespace tablerl {

enum class TableFormat { Json, Csv, Markdown };

struct ParseOptions {
  /// Number of leading header rows for CSV sources (JSON and markdown carry
  /// their own layout information).
  std::size_t csv_header_depth = 1;
  std::string id;
};

/// Parses a table from `source` in the declared format.
/// JSON: {"id","layout":{"kind","depth"},"top_header","left_header"|null,"body"},
/// cells as string / number / null. CSV: first `csv_header_depth` rows are
/// header rows. Markdown: GitHub pipe tables, flat headers only.
/// Throws FormatError on ragged rows or malformed header declarations.
Table parse_table(std::string_view source, TableFormat format, const ParseOptions& opts = {});

/// Serializes to JSON or markdown (markdown requires a flat header and no left
/// header). parse_table(serialize_table(t, f), f) == t cell-wise.
std::string serialize_table(const Table& t, TableFormat format);

/// Prompt-facing rendering: markdown when the table is flat with no left
/// header, the JSON schema otherwise.
std::string serialize_for_prompt(const Table& t);

}  // namespace tablerl
