#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tablerl/table.hpp"

namespace tablerl {

/// Layout operations. Index lists are zero-based body coordinates and must be
/// duplicate-free; extract/delete sets are applied atomically, survivors keep
/// their original order.
struct RowSwap {
  std::size_t i = 0, j = 0;
};
struct ColumnSwap {
  std::size_t i = 0, j = 0;
};
struct RowDeletion {
  std::vector<std::size_t> indices;
};
struct ColumnDeletion {
  std::vector<std::size_t> indices;
};
struct ExtractRows {
  std::vector<std::size_t> indices;
};
struct ExtractColumns {
  std::vector<std::size_t> indices;
};
/// Keeps rows whose body contains at least one cell equal (after cell
/// normalization) to at least one of `values`.
struct ExtractRowsHavingCells {
  std::vector<std::string> values;
};
struct ExtractColumnsHavingCells {
  std::vector<std::string> values;
};
struct Transpose {};

using TransformOp =
    std::variant<RowSwap, ColumnSwap, RowDeletion, ColumnDeletion, ExtractRows, ExtractColumns,
                 ExtractRowsHavingCells, ExtractColumnsHavingCells, Transpose>;

struct TransformProgram {
  std::vector<TransformOp> ops;
};

/// Canonical lowercase name, e.g. "extract_rows_having_cells".
std::string_view op_name(const TransformOp& op);

/// Applies one op, returning a new table; the input is never modified.
/// Out-of-range indices raise IndexOutOfRangeError, duplicate indices raise
/// Error. Ops that keep zero rows or columns yield a valid empty-body table.
Table apply_op(const TransformOp& op, const Table& t);

/// Left fold of apply_op over ops; the empty program is the identity.
/// Errors from step k are rethrown with " at step k" appended.
Table apply_program(const TransformProgram& p, const Table& t);

/// Deterministically samples a program of 1..3 ops, each valid on the
/// intermediate table it receives. Requires at least 2 rows and 2 columns
/// (TableTooSmallError otherwise). The result is re-validated by a dry run.
TransformProgram sample_program(const Table& t, std::uint64_t seed);

/// One op per line: lowercase names, space-separated arguments, strings
/// double-quoted with backslash escapes. No trailing newline.
std::string serialize_program(const TransformProgram& p);

/// Inverse of serialize_program; blank lines are skipped. Raises
/// FormatError(line, reason) on malformed input.
TransformProgram parse_program(std::string_view text);

}  // namespace tablerl
