#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tablerl/errors.hpp"
#include "tablerl/table.hpp"
#include "tablerl/transform.hpp"

namespace tablerl {

/// Execution result: a single cell, a flat list of cells, or a table.
using DslValue = std::variant<CellValue, std::vector<CellValue>, Table>;

enum class DslErrorKind { UnknownHeader, TypeMismatch, DivisionByZero, EmptyAggregate };

std::string_view to_string(DslErrorKind kind);

class DslRuntimeError : public Error {
 public:
  DslRuntimeError(DslErrorKind kind, std::size_t stage, const std::string& detail)
      : Error(std::string(to_string(kind)) + " at stage " + std::to_string(stage) + ": " + detail),
        kind(kind),
        stage(stage) {}
  DslErrorKind kind;
  std::size_t stage;
};

/// Pipeline AST. Stages run left to right over one value that starts as the
/// input table; `emit` is always the last stage.
enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge };
enum class Agg { Count, Sum, Avg, Min, Max };

/// Column or row address: quoted header label or zero-based index.
using HeaderKey = std::variant<std::string, std::size_t>;

struct Expr {
  enum class Kind { Number, String, It, TableRef, Neg, Add, Sub, Mul, Div };
  Kind kind = Kind::Number;
  double number = 0;
  std::string text;
  std::shared_ptr<const Expr> lhs, rhs;
};

struct SelectStage {
  bool is_col = true;
  HeaderKey key;
};
struct FilterStage {
  bool on_col = false;  // false: `filter it`, true: `filter col KEY`
  HeaderKey col_key;
  Cmp cmp = Cmp::Eq;
  CellValue rhs;
};
struct AggregateStage {
  Agg agg = Agg::Count;
};
struct SortStage {
  bool ascending = true;
  HeaderKey col_key;
};
struct TransformStage {
  TransformOp op;
};
struct EmitStage {
  std::shared_ptr<const Expr> expr;
};

using DslStage =
    std::variant<SelectStage, FilterStage, AggregateStage, SortStage, TransformStage, EmitStage>;

struct DslProgram {
  std::vector<DslStage> stages;  // non-empty; exactly one emit, and it is last
};

struct CompileReport {
  bool ok = false;
  struct Failure {
    std::size_t position = 0;  // token index; end-of-input errors point one past the last token
    std::string message;
  };
  std::optional<Failure> error;
};

struct CompileResult {
  CompileReport report;
  std::optional<DslProgram> program;  // present iff report.ok
};

/// Parses `source` against the pipeline grammar. Never executes anything;
/// failures land in the report, not in exceptions.
CompileResult compile(std::string_view source);

/// Runs a compiled program over `t`. Deterministic, no I/O, no clock, no
/// randomness. Raises DslRuntimeError with the failing stage index; transform
/// stages map out-of-range indices to unknown_header.
DslValue execute(const DslProgram& p, const Table& t);

/// True when the emit expression contains no `it` or `table` reference, i.e.
/// the program's output cannot depend on the input table.
bool is_constant_emit(const DslProgram& p);

/// Bridges executor output to exact-match scoring: scalar -> one normalized
/// string, list -> normalized strings in order, table -> row-major body cells.
std::vector<std::string> extract_answer(const DslValue& v);

}  // namespace tablerl
