#include "tablerl/dsl.hpp"

#include <doctest.h>

#include <random>

#include "support/random_tables.hpp"
#include "tablerl/errors.hpp"

using namespace tablerl;

namespace {

CellRow cells(std::initializer_list<const char*> raws) {
  CellRow row;
  for (const char* r : raws) row.push_back(CellValue::from_raw(r));
  return row;
}

Table standings() {
  return Table::flat("standings", cells({"team", "pts", "year", "division"}),
                     {cells({"ann", "3", "2008", "east"}), cells({"bob", "5", "2008", "west"}),
                      cells({"cat", "7", "2012", "east"}), cells({"dan", "", "2012", "west"}),
                      cells({"eve", "4", "2008", "east"})});
}

DslProgram compiled(const std::string& source) {
  CompileResult r = compile(source);
  REQUIRE_MESSAGE(r.report.ok, "failed to compile: " << source << " ("
                                                     << (r.report.error ? r.report.error->message
                                                                        : std::string())
                                                     << ")");
  return *r.program;
}

DslValue run(const std::string& source, const Table& t) { return execute(compiled(source), t); }

double scalar_of(const DslValue& v) {
  REQUIRE(std::holds_alternative<CellValue>(v));
  const CellValue& c = std::get<CellValue>(v);
  REQUIRE(c.is_number());
  return c.as_number();
}

DslErrorKind error_kind(const std::string& source, const Table& t, std::size_t expected_stage) {
  try {
    execute(compiled(source), t);
  } catch (const DslRuntimeError& e) {
    CHECK(e.stage == expected_stage);
    return e.kind;
  }
  FAIL("expected DslRuntimeError from: " << source);
  return DslErrorKind::UnknownHeader;
}

}  // namespace

TEST_CASE("compile accepts the pipeline grammar") {
  CHECK(compile("filter col \"Year\" == 2008 |> count |> emit it").report.ok);
  CHECK(compile("col \"pts\" |> sum |> emit it").report.ok);
  CHECK(compile("sort desc by col 2 |> extract_rows 0 1 |> emit table").report.ok);
  CHECK(compile("emit (1 + 2) * 3 - -4").report.ok);
  CHECK(compile("extract_rows_having_cells \"a\" \"b\" |> emit table").report.ok);
}

TEST_CASE("compile reports the failing token position") {
  CompileResult truncated = compile("filter col \"Year\" ==");
  REQUIRE_FALSE(truncated.report.ok);
  REQUIRE(truncated.report.error.has_value());
  CHECK(truncated.report.error->position == 4);
  CHECK_FALSE(truncated.program.has_value());

  CompileResult empty = compile("");
  REQUIRE_FALSE(empty.report.ok);
  CHECK(empty.report.error->position == 0);

  CompileResult no_emit = compile("col \"pts\" |> sum");
  REQUIRE_FALSE(no_emit.report.ok);
  CHECK(no_emit.report.error->position == 4);

  CompileResult early_emit = compile("emit it |> count");
  REQUIRE_FALSE(early_emit.report.ok);
  CHECK(early_emit.report.error->position == 0);

  CHECK_FALSE(compile("emit it |> emit it").report.ok);
  CHECK_FALSE(compile("frobnicate |> emit it").report.ok);
  CHECK_FALSE(compile("sort asc col \"x\" |> emit table").report.ok);
  CHECK_FALSE(compile("col \"a\" |> emit it extra").report.ok);
  CHECK_FALSE(compile("emit \"unterminated").report.ok);
  CHECK_FALSE(compile("emit 3.").report.ok);
  CHECK_FALSE(compile("emit 12abc").report.ok);
  CHECK_FALSE(compile("col \"a\" | sum |> emit it").report.ok);

  CompileResult duplicate = compile("row_deletion 1 1 |> emit table");
  REQUIRE_FALSE(duplicate.report.ok);
  CHECK(duplicate.report.error->position == 2);

  CHECK_FALSE(compile("row_swap 0 |> emit table").report.ok);
  CHECK_FALSE(compile("extract_rows_having_cells |> emit table").report.ok);
}

TEST_CASE("compile never executes and is pure parsing") {
  CHECK(compile("col \"no_such_column\" |> sum |> emit it / 0").report.ok);
}

TEST_CASE("column aggregation matches a straight-line oracle") {
  // Oracle: direct loop over the fixture's pts values, skipping the blank.
  double expected = 3 + 5 + 7 + 4;
  CHECK(scalar_of(run("col \"pts\" |> sum |> emit it", standings())) == expected);
  CHECK(scalar_of(run("col \"pts\" |> avg |> emit it", standings())) == expected / 4.0);
  CHECK(scalar_of(run("col \"pts\" |> min |> emit it", standings())) == 3);
  CHECK(scalar_of(run("col \"pts\" |> max |> emit it", standings())) == 7);
  CHECK(scalar_of(run("col \"pts\" |> count |> emit it", standings())) == 5);
  CHECK(scalar_of(run("count |> emit it", standings())) == 5);
}

TEST_CASE("filters restrict rows and lists") {
  CHECK(scalar_of(run("filter col \"year\" == 2008 |> count |> emit it", standings())) == 3);
  CHECK(scalar_of(run("filter col \"division\" == \"east\" |> count |> emit it", standings())) ==
        3);
  CHECK(scalar_of(run("filter col \"year\" != 2008 |> count |> emit it", standings())) == 2);
  CHECK(scalar_of(run("col \"pts\" |> filter it >= 4 |> count |> emit it", standings())) == 3);
  CHECK(scalar_of(run("col \"pts\" |> filter it == \"\" |> count |> emit it", standings())) == 1);
  CHECK(scalar_of(run("filter col \"pts\" < 6 |> count |> emit it", standings())) == 3);
}

TEST_CASE("empty aggregate is an error, empty sum is zero") {
  CHECK(error_kind("col \"pts\" |> filter it > 100 |> max |> emit it", standings(), 2) ==
        DslErrorKind::EmptyAggregate);
  CHECK(scalar_of(run("col \"pts\" |> filter it > 100 |> sum |> emit it", standings())) == 0);
}

TEST_CASE("runtime error kinds and stages") {
  CHECK(error_kind("col \"missing\" |> sum |> emit it", standings(), 0) ==
        DslErrorKind::UnknownHeader);
  CHECK(error_kind("col 9 |> sum |> emit it", standings(), 0) == DslErrorKind::UnknownHeader);
  CHECK(error_kind("row 9 |> emit it", standings(), 0) == DslErrorKind::UnknownHeader);
  CHECK(error_kind("col \"team\" |> sum |> emit it", standings(), 1) ==
        DslErrorKind::TypeMismatch);
  CHECK(error_kind("filter col \"team\" > 3 |> count |> emit it", standings(), 0) ==
        DslErrorKind::TypeMismatch);
  CHECK(error_kind("filter it > 3 |> count |> emit it", standings(), 0) ==
        DslErrorKind::TypeMismatch);
  CHECK(error_kind("col \"pts\" |> sort asc by col 0 |> emit it", standings(), 1) ==
        DslErrorKind::TypeMismatch);
  CHECK(error_kind("emit 1 / 0", standings(), 0) == DslErrorKind::DivisionByZero);
  CHECK(error_kind("col \"pts\" |> sum |> emit table", standings(), 2) ==
        DslErrorKind::TypeMismatch);
  CHECK(error_kind("emit it + 1", standings(), 0) == DslErrorKind::TypeMismatch);
  CHECK(error_kind("row_swap 0 9 |> emit table", standings(), 0) == DslErrorKind::UnknownHeader);
}

TEST_CASE("row selection works by index and by left-header label") {
  DslValue row = run("row 2 |> emit it", standings());
  REQUIRE(std::holds_alternative<std::vector<CellValue>>(row));
  CHECK(std::get<std::vector<CellValue>>(row) == cells({"cat", "7", "2012", "east"}));

  Table sided("s", HeaderLayout::flat(), {cells({"a", "b"})},
              CellMatrix{cells({"north"}), cells({"south"})},
              {cells({"1", "2"}), cells({"3", "4"})});
  CHECK(scalar_of(run("row \"south\" |> sum |> emit it", sided)) == 7);
  CHECK(error_kind("row \"west\" |> emit it", sided, 0) == DslErrorKind::UnknownHeader);
  CHECK(error_kind("row \"north\" |> emit it", standings(), 0) == DslErrorKind::UnknownHeader);
}

TEST_CASE("hierarchical headers resolve by path or unique leaf") {
  Table sales("sales", HeaderLayout::bi_level(),
              {cells({"2023", "2023", "2024"}), cells({"q1", "q2", "q1"})}, std::nullopt,
              {cells({"1", "2", "4"}), cells({"10", "20", "40"})});
  CHECK(scalar_of(run("col \"2023 / q1\" |> sum |> emit it", sales)) == 11);
  CHECK(scalar_of(run("col \"q2\" |> sum |> emit it", sales)) == 22);
  CHECK(error_kind("col \"q1\" |> sum |> emit it", sales, 0) == DslErrorKind::UnknownHeader);
}

TEST_CASE("sort orders rows with empties last and is stable") {
  std::vector<std::string> by_pts = extract_answer(
      run("sort desc by col \"pts\" |> col \"team\" |> emit it", standings()));
  CHECK(by_pts == std::vector<std::string>{"cat", "bob", "eve", "ann", "dan"});

  std::vector<std::string> by_year = extract_answer(
      run("sort asc by col \"year\" |> col \"team\" |> emit it", standings()));
  CHECK(by_year == std::vector<std::string>{"ann", "bob", "eve", "cat", "dan"});

  std::vector<std::string> by_team = extract_answer(
      run("sort desc by col \"team\" |> col \"team\" |> emit it", standings()));
  CHECK(by_team == std::vector<std::string>{"eve", "dan", "cat", "bob", "ann"});
}

TEST_CASE("emit arithmetic follows precedence") {
  Table t = standings();
  CHECK(scalar_of(run("emit 1 + 2 * 3", t)) == 7);
  CHECK(scalar_of(run("emit (1 + 2) * 3", t)) == 9);
  CHECK(scalar_of(run("emit -2 - -3", t)) == 1);
  CHECK(scalar_of(run("emit 10 / 4", t)) == 2.5);
  CHECK(scalar_of(run("col \"pts\" |> sum |> emit it + 1", t)) == 20);
  CHECK(scalar_of(run("col \"pts\" |> sum |> emit it / 2 + 0.5", t)) == 10);
}

TEST_CASE("comments are stripped to end of line") {
  const char* source =
      "col \"pts\" # take the points column\n"
      "|> sum     # add them up\n"
      "|> emit it # hand the total back";
  CHECK(scalar_of(run(source, standings())) == 19);
}

TEST_CASE("transform stages delegate to apply_op") {
  Table t = standings();
  DslValue flipped = run("transpose |> emit table", t);
  REQUIRE(std::holds_alternative<Table>(flipped));
  CHECK(tables_equal(std::get<Table>(flipped), apply_op(Transpose{}, t)));

  std::mt19937_64 rng(21);
  testing::RandomTableOptions opts;
  opts.min_rows = 2;
  opts.min_cols = 2;
  for (int trial = 0; trial < 300; ++trial) {
    Table rt = testing::random_table(rng, opts);
    TransformProgram p = sample_program(rt, rng());
    std::string source;
    for (const TransformOp& op : p.ops) {
      // The transform line format is stage syntax verbatim.
      TransformProgram one;
      one.ops.push_back(op);
      source += serialize_program(one) + " |> ";
    }
    source += "emit table";
    DslValue out = execute(compiled(source), rt);
    REQUIRE(std::holds_alternative<Table>(out));
    CHECK(tables_equal(std::get<Table>(out), apply_program(p, rt)));
  }
}

TEST_CASE("extract_answer normalizes every shape") {
  CHECK(extract_answer(CellValue::number(15)) == std::vector<std::string>{"15"});
  CHECK(extract_answer(CellValue::number(1000.0)) == std::vector<std::string>{"1000"});
  CHECK(extract_answer(std::vector<CellValue>{CellValue::from_raw("a"), CellValue::number(2)}) ==
        std::vector<std::string>{"a", "2"});

  Table t = Table::flat("x", cells({"h1", "h2"}), {cells({"A", "1,000"}), cells({"", "2"})});
  CHECK(extract_answer(DslValue{t}) == std::vector<std::string>{"a", "1000", "", "2"});
}

TEST_CASE("constant emits are detectable") {
  CHECK(is_constant_emit(compiled("emit 5")));
  CHECK(is_constant_emit(compiled("emit (3 * 2) - 1")));
  CHECK(is_constant_emit(compiled("col \"pts\" |> sum |> emit 5")));
  CHECK(is_constant_emit(compiled("emit \"yes\"")));
  CHECK_FALSE(is_constant_emit(compiled("emit it")));
  CHECK_FALSE(is_constant_emit(compiled("emit table")));
  CHECK_FALSE(is_constant_emit(compiled("emit 5 + it")));
  CHECK_FALSE(is_constant_emit(compiled("col \"pts\" |> sum |> emit it")));
}

TEST_CASE("execution is deterministic") {
  Table t = standings();
  DslProgram p = compiled("sort desc by col \"pts\" |> col \"team\" |> emit it");
  CHECK(extract_answer(execute(p, t)) == extract_answer(execute(p, t)));
}
