#include "tablerl/transform.hpp"

#include <doctest.h>

#include <array>
#include <random>

#include "support/random_tables.hpp"
#include "tablerl/errors.hpp"
#include "tablerl/table_io.hpp"

using namespace tablerl;

namespace {

CellRow cells(std::initializer_list<const char*> raws) {
  CellRow row;
  for (const char* r : raws) row.push_back(CellValue::from_raw(r));
  return row;
}

Table two_by_two() {
  return Table::flat("t", cells({"a", "b"}), {cells({"1", "2"}), cells({"3", "4"})});
}

Table three_by_three() {
  return Table::flat("t", cells({"a", "b", "c"}),
                     {cells({"1", "2", "3"}), cells({"4", "5", "6"}), cells({"7", "8", "9"})});
}

std::string fingerprint(const Table& t) { return serialize_table(t, TableFormat::Json); }

}  // namespace

TEST_CASE("row_swap exchanges body rows") {
  Table out = apply_op(RowSwap{0, 1}, two_by_two());
  CHECK(out.body()[0] == cells({"3", "4"}));
  CHECK(out.body()[1] == cells({"1", "2"}));
}

TEST_CASE("row_swap moves left header rows along") {
  Table t("t", HeaderLayout::flat(), {cells({"a"})}, CellMatrix{cells({"r0"}), cells({"r1"})},
          {cells({"1"}), cells({"2"})});
  Table out = apply_op(RowSwap{0, 1}, t);
  CHECK((*out.left_header())[0] == cells({"r1"}));
  CHECK(out.body()[0] == cells({"2"}));
}

TEST_CASE("column_swap exchanges header and body columns") {
  Table out = apply_op(ColumnSwap{0, 1}, two_by_two());
  CHECK(out.top_header()[0] == cells({"b", "a"}));
  CHECK(out.body()[0] == cells({"2", "1"}));
}

TEST_CASE("deletions remove atomically and keep survivor order") {
  Table out = apply_op(RowDeletion{{0, 2}}, three_by_three());
  REQUIRE(out.height() == 1);
  CHECK(out.body()[0] == cells({"4", "5", "6"}));

  Table cols = apply_op(ColumnDeletion{{1}}, three_by_three());
  CHECK(cols.top_header()[0] == cells({"a", "c"}));
  CHECK(cols.body()[1] == cells({"4", "6"}));
}

TEST_CASE("extracts keep original order regardless of listed order") {
  Table a = apply_op(ExtractRows{{2, 0}}, three_by_three());
  Table b = apply_op(ExtractRows{{0, 2}}, three_by_three());
  CHECK(tables_equal(a, b));
  CHECK(a.body()[0] == cells({"1", "2", "3"}));
  CHECK(a.body()[1] == cells({"7", "8", "9"}));
}

TEST_CASE("extract_rows_having_cells matches the brute-force scan") {
  Table t = Table::flat("medals", cells({"nation", "medal", "year"}),
                        {cells({"usa", "silver", "2004"}), cells({"china", "gold", "2004"}),
                         cells({"japan", "bronze", "2008"}), cells({"france", "gold", "2012"})});
  // Oracle: scan each row for a cell equal to "gold".
  std::vector<std::size_t> expected;
  CellValue wanted = CellValue::from_raw("gold");
  for (std::size_t i = 0; i < t.height(); ++i) {
    for (const CellValue& c : t.body()[i]) {
      if (c == wanted) {
        expected.push_back(i);
        break;
      }
    }
  }
  REQUIRE(expected == std::vector<std::size_t>{1, 3});

  Table out = apply_op(ExtractRowsHavingCells{{"gold"}}, t);
  REQUIRE(out.height() == 2);
  CHECK(out.body()[0] == t.body()[1]);
  CHECK(out.body()[1] == t.body()[3]);
}

TEST_CASE("having_cells compares normalized values") {
  Table t = Table::flat("n", cells({"v", "w"}), {cells({"1,000", "x"}), cells({"5", "y"})});
  Table out = apply_op(ExtractRowsHavingCells{{"1000"}}, t);
  REQUIRE(out.height() == 1);
  CHECK(out.body()[0][1] == CellValue::from_raw("x"));

  Table none = apply_op(ExtractColumnsHavingCells{{"absent"}}, t);
  CHECK(none.width() == 0);
  CHECK(none.height() == 2);
}

TEST_CASE("transpose swaps headers and is an involution") {
  Table t("t", HeaderLayout::flat(), {cells({"a", "b"})}, CellMatrix{cells({"r0"}), cells({"r1"})},
          {cells({"1", "2"}), cells({"3", "4"})});
  Table flipped = apply_op(Transpose{}, t);
  CHECK(flipped.width() == 2);
  CHECK(flipped.height() == 2);
  CHECK(flipped.top_header()[0] == cells({"r0", "r1"}));
  REQUIRE(flipped.left_header().has_value());
  CHECK((*flipped.left_header())[0] == cells({"a"}));
  CHECK(flipped.body()[0] == cells({"1", "3"}));

  CHECK(tables_equal(apply_op(Transpose{}, flipped), t));
}

TEST_CASE("transpose involution holds across random tables") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    Table t = testing::random_table(rng);
    Table back = apply_op(Transpose{}, apply_op(Transpose{}, t));
    CHECK(tables_equal(back, t));
    CHECK(back.layout() == t.layout());
  }
}

TEST_CASE("index errors carry the op and offending index") {
  try {
    apply_op(RowSwap{0, 9}, two_by_two());
    FAIL("expected IndexOutOfRangeError");
  } catch (const IndexOutOfRangeError& e) {
    CHECK(e.op == "row_swap");
    CHECK(e.index == 9);
  }
  CHECK_THROWS_AS(apply_op(ExtractColumns{{0, 0}}, two_by_two()), Error);
}

TEST_CASE("apply_op never mutates its input") {
  std::mt19937_64 rng(12);
  testing::RandomTableOptions opts;
  opts.min_rows = 2;
  opts.min_cols = 2;
  for (int trial = 0; trial < 200; ++trial) {
    Table t = testing::random_table(rng, opts);
    std::string before = fingerprint(t);
    apply_op(Transpose{}, t);
    apply_op(RowSwap{0, 1}, t);
    apply_op(RowDeletion{{0}}, t);
    apply_op(ExtractRowsHavingCells{{"gold"}}, t);
    CHECK(fingerprint(t) == before);
  }
}

TEST_CASE("row_swap involution and identity on random tables") {
  std::mt19937_64 rng(13);
  testing::RandomTableOptions opts;
  opts.min_rows = 2;
  for (int trial = 0; trial < 200; ++trial) {
    Table t = testing::random_table(rng, opts);
    std::size_t i = testing::draw_between(rng, 0, t.height() - 1);
    std::size_t j = testing::draw_between(rng, 0, t.height() - 1);
    Table twice = apply_op(RowSwap{i, j}, apply_op(RowSwap{i, j}, t));
    CHECK(tables_equal(twice, t));
    CHECK(tables_equal(apply_op(RowSwap{i, i}, t), t));
  }
}

TEST_CASE("extracting every index is the identity") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    Table t = testing::random_table(rng);
    std::vector<std::size_t> all_rows(t.height());
    for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
    std::vector<std::size_t> all_cols(t.width());
    for (std::size_t j = 0; j < all_cols.size(); ++j) all_cols[j] = j;
    if (!all_rows.empty()) CHECK(tables_equal(apply_op(ExtractRows{all_rows}, t), t));
    if (!all_cols.empty()) CHECK(tables_equal(apply_op(ExtractColumns{all_cols}, t), t));
  }
}

TEST_CASE("apply_program folds left to right") {
  Table t = three_by_three();
  CHECK(tables_equal(apply_program({}, t), t));
  CHECK(tables_equal(apply_program({{Transpose{}, Transpose{}}}, t), t));

  // Hand-folded: drop column 0, then swap rows 0 and 2.
  Table out = apply_program({{ColumnDeletion{{0}}, RowSwap{0, 2}}}, t);
  CHECK(out.top_header()[0] == cells({"b", "c"}));
  CHECK(out.body()[0] == cells({"8", "9"}));
  CHECK(out.body()[1] == cells({"5", "6"}));
  CHECK(out.body()[2] == cells({"2", "3"}));

  CHECK_FALSE(tables_equal(apply_op(RowSwap{0, 1}, t), t));
}

TEST_CASE("apply_program reports the failing step") {
  try {
    apply_program({{Transpose{}, RowSwap{0, 99}}}, two_by_two());
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("at step 1") != std::string::npos);
  }
}

TEST_CASE("sampler is deterministic and in range") {
  Table t = three_by_three();
  TransformProgram a = sample_program(t, 99);
  TransformProgram b = sample_program(t, 99);
  CHECK(serialize_program(a) == serialize_program(b));
  CHECK(a.ops.size() >= 1);
  CHECK(a.ops.size() <= 3);

  CHECK_THROWS_AS(sample_program(Table::flat("tiny", cells({"a"}), {cells({"1"})}), 1),
                  TableTooSmallError);
}

TEST_CASE("sampled length is uniform on 1..3 within two percent") {
  Table t = three_by_three();
  std::array<int, 4> counts{};
  const int trials = 10000;
  for (int seed = 0; seed < trials; ++seed) counts[sample_program(t, seed).ops.size()]++;
  for (int n = 1; n <= 3; ++n) {
    double freq = static_cast<double>(counts[n]) / trials;
    CHECK(freq > 1.0 / 3.0 - 0.02);
    CHECK(freq < 1.0 / 3.0 + 0.02);
  }
}

TEST_CASE("sampled programs always apply cleanly") {
  std::mt19937_64 rng(15);
  testing::RandomTableOptions opts;
  opts.min_rows = 2;
  opts.min_cols = 2;
  for (int trial = 0; trial < 10000; ++trial) {
    Table t = testing::random_table(rng, opts);
    std::uint64_t seed = rng();
    TransformProgram p = sample_program(t, seed);
    Table result = apply_program(p, t);
    Table replay = apply_program(parse_program(serialize_program(p)), t);
    CHECK(tables_equal(result, replay));
  }
}

TEST_CASE("program line format is bit-exact") {
  TransformProgram p;
  p.ops.push_back(RowSwap{0, 1});
  p.ops.push_back(ExtractRowsHavingCells{{"gold"}});
  p.ops.push_back(Transpose{});
  CHECK(serialize_program(p) == "row_swap 0 1\nextract_rows_having_cells \"gold\"\ntranspose");

  TransformProgram q = parse_program("row_swap 0 1\nextract_rows_having_cells \"gold\"\ntranspose");
  CHECK(serialize_program(q) == serialize_program(p));
}

TEST_CASE("string values round-trip escapes") {
  TransformProgram p;
  p.ops.push_back(ExtractRowsHavingCells{{"he said \"hi\"", "tab\there", "line\nbreak", "back\\"}});
  TransformProgram q = parse_program(serialize_program(p));
  CHECK(serialize_program(q) == serialize_program(p));
  CHECK(std::get<ExtractRowsHavingCells>(q.ops[0]).values[2] == "line\nbreak");
}

TEST_CASE("parse rejects malformed lines with the line number") {
  auto expect_line = [](const char* text, std::size_t line) {
    try {
      parse_program(text);
      FAIL_CHECK("expected FormatError for: " << text);
    } catch (const FormatError& e) {
      CHECK(e.line == line);
    }
  };
  expect_line("warp 1", 0);
  expect_line("row_swap 0", 0);
  expect_line("row_swap 0 1 2", 0);
  expect_line("transpose 1", 0);
  expect_line("row_deletion", 0);
  expect_line("row_deletion 1 1", 0);
  expect_line("extract_rows_having_cells gold", 0);
  expect_line("extract_rows_having_cells \"gold", 0);
  expect_line("row_swap 0 1\nrow_deletion x", 1);
}
