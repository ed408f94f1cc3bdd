#include <cctype>
#include <cstdlib>

#include "tablerl/dsl.hpp"

namespace tablerl {

std::string_view to_string(DslErrorKind kind) {
  switch (kind) {
    case DslErrorKind::UnknownHeader:
      return "unknown_header";
    case DslErrorKind::TypeMismatch:
      return "type_mismatch";
    case DslErrorKind::DivisionByZero:
      return "division_by_zero";
    case DslErrorKind::EmptyAggregate:
      return "empty_aggregate";
  }
  return "unknown_header";
}

namespace {

struct Token {
  enum class Kind { Word, Int, Number, String, Pipe, LParen, RParen, Plus, Minus, Star, Slash,
                    CmpOp };
  Kind kind;
  std::string text;
  double number = 0;
  std::size_t index = 0;
  Cmp cmp = Cmp::Eq;
};

struct ParseFail {
  std::size_t position;
  std::string message;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> lex(std::string_view source) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) { throw ParseFail{tokens.size(), msg}; };
  while (i < source.size()) {
    char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < source.size() && source[i] != '\n') ++i;
      continue;
    }
    if (c == '|') {
      if (i + 1 < source.size() && source[i + 1] == '>') {
        tokens.push_back({Token::Kind::Pipe, "|>"});
        i += 2;
        continue;
      }
      fail("stray '|', expected '|>'");
    }
    if (c == '(') {
      tokens.push_back({Token::Kind::LParen, "("});
      ++i;
      continue;
    }
    if (c == ')') {
      tokens.push_back({Token::Kind::RParen, ")"});
      ++i;
      continue;
    }
    if (c == '+') {
      tokens.push_back({Token::Kind::Plus, "+"});
      ++i;
      continue;
    }
    if (c == '-') {
      tokens.push_back({Token::Kind::Minus, "-"});
      ++i;
      continue;
    }
    if (c == '*') {
      tokens.push_back({Token::Kind::Star, "*"});
      ++i;
      continue;
    }
    if (c == '/') {
      tokens.push_back({Token::Kind::Slash, "/"});
      ++i;
      continue;
    }
    if (c == '=' || c == '!' || c == '<' || c == '>') {
      bool eq = i + 1 < source.size() && source[i + 1] == '=';
      Token t{Token::Kind::CmpOp, std::string(1, c) + (eq ? "=" : "")};
      if (c == '=' && eq) {
        t.cmp = Cmp::Eq;
      } else if (c == '!' && eq) {
        t.cmp = Cmp::Ne;
      } else if (c == '<') {
        t.cmp = eq ? Cmp::Le : Cmp::Lt;
      } else if (c == '>') {
        t.cmp = eq ? Cmp::Ge : Cmp::Gt;
      } else {
        fail(std::string("stray '") + c + "'");
      }
      tokens.push_back(std::move(t));
      i += eq ? 2 : 1;
      continue;
    }
    if (c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < source.size()) {
        char d = source[i];
        if (d == '\\') {
          if (i + 1 >= source.size()) fail("dangling escape in string");
          char e = source[i + 1];
          if (e == '"') {
            text += '"';
          } else if (e == '\\') {
            text += '\\';
          } else if (e == 'n') {
            text += '\n';
          } else if (e == 't') {
            text += '\t';
          } else {
            fail(std::string("unknown escape \\") + e);
          }
          i += 2;
          continue;
        }
        if (d == '"') {
          closed = true;
          ++i;
          break;
        }
        text += d;
        ++i;
      }
      if (!closed) fail("unterminated string");
      tokens.push_back({Token::Kind::String, std::move(text)});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < source.size() && std::isdigit(static_cast<unsigned char>(source[i]))) ++i;
      bool fractional = false;
      if (i + 1 < source.size() && source[i] == '.' &&
          std::isdigit(static_cast<unsigned char>(source[i + 1]))) {
        fractional = true;
        ++i;
        while (i < source.size() && std::isdigit(static_cast<unsigned char>(source[i]))) ++i;
      }
      if (i < source.size() && word_char(source[i])) fail("malformed number");
      std::string text(source.substr(start, i - start));
      Token t{fractional ? Token::Kind::Number : Token::Kind::Int, text};
      t.number = std::strtod(text.c_str(), nullptr);
      if (!fractional) {
        try {
          t.index = std::stoull(text);
        } catch (const std::out_of_range&) {
          fail("integer literal too large");
        }
      }
      tokens.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < source.size() && word_char(source[i])) ++i;
      tokens.push_back({Token::Kind::Word, std::string(source.substr(start, i - start))});
      continue;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  DslProgram parse() {
    DslProgram program;
    std::vector<std::size_t> stage_starts;
    stage_starts.push_back(pos_);
    program.stages.push_back(parse_stage());
    while (at_kind(Token::Kind::Pipe)) {
      ++pos_;
      stage_starts.push_back(pos_);
      program.stages.push_back(parse_stage());
    }
    if (pos_ != tokens_.size()) fail("expected '|>' or end of program");

    for (std::size_t s = 0; s + 1 < program.stages.size(); ++s) {
      if (std::holds_alternative<EmitStage>(program.stages[s])) {
        throw ParseFail{stage_starts[s], "emit must be the final stage"};
      }
    }
    if (!std::holds_alternative<EmitStage>(program.stages.back())) {
      throw ParseFail{tokens_.size(), "program must end with an emit stage"};
    }
    return program;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) { throw ParseFail{pos_, msg}; }

  bool at_kind(Token::Kind k) const { return pos_ < tokens_.size() && tokens_[pos_].kind == k; }
  bool at_word(std::string_view w) const {
    return at_kind(Token::Kind::Word) && tokens_[pos_].text == w;
  }
  const Token& take() {
    if (pos_ >= tokens_.size()) fail("unexpected end of program");
    return tokens_[pos_++];
  }

  HeaderKey parse_key() {
    if (at_kind(Token::Kind::String)) return HeaderKey{take().text};
    if (at_kind(Token::Kind::Int)) return HeaderKey{take().index};
    fail("expected a quoted header label or a column index");
  }

  Cmp parse_cmp() {
    if (at_kind(Token::Kind::CmpOp)) return take().cmp;
    fail("expected a comparison operator");
  }

  CellValue parse_literal() {
    if (at_kind(Token::Kind::Minus)) {
      ++pos_;
      if (at_kind(Token::Kind::Int) || at_kind(Token::Kind::Number)) {
        return CellValue::number(-take().number);
      }
      fail("expected a number after '-'");
    }
    if (at_kind(Token::Kind::Int) || at_kind(Token::Kind::Number)) {
      return CellValue::number(take().number);
    }
    if (at_kind(Token::Kind::String)) return CellValue::from_raw(take().text);
    fail("expected a literal");
  }

  std::vector<std::size_t> parse_index_args(std::string_view op, std::size_t exact = 0) {
    std::vector<std::size_t> indices;
    while (at_kind(Token::Kind::Int)) {
      std::size_t idx = tokens_[pos_].index;
      for (std::size_t prev : indices) {
        if (prev == idx) fail("duplicate index in " + std::string(op));
      }
      indices.push_back(idx);
      ++pos_;
    }
    if (indices.empty()) fail(std::string(op) + " needs at least one index");
    if (exact != 0 && indices.size() != exact) {
      fail(std::string(op) + " takes exactly " + std::to_string(exact) + " indices");
    }
    return indices;
  }

  std::vector<std::string> parse_string_args(std::string_view op) {
    std::vector<std::string> values;
    while (at_kind(Token::Kind::String)) values.push_back(take().text);
    if (values.empty()) fail(std::string(op) + " needs at least one quoted value");
    return values;
  }

  DslStage parse_stage() {
    if (!at_kind(Token::Kind::Word)) fail("expected a stage");
    std::string word = take().text;

    if (word == "col" || word == "row") return SelectStage{word == "col", parse_key()};

    if (word == "filter") {
      FilterStage stage;
      if (at_word("it")) {
        ++pos_;
        stage.on_col = false;
      } else if (at_word("col")) {
        ++pos_;
        stage.on_col = true;
        stage.col_key = parse_key();
      } else {
        fail("filter needs 'it' or 'col'");
      }
      stage.cmp = parse_cmp();
      stage.rhs = parse_literal();
      return stage;
    }

    if (word == "count") return AggregateStage{Agg::Count};
    if (word == "sum") return AggregateStage{Agg::Sum};
    if (word == "avg") return AggregateStage{Agg::Avg};
    if (word == "min") return AggregateStage{Agg::Min};
    if (word == "max") return AggregateStage{Agg::Max};

    if (word == "sort") {
      SortStage stage;
      if (at_word("asc")) {
        stage.ascending = true;
      } else if (at_word("desc")) {
        stage.ascending = false;
      } else {
        fail("sort needs 'asc' or 'desc'");
      }
      ++pos_;
      if (!at_word("by")) fail("sort needs 'by'");
      ++pos_;
      if (!at_word("col")) fail("sort orders by 'col'");
      ++pos_;
      stage.col_key = parse_key();
      return stage;
    }

    if (word == "row_swap" || word == "column_swap") {
      auto indices = parse_index_args(word, 2);
      if (word == "row_swap") return TransformStage{RowSwap{indices[0], indices[1]}};
      return TransformStage{ColumnSwap{indices[0], indices[1]}};
    }
    if (word == "row_deletion") return TransformStage{RowDeletion{parse_index_args(word)}};
    if (word == "column_deletion") return TransformStage{ColumnDeletion{parse_index_args(word)}};
    if (word == "extract_rows") return TransformStage{ExtractRows{parse_index_args(word)}};
    if (word == "extract_columns") return TransformStage{ExtractColumns{parse_index_args(word)}};
    if (word == "extract_rows_having_cells") {
      return TransformStage{ExtractRowsHavingCells{parse_string_args(word)}};
    }
    if (word == "extract_columns_having_cells") {
      return TransformStage{ExtractColumnsHavingCells{parse_string_args(word)}};
    }
    if (word == "transpose") return TransformStage{Transpose{}};

    if (word == "emit") return EmitStage{parse_expr()};

    --pos_;
    fail("unknown stage '" + word + "'");
  }

  std::shared_ptr<const Expr> parse_expr() {
    auto lhs = parse_term();
    while (at_kind(Token::Kind::Plus) || at_kind(Token::Kind::Minus)) {
      bool add = take().kind == Token::Kind::Plus;
      auto rhs = parse_term();
      auto node = std::make_shared<Expr>();
      node->kind = add ? Expr::Kind::Add : Expr::Kind::Sub;
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      lhs = std::move(node);
    }
    return lhs;
  }

  std::shared_ptr<const Expr> parse_term() {
    auto lhs = parse_factor();
    while (at_kind(Token::Kind::Star) || at_kind(Token::Kind::Slash)) {
      bool mul = take().kind == Token::Kind::Star;
      auto rhs = parse_factor();
      auto node = std::make_shared<Expr>();
      node->kind = mul ? Expr::Kind::Mul : Expr::Kind::Div;
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      lhs = std::move(node);
    }
    return lhs;
  }

  std::shared_ptr<const Expr> parse_factor() {
    auto node = std::make_shared<Expr>();
    if (at_kind(Token::Kind::Minus)) {
      ++pos_;
      node->kind = Expr::Kind::Neg;
      node->lhs = parse_factor();
      return node;
    }
    if (at_kind(Token::Kind::Int) || at_kind(Token::Kind::Number)) {
      node->kind = Expr::Kind::Number;
      node->number = take().number;
      return node;
    }
    if (at_kind(Token::Kind::String)) {
      node->kind = Expr::Kind::String;
      node->text = take().text;
      return node;
    }
    if (at_word("it")) {
      ++pos_;
      node->kind = Expr::Kind::It;
      return node;
    }
    if (at_word("table")) {
      ++pos_;
      node->kind = Expr::Kind::TableRef;
      return node;
    }
    if (at_kind(Token::Kind::LParen)) {
      ++pos_;
      auto inner = parse_expr();
      if (!at_kind(Token::Kind::RParen)) fail("expected ')'");
      ++pos_;
      return inner;
    }
    fail("expected an expression");
  }
};

}  // namespace

CompileResult compile(std::string_view source) {
  CompileResult result;
  try {
    Parser parser(lex(source));
    DslProgram program = parser.parse();
    result.report.ok = true;
    result.program = std::move(program);
  } catch (const ParseFail& f) {
    result.report.ok = false;
    result.report.error = CompileReport::Failure{f.position, f.message};
  }
  return result;
}

bool is_constant_emit(const DslProgram& p) {
  struct Walker {
    static bool references_input(const Expr& e) {
      if (e.kind == Expr::Kind::It || e.kind == Expr::Kind::TableRef) return true;
      if (e.lhs && references_input(*e.lhs)) return true;
      if (e.rhs && references_input(*e.rhs)) return true;
      return false;
    }
  };
  const auto* emit = std::get_if<EmitStage>(&p.stages.back());
  if (emit == nullptr || !emit->expr) return false;
  return !Walker::references_input(*emit->expr);
}

}  // namespace tablerl
