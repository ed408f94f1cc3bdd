#include "tablerl/prompts.hpp"

#include <fstream>
#include <sstream>

#include "tablerl/errors.hpp"
#include "tablerl/table_io.hpp"

namespace tablerl {

namespace {

constexpr std::string_view kTextAnswerTemplate =
    "You answer questions about tables.\n"
    "\n"
    "{demonstration}Table:\n"
    "{table}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Reason step by step, then give only the final answer wrapped exactly as\n"
    "<answer>...</answer>. Separate multiple answers with commas. Write nothing\n"
    "after the closing tag.\n";

constexpr std::string_view kProgramAnswerTemplate =
    "You answer questions about tables by writing a pipeline program.\n"
    "\n"
    "The program is stages joined by |>, ending with an emit stage:\n"
    "  col \"name\" | col N | row \"label\" | row N    select one column or row\n"
    "  filter it == LIT | filter col \"name\" >= LIT  keep matching items (==, !=, <, <=, >, >=)\n"
    "  count | sum | avg | min | max                 aggregate the current list\n"
    "  sort asc col \"name\" | sort desc col N        order rows by a column\n"
    "  row_swap I J | column_swap I J\n"
    "  row_deletion I... | column_deletion I...\n"
    "  extract_rows I... | extract_columns I...\n"
    "  extract_rows_having_cells \"v\"... | extract_columns_having_cells \"v\"...\n"
    "  transpose\n"
    "  emit EXPR   with numbers, strings, it, table, + - * / and parentheses\n"
    "Comments run from # to the end of the line.\n"
    "\n"
    "{demonstration}Table:\n"
    "{table}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Reason step by step, then give only the program wrapped exactly as\n"
    "<code_solution>...</code_solution>. Write nothing after the closing tag.\n";

constexpr std::string_view kMixedTemplate =
    "You answer questions about tables, either directly or by writing a\n"
    "pipeline program that computes the answer.\n"
    "\n"
    "The program is stages joined by |>, ending with an emit stage:\n"
    "  col \"name\" | col N | row \"label\" | row N    select one column or row\n"
    "  filter it == LIT | filter col \"name\" >= LIT  keep matching items (==, !=, <, <=, >, >=)\n"
    "  count | sum | avg | min | max                 aggregate the current list\n"
    "  sort asc col \"name\" | sort desc col N        order rows by a column\n"
    "  row_swap I J | column_swap I J\n"
    "  row_deletion I... | column_deletion I...\n"
    "  extract_rows I... | extract_columns I...\n"
    "  extract_rows_having_cells \"v\"... | extract_columns_having_cells \"v\"...\n"
    "  transpose\n"
    "  emit EXPR   with numbers, strings, it, table, + - * / and parentheses\n"
    "Comments run from # to the end of the line.\n"
    "\n"
    "{demonstration}Table:\n"
    "{table}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Reason step by step. Prefer a program when the answer needs computation\n"
    "over the table; answer directly when reading it off is enough. Then give\n"
    "only one of the two forms, wrapped exactly as\n"
    "<code_solution>...</code_solution> or <answer>...</answer>, and write\n"
    "nothing after the closing tag.\n";

constexpr std::string_view kRewriteTemplate =
    "You rewrite raw table transformation scripts into fluent pipeline\n"
    "programs.\n"
    "\n"
    "Source table:\n"
    "{table}\n"
    "\n"
    "Target table:\n"
    "{target_table}\n"
    "\n"
    "Raw operation sequence:\n"
    "{program}\n"
    "\n"
    "Rewrite the sequence as one pipeline program that turns the source table\n"
    "into the target table. Use stages joined by |> and end with emit table.\n"
    "Reply with only the program wrapped exactly as\n"
    "<code_solution>...</code_solution>.\n";

constexpr std::string_view kLayoutTaskTemplate =
    "You write pipeline programs that transform tables.\n"
    "\n"
    "Source table:\n"
    "{table}\n"
    "\n"
    "Target table:\n"
    "{target_table}\n"
    "\n"
    "Write one pipeline program that turns the source table into the target\n"
    "table. Use stages joined by |> and end with emit table. Reply with only\n"
    "the program wrapped exactly as <code_solution>...</code_solution>.\n";

void replace_all(std::string& text, std::string_view placeholder, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
}

}  // namespace

std::string_view prompt_template(PromptKind kind) {
  switch (kind) {
    case PromptKind::TextAnswer: return kTextAnswerTemplate;
    case PromptKind::ProgramAnswer: return kProgramAnswerTemplate;
    case PromptKind::Mixed: return kMixedTemplate;
    case PromptKind::RewriteProgram: return kRewriteTemplate;
    case PromptKind::LayoutTask: return kLayoutTaskTemplate;
  }
  return kMixedTemplate;
}

std::string_view prompt_template_name(PromptKind kind) {
  switch (kind) {
    case PromptKind::TextAnswer: return "text_answer.txt";
    case PromptKind::ProgramAnswer: return "program_answer.txt";
    case PromptKind::Mixed: return "mixed.txt";
    case PromptKind::RewriteProgram: return "rewrite_program.txt";
    case PromptKind::LayoutTask: return "layout_task.txt";
  }
  return "mixed.txt";
}

std::string build_prompt(PromptKind kind, const PromptRequest& request,
                         const PromptOptions& options) {
  if (request.table == nullptr) throw Error("prompt needs a table");
  bool qa = kind == PromptKind::TextAnswer || kind == PromptKind::ProgramAnswer ||
            kind == PromptKind::Mixed;
  bool pair = kind == PromptKind::RewriteProgram || kind == PromptKind::LayoutTask;
  if (qa && request.question.empty()) throw Error("prompt needs a question");
  if (pair && request.target == nullptr) throw Error("prompt needs a target table");
  if (kind == PromptKind::RewriteProgram && request.program_lines.empty()) {
    throw Error("rewrite prompt needs the raw program");
  }

  std::string text;
  if (!options.template_dir.empty()) {
    std::string path = options.template_dir + "/" + std::string(prompt_template_name(kind));
    std::ifstream in(path);
    if (!in) throw Error("cannot open prompt template " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  } else {
    text = std::string(prompt_template(kind));
  }

  if (qa) {
    std::string demonstration;
    if (request.demonstration.has_value()) demonstration = *request.demonstration + "\n\n";
    replace_all(text, "{demonstration}", demonstration);
    replace_all(text, "{table}",
                serialize_for_prompt(truncate_rows(*request.table, options.truncate_k)));
    replace_all(text, "{question}", request.question);
  } else {
    replace_all(text, "{table}", serialize_for_prompt(*request.table));
    replace_all(text, "{target_table}", serialize_for_prompt(*request.target));
    replace_all(text, "{program}", request.program_lines);
  }

  if (text.size() / 4 >= options.max_tokens) {
    throw BudgetExceededError("prompt of " + std::to_string(text.size()) +
                              " characters overflows the budget of " +
                              std::to_string(options.max_tokens) + " tokens");
  }
  return text;
}

}  // namespace tablerl
