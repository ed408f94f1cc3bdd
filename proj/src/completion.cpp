#include "tablerl/completion.hpp"

#include <cctype>
#include <vector>

namespace tablerl {

namespace {

constexpr std::string_view kProgramOpen = "<code_solution>";
constexpr std::string_view kProgramClose = "</code_solution>";
constexpr std::string_view kTextOpen = "<answer>";
constexpr std::string_view kTextClose = "</answer>";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

bool whitespace_only(std::string_view s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Completion parse_completion(std::string_view raw) {
  Completion c;
  c.raw = std::string(raw);

  std::size_t program_at = raw.find(kProgramOpen);
  std::size_t text_at = raw.find(kTextOpen);
  if (program_at == std::string_view::npos && text_at == std::string_view::npos) {
    c.trace = c.raw;
    return c;  // no answer region at all
  }

  bool program_form = program_at < text_at;
  std::size_t open_at = program_form ? program_at : text_at;
  std::string_view open = program_form ? kProgramOpen : kTextOpen;
  std::string_view close = program_form ? kProgramClose : kTextClose;
  c.trace = std::string(raw.substr(0, open_at));

  std::size_t body_at = open_at + open.size();
  std::size_t close_at = raw.find(close, body_at);
  if (close_at == std::string_view::npos) return c;  // unterminated answer region

  std::string_view tail = raw.substr(close_at + close.size());
  if (!whitespace_only(tail)) return c;

  // Exactly one pair of the chosen kind and none of the other kind, anywhere.
  std::string_view other_open = program_form ? kTextOpen : kProgramOpen;
  std::string_view other_close = program_form ? kTextClose : kProgramClose;
  if (count_occurrences(raw, open) != 1 || count_occurrences(raw, close) != 1 ||
      count_occurrences(raw, other_open) != 0 || count_occurrences(raw, other_close) != 0) {
    return c;
  }

  AnswerForm answer;
  answer.kind = program_form ? AnswerForm::Kind::Program : AnswerForm::Kind::Text;
  answer.body = std::string(raw.substr(body_at, close_at - body_at));
  c.answer = std::move(answer);
  c.wellformed = true;
  return c;
}

std::size_t count_code_blocks(std::string_view raw) {
  std::size_t blocks = count_occurrences(raw, kProgramOpen);

  std::size_t trace_end = raw.size();
  std::size_t program_at = raw.find(kProgramOpen);
  std::size_t text_at = raw.find(kTextOpen);
  trace_end = std::min(trace_end, program_at);
  trace_end = std::min(trace_end, text_at);
  std::string_view trace = raw.substr(0, trace_end);

  blocks += count_occurrences(trace, "```") / 2;
  return blocks;
}

bool contains_answer_tags(std::string_view raw) {
  return raw.find(kProgramOpen) != std::string_view::npos ||
         raw.find(kProgramClose) != std::string_view::npos ||
         raw.find(kTextOpen) != std::string_view::npos ||
         raw.find(kTextClose) != std::string_view::npos;
}

double comment_ratio(std::string_view source) {
  std::size_t total = 0, commented = 0;
  bool in_comment = false;
  for (char c : source) {
    if (c == '\n') {
      in_comment = false;
      continue;
    }
    if (c == '#') in_comment = true;
    if (!std::isspace(static_cast<unsigned char>(c))) {
      ++total;
      if (in_comment) ++commented;
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(commented) / static_cast<double>(total);
}

}  // namespace tablerl
