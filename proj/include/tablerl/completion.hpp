#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tablerl {

/// The model either writes a program (inside <code_solution> tags) or a direct
/// text answer (inside <answer> tags).
struct AnswerForm {
  enum class Kind { Program, Text };
  Kind kind = Kind::Text;
  std::string body;  // exact tag contents, untouched
};

/// One parsed model output: reasoning trace followed by at most one answer
/// region. wellformed implies the answer is present and tag nesting is valid.
struct Completion {
  std::string raw;
  std::string trace;
  std::optional<AnswerForm> answer;
  bool wellformed = false;
};

/// Total parse of the tag protocol; never throws. A completion is well-formed
/// iff it is optional leading text, then exactly one <code_solution>..</code_solution>
/// or <answer>..</answer> pair, then nothing but whitespace. Any other tag
/// occurrence anywhere makes it malformed; malformed completions keep a
/// best-effort trace and carry no answer.
Completion parse_completion(std::string_view raw);

/// Number of <code_solution> openings in the whole output plus complete
/// ``` fence pairs in the trace region.
std::size_t count_code_blocks(std::string_view raw);

/// Fraction of non-whitespace characters that sit in `#`-to-end-of-line
/// comment segments. Purely textual (string literals are not lexed);
/// whitespace-only source is 0.
double comment_ratio(std::string_view source);

/// True when the raw text contains any of the four answer tag literals,
/// opening or closing, of either kind.
bool contains_answer_tags(std::string_view raw);

}  // namespace tablerl
