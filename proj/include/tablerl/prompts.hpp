#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tablerl/table.hpp"

namespace tablerl {

/// The five prompt shapes the pipeline issues: direct-answer QA, program QA,
/// the mixed form that lets the model pick, program rewriting against a
/// source/target pair, and the bare layout task over such a pair.
enum class PromptKind { TextAnswer, ProgramAnswer, Mixed, RewriteProgram, LayoutTask };

/// Marker line in the rewrite template that precedes the raw operation
/// sequence; the offline mock client locates the program through it.
inline constexpr std::string_view kRawProgramMarker = "Raw operation sequence:\n";

struct PromptRequest {
  const Table* table = nullptr;  // required for every kind
  std::string question;          // QA kinds
  const Table* target = nullptr;  // rewrite and layout kinds
  std::string program_lines;      // rewrite kind, one serialized op per line
  std::optional<std::string> demonstration;  // QA kinds, prepended when present
};

struct PromptOptions {
  std::size_t truncate_k = 10;
  std::size_t max_tokens = 2400;
  /// When set, templates are loaded from this directory (by template file
  /// name) instead of the embedded copies.
  std::string template_dir;
};

/// The embedded template text for a kind, placeholders unfilled.
std::string_view prompt_template(PromptKind kind);

/// The template's file name inside an assets directory.
std::string_view prompt_template_name(PromptKind kind);

/// Fills the kind's template. QA kinds serialize the table truncated to
/// `truncate_k` rows; pair kinds serialize both tables in full, since their
/// programs run against the complete source. Throws Error when a required
/// field is missing and BudgetExceededError when the filled prompt cannot fit
/// the token budget at four characters per token.
std::string build_prompt(PromptKind kind, const PromptRequest& request,
                         const PromptOptions& options = {});

}  // namespace tablerl
