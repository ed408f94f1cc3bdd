#pragma once

#include <map>
#include <string>
#include <vector>

#include "tablerl/completion.hpp"
#include "tablerl/table.hpp"

namespace tablerl {

/// Caps, penalties, and band edges for the reward functions. Defaults are the
/// training values; the total of the four positive maxima is 3.45.
struct RewardConfig {
  double max_strict_format = 0.75;
  double max_answer = 1.5;
  double max_comment = 0.45;
  double max_multi_block_penalty = 1.0;
  double max_compile = 0.75;
  double max_short_code_penalty = 0.5;

  /// Program bodies with fewer non-whitespace characters than this draw the
  /// short-code penalty.
  std::size_t short_code_threshold = 40;

  /// Deduction when a program compiles, is a constant emit, and is wrong.
  double wrong_compilable_penalty = 1.0;
  /// Deduction when a text answer is given for a truncated table whose
  /// question demands computation over the full table.
  double text_on_program_required_penalty = 0.75;

  /// Comment ratios inside [band_lo, band_hi] earn the full comment reward;
  /// the reward ramps linearly to zero outside the band.
  double comment_band_lo = 0.05;
  double comment_band_hi = 0.35;

  double similarity_threshold = 0.8;
};

/// Per-component scores keyed by reward-function name, plus their exact sum.
struct RewardBreakdown {
  std::map<std::string, double> components;
  double total = 0.0;
};

/// Normalized answers the completion's program or text answer produces.
/// Empty when there is no answer, the program fails to compile, or execution
/// raises a runtime error.
std::vector<std::string> predicted_answers(const Completion& completion, const Table& table);

/// True when `predicted` equals `gold` as multisets after normalizing every
/// element on both sides. Empty predictions never match, even against an
/// empty gold list.
bool exact_match(const std::vector<std::string>& predicted,
                 const std::vector<std::string>& gold);

/// Similarity in [0, 1] over normalized elements: 1.0 when both sides are
/// single numerics equal to relative tolerance 1e-6, otherwise one minus the
/// normalized edit distance between the ", "-joined forms.
double answer_similarity(const std::vector<std::string>& predicted,
                         const std::vector<std::string>& gold);

double strict_format_reward(const Completion& completion, const RewardConfig& config);
double answer_reward(const Completion& completion, const QaInstance& instance,
                     const RewardConfig& config, bool table_truncated);
double comment_density_reward(const Completion& completion, const RewardConfig& config);
double multi_block_penalty(const Completion& completion, const RewardConfig& config);
double compile_reward(const Completion& completion, const RewardConfig& config);
double short_code_penalty(const Completion& completion, const RewardConfig& config);

/// Evaluates all six reward functions and sums them. Component keys are the
/// function names without the `_reward`/`_penalty` suffix noise: strict_format,
/// answer, comment_density, multi_block, compile, short_code.
RewardBreakdown total_reward(const Completion& completion, const QaInstance& instance,
                             const RewardConfig& config, bool table_truncated = false);

/// One line: {"completion_id": ..., "components": {...}, "total": ...}.
std::string breakdown_to_jsonl(const std::string& completion_id, const RewardBreakdown& breakdown);

}  // namespace tablerl
