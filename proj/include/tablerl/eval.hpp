#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tablerl/completion.hpp"
#include "tablerl/reward.hpp"
#include "tablerl/table.hpp"

namespace tablerl {

/// One generation sample, scored: the parsed completion, the answers it
/// produced (normalized, possibly empty), and its reward breakdown.
struct ScoredSample {
  Completion completion;
  std::vector<std::string> answers;
  RewardBreakdown breakdown;
};

/// The sample pool behind one instance's self-consistency vote.
struct PredictionSet {
  std::string instance_id;
  std::vector<ScoredSample> samples;
  std::size_t k_available = 0;  // equals samples.size()
};

enum class DifficultyLabel { Easy, Medium, Hard };
std::string to_string(DifficultyLabel label);

/// Machine-detectable failure tags. Compile failures cover program-form
/// completions whose body does not compile; answer mismatches cover tag
/// protocol violations and answers that normalize to nothing. The remaining
/// failure modes need human judgment and carry no tag.
enum class ErrorTag { CompileFailure, AnswerMismatch };
std::string to_string(ErrorTag tag);

/// True when `predicted` exactly matches any of the accepted gold variants.
bool exact_match_any(const std::vector<std::string>& predicted,
                     const std::vector<std::vector<std::string>>& gold_variants);

/// Majority vote over the pool: samples are bucketed by their joined
/// normalized answers, the plurality bucket wins, and ties break toward the
/// bucket seen earliest. Samples with no extracted answers are excluded;
/// if that excludes everything the vote is empty.
std::vector<std::string> sc_vote(const PredictionSet& predictions);

/// Unbiased estimator 1 - C(n-c, k)/C(n, k) of the chance that at least one
/// of k draws from n samples (c of them correct) is correct. Throws
/// DomainError unless 0 <= c <= n and 1 <= k <= n.
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

/// Difficulty of one program-form sample: Easy when it compiles and matches
/// the gold answer, Medium when it compiles and does not, Hard when it fails
/// to compile. Throws NotProgramFormError for anything but a wellformed
/// program completion.
DifficultyLabel stratify(const QaInstance& instance, const Completion& completion,
                         const std::vector<std::string>& answers);

/// CompileFailure for non-compiling program forms; AnswerMismatch for
/// malformed completions that show at least one tag literal and for
/// wellformed ones whose extracted answers all normalize to empty.
std::optional<ErrorTag> auto_error_tag(const Completion& completion,
                                       const std::vector<std::string>& answers);

}  // namespace tablerl
