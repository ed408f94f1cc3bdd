#include "tablerl/eval.hpp"

#include <algorithm>
#include <string>

#include "tablerl/dsl.hpp"
#include "tablerl/errors.hpp"
#include "tablerl/normalize.hpp"

namespace tablerl {

std::string to_string(DifficultyLabel label) {
  switch (label) {
    case DifficultyLabel::Easy: return "easy";
    case DifficultyLabel::Medium: return "medium";
    case DifficultyLabel::Hard: return "hard";
  }
  return "hard";
}

std::string to_string(ErrorTag tag) {
  switch (tag) {
    case ErrorTag::CompileFailure: return "compile_failure";
    case ErrorTag::AnswerMismatch: return "answer_mismatch";
  }
  return "answer_mismatch";
}

bool exact_match_any(const std::vector<std::string>& predicted,
                     const std::vector<std::vector<std::string>>& gold_variants) {
  for (const auto& gold : gold_variants) {
    if (exact_match(predicted, gold)) return true;
  }
  return false;
}

std::vector<std::string> sc_vote(const PredictionSet& predictions) {
  struct Bucket {
    std::string key;
    std::vector<std::string> answers;
    std::size_t votes = 0;
  };
  std::vector<Bucket> buckets;
  for (const auto& sample : predictions.samples) {
    if (sample.answers.empty()) continue;
    std::string key;
    for (const auto& a : sample.answers) {
      key += normalize_answer(a);
      key += '\x1f';
    }
    auto it = std::find_if(buckets.begin(), buckets.end(),
                           [&](const Bucket& b) { return b.key == key; });
    if (it == buckets.end()) {
      buckets.push_back(Bucket{std::move(key), sample.answers, 1});
    } else {
      ++it->votes;
    }
  }
  if (buckets.empty()) return {};
  const Bucket* best = &buckets.front();
  for (const auto& b : buckets) {
    if (b.votes > best->votes) best = &b;  // strict: earliest bucket keeps ties
  }
  return best->answers;
}

double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
  if (c > n || k < 1 || k > n) {
    throw DomainError("pass@k outside its domain: n=" + std::to_string(n) +
                      " c=" + std::to_string(c) + " k=" + std::to_string(k));
  }
  if (k > n - c) return 1.0;
  double miss = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  }
  return 1.0 - miss;
}

DifficultyLabel stratify(const QaInstance& instance, const Completion& completion,
                         const std::vector<std::string>& answers) {
  if (!completion.wellformed || !completion.answer.has_value() ||
      completion.answer->kind != AnswerForm::Kind::Program) {
    throw NotProgramFormError();
  }
  if (!compile(completion.answer->body).report.ok) return DifficultyLabel::Hard;
  return exact_match(answers, instance.gold_answer) ? DifficultyLabel::Easy
                                                    : DifficultyLabel::Medium;
}

std::optional<ErrorTag> auto_error_tag(const Completion& completion,
                                       const std::vector<std::string>& answers) {
  bool program = completion.wellformed && completion.answer.has_value() &&
                 completion.answer->kind == AnswerForm::Kind::Program;
  if (program && !compile(completion.answer->body).report.ok) {
    return ErrorTag::CompileFailure;
  }
  if (!completion.wellformed) {
    if (contains_answer_tags(completion.raw)) return ErrorTag::AnswerMismatch;
    return std::nullopt;
  }
  if (!answers.empty()) {
    bool all_empty = true;
    for (const auto& a : answers) {
      if (!normalize_answer(a).empty()) {
        all_empty = false;
        break;
      }
    }
    if (all_empty) return ErrorTag::AnswerMismatch;
  }
  return std::nullopt;
}

}  // namespace tablerl
