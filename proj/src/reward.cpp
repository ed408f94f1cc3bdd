#include "tablerl/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <json.hpp>

#include "tablerl/dsl.hpp"
#include "tablerl/normalize.hpp"

namespace tablerl {

namespace {

bool is_program(const Completion& c) {
  return c.answer.has_value() && c.answer->kind == AnswerForm::Kind::Program;
}

std::size_t non_ws_length(std::string_view s) {
  std::size_t n = 0;
  for (char ch : s) {
    if (!std::isspace(static_cast<unsigned char>(ch))) ++n;
  }
  return n;
}

std::string join_answers(const std::vector<std::string>& answers) {
  std::string out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (i > 0) out += ", ";
    out += answers[i];
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool parse_full_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size() && std::isfinite(out);
}

/// Word-boundary, case-insensitive search for a question phrasing that needs
/// the whole table: extremum or aggregation keywords.
bool question_requires_program(const std::string& question) {
  static const std::vector<std::string> kKeywords = {
      "max", "min", "most", "least", "total", "average", "how many"};
  std::string lower;
  lower.reserve(question.size());
  for (char c : question) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  };
  for (const auto& kw : kKeywords) {
    std::size_t pos = 0;
    while ((pos = lower.find(kw, pos)) != std::string::npos) {
      bool left_ok = pos == 0 || !is_word(lower[pos - 1]);
      std::size_t after = pos + kw.size();
      bool right_ok = after == lower.size() || !is_word(lower[after]);
      if (left_ok && right_ok) return true;
      ++pos;
    }
  }
  return false;
}

}  // namespace

std::vector<std::string> predicted_answers(const Completion& completion, const Table& table) {
  if (!completion.answer.has_value()) return {};
  if (completion.answer->kind == AnswerForm::Kind::Text) {
    return {normalize_answer(completion.answer->body)};
  }
  auto compiled = compile(completion.answer->body);
  if (!compiled.report.ok) return {};
  try {
    return extract_answer(execute(*compiled.program, table));
  } catch (const DslRuntimeError&) {
    return {};
  }
}

namespace {

std::vector<std::string> normalized_copy(const std::vector<std::string>& answers) {
  std::vector<std::string> out;
  out.reserve(answers.size());
  for (const auto& a : answers) out.push_back(normalize_answer(a));
  return out;
}

}  // namespace

bool exact_match(const std::vector<std::string>& predicted_raw,
                 const std::vector<std::string>& gold_raw) {
  if (predicted_raw.empty()) return false;
  std::vector<std::string> p = normalized_copy(predicted_raw), g = normalized_copy(gold_raw);
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  return p == g;
}

double answer_similarity(const std::vector<std::string>& predicted_raw,
                         const std::vector<std::string>& gold_raw) {
  if (predicted_raw.empty()) return 0.0;
  std::vector<std::string> predicted = normalized_copy(predicted_raw);
  std::vector<std::string> gold = normalized_copy(gold_raw);
  if (predicted.size() == 1 && gold.size() == 1) {
    double p, g;
    if (parse_full_double(predicted[0], p) && parse_full_double(gold[0], g)) {
      if (p == g) return 1.0;
      double rel = std::fabs(p - g) / std::max(std::fabs(p), std::fabs(g));
      if (rel <= 1e-6) return 1.0;
    }
  }
  std::string a = join_answers(predicted), b = join_answers(gold);
  std::size_t max_len = std::max(a.size(), b.size());
  if (max_len == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(max_len);
}

double strict_format_reward(const Completion& completion, const RewardConfig& config) {
  return completion.wellformed ? config.max_strict_format : 0.0;
}

double answer_reward(const Completion& completion, const QaInstance& instance,
                     const RewardConfig& config, bool table_truncated) {
  if (!completion.answer.has_value()) return 0.0;
  auto predicted = predicted_answers(completion, instance.table);

  double value = 0.0;
  if (exact_match(predicted, instance.gold_answer)) {
    value = config.max_answer;
  } else if (answer_similarity(predicted, instance.gold_answer) >= config.similarity_threshold) {
    value = config.max_answer / 2.0;
  } else if (is_program(completion)) {
    auto compiled = compile(completion.answer->body);
    if (compiled.report.ok && is_constant_emit(*compiled.program)) {
      value = -config.wrong_compilable_penalty;
    }
  }
  if (!is_program(completion) && table_truncated &&
      question_requires_program(instance.question)) {
    value -= config.text_on_program_required_penalty;
  }
  return value;
}

double comment_density_reward(const Completion& completion, const RewardConfig& config) {
  if (!is_program(completion)) return 0.0;
  double r = comment_ratio(completion.answer->body);
  double lo = config.comment_band_lo, hi = config.comment_band_hi;
  double ramp;
  if (r <= 0.0 || r >= 1.0) {
    ramp = 0.0;
  } else if (r < lo) {
    ramp = r / lo;
  } else if (r <= hi) {
    ramp = 1.0;
  } else {
    ramp = (1.0 - r) / (1.0 - hi);
  }
  return config.max_comment * ramp;
}

double multi_block_penalty(const Completion& completion, const RewardConfig& config) {
  std::size_t blocks = count_code_blocks(completion.raw);
  double extra = blocks > 1 ? static_cast<double>(blocks - 1) : 0.0;
  return -std::min(config.max_multi_block_penalty,
                   config.max_multi_block_penalty * extra);
}

double compile_reward(const Completion& completion, const RewardConfig& config) {
  if (!completion.answer.has_value()) return 0.0;
  if (completion.answer->kind == AnswerForm::Kind::Text) return config.max_compile;
  return compile(completion.answer->body).report.ok ? config.max_compile : 0.0;
}

double short_code_penalty(const Completion& completion, const RewardConfig& config) {
  if (!is_program(completion)) return 0.0;
  if (non_ws_length(completion.answer->body) < config.short_code_threshold) {
    return -config.max_short_code_penalty;
  }
  return 0.0;
}

RewardBreakdown total_reward(const Completion& completion, const QaInstance& instance,
                             const RewardConfig& config, bool table_truncated) {
  RewardBreakdown out;
  out.components["strict_format"] = strict_format_reward(completion, config);
  out.components["answer"] = answer_reward(completion, instance, config, table_truncated);
  out.components["comment_density"] = comment_density_reward(completion, config);
  out.components["multi_block"] = multi_block_penalty(completion, config);
  out.components["compile"] = compile_reward(completion, config);
  out.components["short_code"] = short_code_penalty(completion, config);
  out.total = 0.0;
  for (const auto& [name, value] : out.components) out.total += value;
  return out;
}

std::string breakdown_to_jsonl(const std::string& completion_id, const RewardBreakdown& breakdown) {
  nlohmann::json line;
  line["completion_id"] = completion_id;
  line["components"] = nlohmann::json::object();
  for (const auto& [name, value] : breakdown.components) line["components"][name] = value;
  line["total"] = breakdown.total;
  return line.dump();
}

}  // namespace tablerl
