#include "tablerl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tablerl/client.hpp"
#include "tablerl/errors.hpp"

namespace tablerl {

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* name, T& out) {
  if (j.contains(name)) out = j.at(name).get<T>();
}

void validate(const PipelineConfig& c) {
  const RewardConfig& r = c.reward;
  if (r.max_strict_format < 0 || r.max_answer < 0 || r.max_comment < 0 ||
      r.max_multi_block_penalty < 0 || r.max_compile < 0 || r.max_short_code_penalty < 0 ||
      r.wrong_compilable_penalty < 0 || r.text_on_program_required_penalty < 0) {
    throw Error("reward maxima and penalties must be non-negative");
  }
  if (!(0.0 <= r.comment_band_lo && r.comment_band_lo < r.comment_band_hi &&
        r.comment_band_hi <= 1.0)) {
    throw Error("comment band must satisfy 0 <= lo < hi <= 1");
  }
  if (!(c.grpo.eps_adv > 0.0)) throw Error("eps_adv must be positive");
  if (!(c.grpo.eps_clip > 0.0 && c.grpo.eps_clip < 1.0)) {
    throw Error("eps_clip must lie in (0, 1)");
  }
  if (c.grpo.kl_weight < 0.0) throw Error("kl_weight must be non-negative");
  if (c.max_tokens < 1) throw Error("max_tokens must be at least 1");
  if (!(c.temperature >= 0.0 && c.temperature <= 2.0)) {
    throw Error("temperature must lie in [0, 2]");
  }
  if (c.group_size < 2) throw Error("group_size must be at least 2");
  if (c.sc_k < 1) throw Error("sc_k must be at least 1");
  if (c.truncate_k < 1) throw Error("truncate_k must be at least 1");
  if (c.distill_cap < 1) throw Error("distill_cap must be at least 1");
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  for (const char* section : {"reward", "grpo", "client"}) {
    if (j.contains(section) && !j.at(section).is_object()) {
      throw Error(std::string("config section \"") + section + "\" must be an object");
    }
  }
  try {
    if (j.contains("reward")) {
      const auto& r = j.at("reward");
      read_field(r, "max_strict_format", c.reward.max_strict_format);
      read_field(r, "max_answer", c.reward.max_answer);
      read_field(r, "max_comment", c.reward.max_comment);
      read_field(r, "max_multi_block_penalty", c.reward.max_multi_block_penalty);
      read_field(r, "max_compile", c.reward.max_compile);
      read_field(r, "max_short_code_penalty", c.reward.max_short_code_penalty);
      read_field(r, "short_code_threshold", c.reward.short_code_threshold);
      read_field(r, "wrong_compilable_penalty", c.reward.wrong_compilable_penalty);
      read_field(r, "text_on_program_required_penalty",
                 c.reward.text_on_program_required_penalty);
      read_field(r, "comment_band_lo", c.reward.comment_band_lo);
      read_field(r, "comment_band_hi", c.reward.comment_band_hi);
      read_field(r, "similarity_threshold", c.reward.similarity_threshold);
    }
    if (j.contains("grpo")) {
      const auto& g = j.at("grpo");
      read_field(g, "eps_adv", c.grpo.eps_adv);
      read_field(g, "eps_clip", c.grpo.eps_clip);
      read_field(g, "kl_weight", c.grpo.kl_weight);
      read_field(g, "max_abs_delta_logp", c.grpo.max_abs_delta_logp);
    }
    if (j.contains("client")) {
      const auto& cl = j.at("client");
      read_field(cl, "endpoint", c.endpoint);
      read_field(cl, "model", c.model);
      read_field(cl, "auth_env", c.auth_env);
      read_field(cl, "max_tokens", c.max_tokens);
      read_field(cl, "temperature", c.temperature);
      read_field(cl, "max_in_flight", c.max_in_flight);
      read_field(cl, "retries", c.retries);
      read_field(cl, "backoff_ms", c.backoff_ms);
    }
    read_field(j, "truncate_k", c.truncate_k);
    read_field(j, "sc_k", c.sc_k);
    read_field(j, "group_size", c.group_size);
    read_field(j, "distill_cap", c.distill_cap);
    read_field(j, "rewrite_retries", c.rewrite_retries);
    read_field(j, "prompt_dir", c.prompt_dir);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config field has the wrong type: ") + e.what());
  }
  validate(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const PipelineConfig& c) {
  nlohmann::json j;
  j["reward"] = {{"max_strict_format", c.reward.max_strict_format},
                 {"max_answer", c.reward.max_answer},
                 {"max_comment", c.reward.max_comment},
                 {"max_multi_block_penalty", c.reward.max_multi_block_penalty},
                 {"max_compile", c.reward.max_compile},
                 {"max_short_code_penalty", c.reward.max_short_code_penalty},
                 {"short_code_threshold", c.reward.short_code_threshold},
                 {"wrong_compilable_penalty", c.reward.wrong_compilable_penalty},
                 {"text_on_program_required_penalty", c.reward.text_on_program_required_penalty},
                 {"comment_band_lo", c.reward.comment_band_lo},
                 {"comment_band_hi", c.reward.comment_band_hi},
                 {"similarity_threshold", c.reward.similarity_threshold}};
  j["grpo"] = {{"eps_adv", c.grpo.eps_adv},
               {"eps_clip", c.grpo.eps_clip},
               {"kl_weight", c.grpo.kl_weight},
               {"max_abs_delta_logp", c.grpo.max_abs_delta_logp}};
  j["client"] = {{"endpoint", c.endpoint},
                 {"model", c.model},
                 {"auth_env", c.auth_env},
                 {"max_tokens", c.max_tokens},
                 {"temperature", c.temperature},
                 {"max_in_flight", c.max_in_flight},
                 {"retries", c.retries},
                 {"backoff_ms", c.backoff_ms}};
  j["truncate_k"] = c.truncate_k;
  j["sc_k"] = c.sc_k;
  j["group_size"] = c.group_size;
  j["distill_cap"] = c.distill_cap;
  j["rewrite_retries"] = c.rewrite_retries;
  j["prompt_dir"] = c.prompt_dir;
  return j.dump(2);
}

std::string config_digest(const PipelineConfig& config) {
  std::uint64_t hash = fnv1a64(serialize_config(config));
  std::string out;
  for (int shift = 60; shift >= 0; shift -= 4) {
    out += "0123456789abcdef"[(hash >> shift) & 0xf];
  }
  return out;
}

}  // namespace tablerl
