#pragma once

#include <string>

#include "tablerl/grpo.hpp"
#include "tablerl/reward.hpp"

namespace tablerl {

/// Everything the pipeline reads from its config file. Fields missing from
/// the file keep these defaults.
struct PipelineConfig {
  RewardConfig reward;
  GrpoConfig grpo;

  std::string endpoint = "http://127.0.0.1:8000";
  std::string model = "local-table-model";
  /// Name of the environment variable holding the bearer token; the token
  /// itself never appears in config or logs.
  std::string auth_env = "TABLERL_API_TOKEN";
  std::size_t max_tokens = 2400;
  double temperature = 0.85;
  std::size_t max_in_flight = 8;
  std::size_t retries = 3;
  std::size_t backoff_ms = 200;

  std::size_t truncate_k = 10;
  std::size_t sc_k = 5;
  std::size_t group_size = 8;
  std::size_t distill_cap = 5000;
  std::size_t rewrite_retries = 3;
  /// Optional directory of prompt template overrides; empty uses the
  /// embedded templates.
  std::string prompt_dir;
};

/// Parses config JSON, applying defaults for absent fields and validating
/// ranges (positive budgets, temperature in [0, 2], comment band ordered,
/// group size at least 2). Throws Error on violations or unreadable JSON.
PipelineConfig parse_config(std::string_view json_text);

/// Reads and parses the file at `path`.
PipelineConfig load_config(const std::string& path);

/// Canonical JSON for the config, suitable for hashing and for writing a
/// starter file.
std::string serialize_config(const PipelineConfig& config);

/// Stable 16-hex-digit digest of the canonical form.
std::string config_digest(const PipelineConfig& config);

}  // namespace tablerl
