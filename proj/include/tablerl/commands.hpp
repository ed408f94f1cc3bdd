#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "tablerl/client.hpp"
#include "tablerl/config.hpp"
#include "tablerl/table.hpp"

namespace tablerl {

/// Shared state for one pipeline run: parsed config, base seed, output
/// directory, and the chat client (already wrapped for recording or replay
/// by the caller).
struct CommandContext {
  PipelineConfig config;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::shared_ptr<ChatClient> client;
};

/// What one stage did, for the manifest and the terminal.
struct StageResult {
  std::string stage;
  std::map<std::string, std::size_t> counts;
};

/// Stable identifier of (config, seed); every artifact of a run references it.
std::string run_id(const CommandContext& ctx);

/// Appends or replaces the stage entry in out_dir/manifest.json. Timing is
/// informational only: JSONL artifacts are byte-deterministic, the manifest
/// is not.
void record_stage(const CommandContext& ctx, const StageResult& result, double wall_seconds);

/// JSONL line codecs shared by the commands and their tests.
std::string qa_to_json_line(const QaInstance& instance);
QaInstance qa_from_json_line(const std::string& line);

/// Reads tables.jsonl (one serialized table per line), synthesizes `count`
/// layout instances cycling over the tables with seeds base, base+1, ...,
/// and writes out_dir/lti.jsonl plus the derived QA view out_dir/qa.jsonl
/// (fixed layout question, gold = target body cells row-major).
StageResult cmd_synth_lti(const CommandContext& ctx, const std::string& tables_path,
                          std::size_t count);

/// Rewrites every instance in lti.jsonl through the client, validates by
/// re-execution, and writes labels.jsonl, completions.jsonl, sft.jsonl and
/// sft_rejects.jsonl.
StageResult cmd_rewrite_labels(const CommandContext& ctx, const std::string& lti_path);

/// Cold-start distillation: program-template completions for qa.jsonl
/// instances, kept only when they parse, compile and exact-match gold, up to
/// config.distill_cap records. Resumable: instance ids already listed in
/// distill_state.txt are skipped, accepted records append to distill.jsonl.
/// `include_text` adds a text-template request per instance.
StageResult cmd_distill(const CommandContext& ctx, const std::string& qa_path, bool include_text);

/// Samples config.group_size completions per instance (distinct per-request
/// seeds), scores them, and writes groups.jsonl lines holding the reward
/// vector and any log-probabilities the service reported. Instances with
/// fewer than two usable completions are skipped and counted.
StageResult cmd_generate_groups(const CommandContext& ctx, const std::string& qa_path);

/// Scores completions.jsonl against qa.jsonl and writes rewards.jsonl, one
/// breakdown line per completion.
StageResult cmd_score(const CommandContext& ctx, const std::string& qa_path,
                      const std::string& completions_path);

/// Normalized advantages per group from groups.jsonl into advantages.jsonl.
StageResult cmd_advantages(const CommandContext& ctx, const std::string& groups_path);

/// Surrogate-minus-KL objective per group into objective.jsonl. Groups
/// without both log-probability vectors are an error, not a guess.
StageResult cmd_objective(const CommandContext& ctx, const std::string& groups_path);

/// Accuracy, self-consistency vote accuracy, the pass@k curve, difficulty
/// histogram, and error-tag counts over (qa.jsonl, completions.jsonl) into
/// report.json.
StageResult cmd_evaluate(const CommandContext& ctx, const std::string& qa_path,
                         const std::string& completions_path);

/// Per-instance difficulty labels (first sample's program feedback) into
/// difficulty.jsonl.
StageResult cmd_stratify(const CommandContext& ctx, const std::string& qa_path,
                         const std::string& completions_path);

/// Renders report.json's difficulty histogram as difficulty_histogram.csv.
StageResult cmd_report(const CommandContext& ctx, const std::string& report_path);

}  // namespace tablerl
