#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tablerl/client.hpp"
#include "tablerl/config.hpp"
#include "tablerl/table.hpp"
#include "tablerl/transform.hpp"

namespace tablerl {

/// One self-supervised layout task: a source table, the target produced by a
/// sampled transform program, and (after rewriting) a fluent pipeline program
/// that provably reproduces the target.
struct LtiInstance {
  std::string id;  // "<table id>#<seed>"
  Table source;
  Table target;
  TransformProgram template_label;
  std::optional<std::string> rewritten_label;
  bool validated = false;
};

/// Samples a transform program from (table, seed) and applies it. The result
/// is deterministic in its inputs; apply_program(template_label, source)
/// equals target by construction. Throws TableTooSmallError for tables the
/// sampler cannot work with.
LtiInstance synth_instance(const Table& table, std::uint64_t seed);

/// Mechanical transcription of a transform program into pipeline-program
/// source: op lines joined with |>, ending in `emit table`. Compiling and
/// executing it reproduces apply_program exactly.
std::string canonical_dsl(const TransformProgram& program);

/// Asks the client to rewrite the instance's template label into a fluent
/// program, then validates the candidate by executing it against the source
/// and comparing tables. Retries with an amended prompt up to
/// config.rewrite_retries times; the last candidate is kept for audit even
/// when validation fails. ClientError is rethrown with the instance id.
LtiInstance rewrite_label(LtiInstance instance, ChatClient& client,
                          const PipelineConfig& config);

struct SftEmission {
  std::size_t written = 0;
  std::size_t rejected = 0;
};

/// Writes validated instances to `sft` as {"input": pair prompt, "label":
/// program} lines after a header record; unvalidated ones go to `rejects`
/// with a reason. Returns both counts.
SftEmission emit_sft_records(const std::vector<LtiInstance>& instances, std::ostream& sft,
                             std::ostream& rejects);

}  // namespace tablerl
