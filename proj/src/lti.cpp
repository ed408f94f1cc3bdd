#include "tablerl/lti.hpp"

#include <json.hpp>

#include "tablerl/completion.hpp"
#include "tablerl/dsl.hpp"
#include "tablerl/errors.hpp"
#include "tablerl/prompts.hpp"

namespace tablerl {

LtiInstance synth_instance(const Table& table, std::uint64_t seed) {
  TransformProgram program = sample_program(table, seed);
  Table target = apply_program(program, table);
  return LtiInstance{table.id() + "#" + std::to_string(seed), table, std::move(target),
                     std::move(program), std::nullopt, false};
}

std::string canonical_dsl(const TransformProgram& program) {
  std::string out;
  std::string lines = serialize_program(program);
  std::size_t pos = 0;
  while (pos <= lines.size()) {
    std::size_t eol = lines.find('\n', pos);
    if (eol == std::string::npos) eol = lines.size();
    if (eol > pos) {
      if (!out.empty()) out += " |> ";
      out.append(lines, pos, eol - pos);
    }
    pos = eol + 1;
  }
  out += " |> emit table";
  return out;
}

namespace {

/// A candidate validates when it is a program-form completion that compiles
/// and its execution on the source reproduces the target table.
bool candidate_validates(const std::string& raw, const Table& source, const Table& target) {
  Completion completion = parse_completion(raw);
  if (!completion.wellformed || completion.answer->kind != AnswerForm::Kind::Program) {
    return false;
  }
  auto compiled = compile(completion.answer->body);
  if (!compiled.report.ok) return false;
  try {
    DslValue value = execute(*compiled.program, source);
    const Table* produced = std::get_if<Table>(&value);
    return produced != nullptr && tables_equal(*produced, target);
  } catch (const DslRuntimeError&) {
    return false;
  }
}

std::string candidate_body(const std::string& raw) {
  Completion completion = parse_completion(raw);
  if (completion.answer.has_value()) return completion.answer->body;
  return raw;
}

}  // namespace

LtiInstance rewrite_label(LtiInstance instance, ChatClient& client,
                          const PipelineConfig& config) {
  PromptRequest prompt_request;
  prompt_request.table = &instance.source;
  prompt_request.target = &instance.target;
  prompt_request.program_lines = serialize_program(instance.template_label);
  PromptOptions prompt_options;
  prompt_options.truncate_k = config.truncate_k;
  prompt_options.max_tokens = config.max_tokens;
  prompt_options.template_dir = config.prompt_dir;
  std::string base_prompt =
      build_prompt(PromptKind::RewriteProgram, prompt_request, prompt_options);

  for (std::size_t attempt = 0; attempt <= config.rewrite_retries; ++attempt) {
    ChatRequest request;
    request.model = config.model;
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    std::string prompt = base_prompt;
    if (attempt > 0) {
      // Distinct retry prompts keep request keys distinct, so recorded
      // transcripts replay attempt by attempt.
      prompt += "\nThe previous attempt was not equivalent. Try again (attempt " +
                std::to_string(attempt + 1) + ").\n";
    }
    request.messages.push_back(ChatMessage{"user", prompt});

    ChatResponse response;
    try {
      response = client.chat(request);
    } catch (const ClientError& e) {
      throw ClientError("instance " + instance.id + ": " + e.what());
    }
    instance.rewritten_label = candidate_body(response.content);
    if (candidate_validates(response.content, instance.source, instance.target)) {
      instance.validated = true;
      return instance;
    }
  }
  instance.validated = false;
  return instance;
}

SftEmission emit_sft_records(const std::vector<LtiInstance>& instances, std::ostream& sft,
                             std::ostream& rejects) {
  nlohmann::json header;
  header["type"] = "header";
  header["kind"] = "layout_sft";
  header["fields"] = {"input", "label"};
  sft << header.dump() << '\n';

  SftEmission emission;
  for (const auto& instance : instances) {
    if (instance.validated && instance.rewritten_label.has_value()) {
      PromptRequest prompt_request;
      prompt_request.table = &instance.source;
      prompt_request.target = &instance.target;
      nlohmann::json record;
      record["input"] = build_prompt(PromptKind::LayoutTask, prompt_request);
      record["label"] = *instance.rewritten_label;
      sft << record.dump() << '\n';
      ++emission.written;
    } else {
      nlohmann::json reject;
      reject["id"] = instance.id;
      reject["reason"] = instance.rewritten_label.has_value()
                             ? "candidate did not reproduce the target"
                             : "no rewrite was attempted";
      rejects << reject.dump() << '\n';
      ++emission.rejected;
    }
  }
  return emission;
}

}  // namespace tablerl
