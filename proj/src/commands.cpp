#include "tablerl/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "tablerl/dsl.hpp"
#include "tablerl/errors.hpp"
#include "tablerl/eval.hpp"
#include "tablerl/grpo.hpp"
#include "tablerl/lti.hpp"
#include "tablerl/prompts.hpp"
#include "tablerl/reward.hpp"
#include "tablerl/table_io.hpp"
#include "tablerl/transform.hpp"

namespace tablerl {

namespace {

using nlohmann::json;

/// Deliberately free of program-required keywords so the derived QA view
/// never triggers the text-on-truncated-table deduction.
constexpr const char* kLayoutQuestion =
    "Rewrite the source table so it matches the requested layout and emit the resulting table.";

std::filesystem::path out_file(const CommandContext& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  return std::filesystem::path(ctx.out_dir) / name;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

json parse_line(const std::string& path, std::size_t lineno, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(path + " line " + std::to_string(lineno) + " is unreadable: " + e.what());
  }
}

json table_json(const Table& t) { return json::parse(serialize_table(t, TableFormat::Json)); }

Table table_from_json(const json& j) { return parse_table(j.dump(), TableFormat::Json); }

std::string hex16(std::uint64_t hash) {
  std::ostringstream out;
  out << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) out << ((hash >> shift) & 0xf);
  return out.str();
}

PromptOptions prompt_options(const CommandContext& ctx) {
  PromptOptions options;
  options.truncate_k = ctx.config.truncate_k;
  options.max_tokens = ctx.config.max_tokens;
  options.template_dir = ctx.config.prompt_dir;
  return options;
}

ChatRequest base_request(const CommandContext& ctx, std::string prompt) {
  ChatRequest request;
  request.model = ctx.config.model;
  request.temperature = ctx.config.temperature;
  request.max_tokens = ctx.config.max_tokens;
  request.messages.push_back(ChatMessage{"user", std::move(prompt)});
  return request;
}

/// Deterministic per-instance stream offset, independent of file order.
std::uint64_t instance_seed(const CommandContext& ctx, const std::string& id) {
  return ctx.seed ^ fnv1a64(id);
}

struct QaFile {
  std::vector<QaInstance> instances;
  std::map<std::string, std::size_t> by_id;
};

QaFile read_qa(const std::string& path) {
  QaFile file;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    QaInstance instance = qa_from_json_line(line);
    file.by_id.emplace(instance.id, file.instances.size());
    file.instances.push_back(std::move(instance));
  }
  (void)lineno;
  return file;
}

struct CompletionRecord {
  std::string instance_id;
  std::string completion;
};

std::vector<CompletionRecord> read_completions(const std::string& path) {
  std::vector<CompletionRecord> records;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    json j = parse_line(path, lineno, line);
    try {
      records.push_back(CompletionRecord{j.at("instance_id").get<std::string>(),
                                         j.at("completion").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(path + " line " + std::to_string(lineno) + " is unreadable: " + e.what());
    }
  }
  return records;
}

struct GroupRecord {
  std::string group_id;
  GroupBatch batch;
};

std::vector<GroupRecord> read_groups(const std::string& path) {
  std::vector<GroupRecord> records;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    json j = parse_line(path, lineno, line);
    try {
      GroupRecord record;
      record.group_id = j.at("group_id").get<std::string>();
      record.batch.rewards = j.at("rewards").get<std::vector<double>>();
      record.batch.logp_current = j.value("logp_current", std::vector<double>{});
      record.batch.logp_reference = j.value("logp_reference", std::vector<double>{});
      records.push_back(std::move(record));
    } catch (const json::exception& e) {
      throw Error(path + " line " + std::to_string(lineno) + " is unreadable: " + e.what());
    }
  }
  return records;
}

LtiInstance lti_from_json(const std::string& path, std::size_t lineno, const std::string& line) {
  json j = parse_line(path, lineno, line);
  try {
    LtiInstance instance{j.at("id").get<std::string>(), table_from_json(j.at("source")),
                         table_from_json(j.at("target")),
                         parse_program(j.at("template").get<std::string>()), std::nullopt, false};
    return instance;
  } catch (const json::exception& e) {
    throw Error(path + " line " + std::to_string(lineno) + " is unreadable: " + e.what());
  }
}

/// Samples scored against one instance, in file order.
struct ScoredPool {
  PredictionSet predictions;
  const QaInstance* instance = nullptr;
};

std::vector<ScoredPool> pool_completions(const QaFile& qa,
                                         const std::vector<CompletionRecord>& records,
                                         const RewardConfig& reward) {
  std::vector<ScoredPool> pools;
  std::map<std::string, std::size_t> pool_by_id;
  for (const auto& record : records) {
    auto instance_it = qa.by_id.find(record.instance_id);
    if (instance_it == qa.by_id.end()) {
      throw Error("completion references unknown instance " + record.instance_id);
    }
    const QaInstance& instance = qa.instances[instance_it->second];
    auto pool_it = pool_by_id.find(record.instance_id);
    if (pool_it == pool_by_id.end()) {
      pool_it = pool_by_id.emplace(record.instance_id, pools.size()).first;
      pools.push_back(ScoredPool{PredictionSet{record.instance_id, {}, 0}, &instance});
    }
    ScoredSample sample;
    sample.completion = parse_completion(record.completion);
    sample.answers = predicted_answers(sample.completion, instance.table);
    sample.breakdown = total_reward(sample.completion, instance, reward);
    pools[pool_it->second].predictions.samples.push_back(std::move(sample));
  }
  for (auto& pool : pools) pool.predictions.k_available = pool.predictions.samples.size();
  return pools;
}

struct StageTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

std::string run_id(const CommandContext& ctx) {
  return hex16(fnv1a64(config_digest(ctx.config) + ":" + std::to_string(ctx.seed)));
}

void record_stage(const CommandContext& ctx, const StageResult& result, double wall_seconds) {
  auto path = out_file(ctx, "manifest.json");
  json manifest;
  {
    std::ifstream in(path);
    if (in) {
      try {
        in >> manifest;
      } catch (const json::exception&) {
        manifest = json::object();
      }
    }
  }
  manifest["run_id"] = run_id(ctx);
  manifest["config_digest"] = config_digest(ctx.config);
  manifest["seed"] = ctx.seed;
  if (!manifest.contains("stages") || !manifest["stages"].is_array()) {
    manifest["stages"] = json::array();
  }
  json entry;
  entry["stage"] = result.stage;
  entry["counts"] = result.counts;
  entry["wall_seconds"] = wall_seconds;
  bool replaced = false;
  for (auto& existing : manifest["stages"]) {
    if (existing.value("stage", "") == result.stage) {
      existing = entry;
      replaced = true;
      break;
    }
  }
  if (!replaced) manifest["stages"].push_back(entry);
  auto out = open_out(path);
  out << manifest.dump(2) << '\n';
}

std::string qa_to_json_line(const QaInstance& instance) {
  json j;
  j["id"] = instance.id;
  j["dataset_tag"] = instance.dataset_tag;
  j["question"] = instance.question;
  j["gold"] = instance.gold_answer;
  j["table"] = table_json(instance.table);
  return j.dump();
}

QaInstance qa_from_json_line(const std::string& line) {
  json j = parse_line("qa line", 0, line);
  try {
    return QaInstance{table_from_json(j.at("table")), j.at("question").get<std::string>(),
                      j.at("gold").get<std::vector<std::string>>(),
                      j.at("dataset_tag").get<std::string>(), j.at("id").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(std::string("qa record is unreadable: ") + e.what());
  }
}

StageResult cmd_synth_lti(const CommandContext& ctx, const std::string& tables_path,
                          std::size_t count) {
  StageTimer timer;
  std::vector<Table> tables;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(tables_path)) {
    ++lineno;
    try {
      tables.push_back(parse_table(line, TableFormat::Json));
    } catch (const Error& e) {
      throw Error(tables_path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (tables.empty()) throw Error(tables_path + " holds no tables");

  auto lti_out = open_out(out_file(ctx, "lti.jsonl"));
  auto qa_out = open_out(out_file(ctx, "qa.jsonl"));
  StageResult result{"synth-lti", {}};
  std::size_t empty_gold = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const Table& table = tables[i % tables.size()];
    LtiInstance instance = synth_instance(table, ctx.seed + i);
    json line;
    line["id"] = instance.id;
    line["source"] = table_json(instance.source);
    line["target"] = table_json(instance.target);
    line["template"] = serialize_program(instance.template_label);
    lti_out << line.dump() << '\n';

    std::vector<std::string> gold = extract_answer(DslValue{instance.target});
    if (gold.empty()) {
      // An all-deleted target has no body cells to ask for; the layout
      // instance stands, the QA view skips it.
      ++empty_gold;
      continue;
    }
    QaInstance qa{instance.source, kLayoutQuestion, std::move(gold), "lti", instance.id};
    qa_out << qa_to_json_line(qa) << '\n';
  }
  result.counts["instances"] = count;
  result.counts["qa_instances"] = count - empty_gold;
  result.counts["qa_skipped_empty_target"] = empty_gold;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_rewrite_labels(const CommandContext& ctx, const std::string& lti_path) {
  StageTimer timer;
  if (!ctx.client) throw Error("rewrite-labels needs a chat client");
  std::vector<LtiInstance> instances;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(lti_path)) {
    ++lineno;
    instances.push_back(lti_from_json(lti_path, lineno, line));
  }

  std::vector<std::optional<LtiInstance>> rewritten(instances.size());
  for_each_bounded(instances.size(), ctx.config.max_in_flight, [&](std::size_t i) {
    rewritten[i] = rewrite_label(instances[i], *ctx.client, ctx.config);
  });

  auto labels_out = open_out(out_file(ctx, "labels.jsonl"));
  auto completions_out = open_out(out_file(ctx, "completions.jsonl"));
  std::size_t validated = 0;
  std::vector<LtiInstance> ordered;
  ordered.reserve(rewritten.size());
  for (auto& slot : rewritten) ordered.push_back(std::move(*slot));
  for (const auto& instance : ordered) {
    json label_line;
    label_line["id"] = instance.id;
    if (instance.rewritten_label.has_value()) {
      label_line["label"] = *instance.rewritten_label;
    } else {
      label_line["label"] = nullptr;
    }
    label_line["validated"] = instance.validated;
    labels_out << label_line.dump() << '\n';

    json completion_line;
    completion_line["instance_id"] = instance.id;
    completion_line["completion"] =
        instance.rewritten_label.has_value()
            ? "<code_solution>" + *instance.rewritten_label + "</code_solution>"
            : "<answer></answer>";
    completions_out << completion_line.dump() << '\n';
    if (instance.validated) ++validated;
  }

  auto sft_out = open_out(out_file(ctx, "sft.jsonl"));
  auto rejects_out = open_out(out_file(ctx, "sft_rejects.jsonl"));
  SftEmission emission = emit_sft_records(ordered, sft_out, rejects_out);

  StageResult result{"rewrite-labels", {}};
  result.counts["instances"] = instances.size();
  result.counts["validated"] = validated;
  result.counts["sft_records"] = emission.written;
  result.counts["sft_rejects"] = emission.rejected;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_distill(const CommandContext& ctx, const std::string& qa_path, bool include_text) {
  StageTimer timer;
  if (!ctx.client) throw Error("distill needs a chat client");
  QaFile qa = read_qa(qa_path);

  auto state_path = out_file(ctx, "distill_state.txt");
  std::set<std::string> processed;
  {
    std::ifstream in(state_path);
    std::string id;
    while (std::getline(in, id)) {
      if (!id.empty()) processed.insert(id);
    }
  }
  std::size_t accepted_total = 0;
  {
    std::ifstream in(out_file(ctx, "distill.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) ++accepted_total;
    }
  }

  auto records_out = open_out(out_file(ctx, "distill.jsonl"), std::ios::app);
  auto state_out = open_out(state_path, std::ios::app);

  struct Attempt {
    const QaInstance* instance;
    PromptKind kind;
    std::string prompt;
    std::optional<ChatResponse> response;
  };

  StageResult result{"distill", {}};
  std::size_t skipped = 0, accepted = 0, rejected = 0, processed_now = 0;
  std::size_t cursor = 0;
  while (cursor < qa.instances.size() && accepted_total < ctx.config.distill_cap) {
    std::vector<Attempt> chunk;
    std::vector<const QaInstance*> chunk_instances;
    while (cursor < qa.instances.size() && chunk_instances.size() < ctx.config.max_in_flight) {
      const QaInstance& instance = qa.instances[cursor++];
      if (processed.count(instance.id)) {
        ++skipped;
        continue;
      }
      chunk_instances.push_back(&instance);
      PromptRequest prompt_request;
      prompt_request.table = &instance.table;
      prompt_request.question = instance.question;
      chunk.push_back(Attempt{&instance, PromptKind::ProgramAnswer,
                              build_prompt(PromptKind::ProgramAnswer, prompt_request,
                                           prompt_options(ctx)),
                              std::nullopt});
      if (include_text) {
        chunk.push_back(Attempt{&instance, PromptKind::TextAnswer,
                                build_prompt(PromptKind::TextAnswer, prompt_request,
                                             prompt_options(ctx)),
                                std::nullopt});
      }
    }
    if (chunk.empty()) continue;

    for_each_bounded(chunk.size(), ctx.config.max_in_flight, [&](std::size_t i) {
      ChatRequest request = base_request(ctx, chunk[i].prompt);
      request.seed = instance_seed(ctx, chunk[i].instance->id) +
                     (chunk[i].kind == PromptKind::TextAnswer ? 1 : 0);
      try {
        chunk[i].response = ctx.client->chat(request);
      } catch (const ClientError& e) {
        throw ClientError("instance " + chunk[i].instance->id + ": " + e.what());
      }
    });

    for (const auto* instance : chunk_instances) {
      // Once the cap is hit the remaining instances stay unprocessed so a
      // raised cap can pick them up later.
      if (accepted_total >= ctx.config.distill_cap) break;
      for (const auto& attempt : chunk) {
        if (attempt.instance != instance) continue;
        const Completion completion = parse_completion(attempt.response->content);
        bool keep = completion.wellformed;
        if (keep && completion.answer->kind == AnswerForm::Kind::Program) {
          keep = compile(completion.answer->body).report.ok;
        }
        if (keep) {
          keep = exact_match(predicted_answers(completion, instance->table),
                             instance->gold_answer);
        }
        if (keep && accepted_total < ctx.config.distill_cap) {
          json record;
          record["instance_id"] = instance->id;
          record["prompt"] = attempt.prompt;
          record["completion"] = attempt.response->content;
          records_out << record.dump() << '\n';
          ++accepted_total;
          ++accepted;
        } else {
          ++rejected;
        }
      }
      state_out << instance->id << '\n';
      ++processed_now;
      records_out.flush();
      state_out.flush();
    }
  }

  result.counts["processed"] = processed_now;
  result.counts["accepted"] = accepted;
  result.counts["rejected"] = rejected;
  result.counts["skipped_resumed"] = skipped;
  result.counts["total_records"] = accepted_total;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_generate_groups(const CommandContext& ctx, const std::string& qa_path) {
  StageTimer timer;
  if (!ctx.client) throw Error("generate-groups needs a chat client");
  QaFile qa = read_qa(qa_path);
  const std::size_t group_size = ctx.config.group_size;

  struct Member {
    std::size_t instance_index;
    ChatRequest request;
    std::optional<ChatResponse> response;
  };
  std::vector<Member> members;
  members.reserve(qa.instances.size() * group_size);
  for (std::size_t i = 0; i < qa.instances.size(); ++i) {
    const QaInstance& instance = qa.instances[i];
    PromptRequest prompt_request;
    prompt_request.table = &instance.table;
    prompt_request.question = instance.question;
    std::string prompt = build_prompt(PromptKind::Mixed, prompt_request, prompt_options(ctx));
    for (std::size_t g = 0; g < group_size; ++g) {
      ChatRequest request = base_request(ctx, prompt);
      request.logprobs = true;
      request.seed = instance_seed(ctx, instance.id) + g;
      members.push_back(Member{i, std::move(request), std::nullopt});
    }
  }

  for_each_bounded(members.size(), ctx.config.max_in_flight, [&](std::size_t i) {
    try {
      members[i].response = ctx.client->chat(members[i].request);
    } catch (const ClientError&) {
      // An unusable member, not a fatal run: the group-size floor decides below.
    }
  });

  auto groups_out = open_out(out_file(ctx, "groups.jsonl"));
  StageResult result{"generate-groups", {}};
  std::size_t groups = 0, skipped = 0, failed_requests = 0;
  for (std::size_t i = 0; i < qa.instances.size(); ++i) {
    const QaInstance& instance = qa.instances[i];
    std::vector<const ChatResponse*> usable;
    for (std::size_t g = 0; g < group_size; ++g) {
      const auto& member = members[i * group_size + g];
      if (member.response.has_value()) {
        usable.push_back(&*member.response);
      } else {
        ++failed_requests;
      }
    }
    if (usable.size() < 2) {
      ++skipped;
      continue;
    }
    json line;
    line["group_id"] = instance.id;
    json rewards = json::array(), completions = json::array(), logps = json::array();
    bool all_logprobs = true;
    for (const ChatResponse* response : usable) {
      Completion completion = parse_completion(response->content);
      rewards.push_back(total_reward(completion, instance, ctx.config.reward).total);
      completions.push_back(response->content);
      if (response->logprob.has_value()) {
        logps.push_back(*response->logprob);
      } else {
        all_logprobs = false;
      }
    }
    line["rewards"] = rewards;
    line["completions"] = completions;
    line["logp_current"] = all_logprobs ? logps : json::array();
    line["logp_reference"] = json::array();
    groups_out << line.dump() << '\n';
    ++groups;
  }
  result.counts["groups"] = groups;
  result.counts["skipped_unusable"] = skipped;
  result.counts["requests"] = members.size();
  result.counts["failed_requests"] = failed_requests;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_score(const CommandContext& ctx, const std::string& qa_path,
                      const std::string& completions_path) {
  StageTimer timer;
  QaFile qa = read_qa(qa_path);
  auto rewards_out = open_out(out_file(ctx, "rewards.jsonl"));
  std::size_t scored = 0;
  for (const auto& record : read_completions(completions_path)) {
    auto it = qa.by_id.find(record.instance_id);
    if (it == qa.by_id.end()) {
      throw Error("completion references unknown instance " + record.instance_id);
    }
    const QaInstance& instance = qa.instances[it->second];
    RewardBreakdown breakdown =
        total_reward(parse_completion(record.completion), instance, ctx.config.reward);
    rewards_out << breakdown_to_jsonl(record.instance_id, breakdown) << '\n';
    ++scored;
  }
  StageResult result{"score", {}};
  result.counts["scored"] = scored;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_advantages(const CommandContext& ctx, const std::string& groups_path) {
  StageTimer timer;
  auto out = open_out(out_file(ctx, "advantages.jsonl"));
  std::size_t groups = 0;
  for (const auto& record : read_groups(groups_path)) {
    AdvantageSet set = group_advantages(record.batch.rewards, ctx.config.grpo.eps_adv);
    json line;
    line["group_id"] = record.group_id;
    line["advantages"] = set.advantages;
    line["mu"] = set.mu;
    line["sigma"] = set.sigma;
    out << line.dump() << '\n';
    ++groups;
  }
  StageResult result{"advantages", {}};
  result.counts["groups"] = groups;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_objective(const CommandContext& ctx, const std::string& groups_path) {
  StageTimer timer;
  auto out = open_out(out_file(ctx, "objective.jsonl"));
  std::size_t groups = 0;
  for (const auto& record : read_groups(groups_path)) {
    if (record.batch.logp_current.size() != record.batch.rewards.size() ||
        record.batch.logp_reference.size() != record.batch.rewards.size()) {
      throw Error("group " + record.group_id +
                  ": log-probabilities are required for the objective");
    }
    json line;
    line["group_id"] = record.group_id;
    line["objective"] = grpo_objective(record.batch, ctx.config.grpo);
    out << line.dump() << '\n';
    ++groups;
  }
  StageResult result{"objective", {}};
  result.counts["groups"] = groups;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_evaluate(const CommandContext& ctx, const std::string& qa_path,
                         const std::string& completions_path) {
  StageTimer timer;
  QaFile qa = read_qa(qa_path);
  auto pools = pool_completions(qa, read_completions(completions_path), ctx.config.reward);

  std::size_t n_samples = 0, exact_first = 0, exact_vote = 0, max_n = 0;
  std::map<std::string, std::size_t> difficulty{{"easy", 0}, {"medium", 0}, {"hard", 0},
                                                {"unstratified", 0}};
  std::map<std::string, std::size_t> error_tags{{"compile_failure", 0}, {"answer_mismatch", 0},
                                                {"untagged", 0}};
  for (const auto& pool : pools) {
    const auto& samples = pool.predictions.samples;
    n_samples += samples.size();
    max_n = std::max(max_n, samples.size());
    const QaInstance& instance = *pool.instance;
    if (!samples.empty() && exact_match(samples.front().answers, instance.gold_answer)) {
      ++exact_first;
    }
    if (exact_match(sc_vote(pool.predictions), instance.gold_answer)) ++exact_vote;

    const auto& first = samples.front();
    if (first.completion.wellformed &&
        first.completion.answer->kind == AnswerForm::Kind::Program) {
      ++difficulty[to_string(stratify(instance, first.completion, first.answers))];
    } else {
      ++difficulty["unstratified"];
    }
    for (const auto& sample : samples) {
      auto tag = auto_error_tag(sample.completion, sample.answers);
      if (tag.has_value()) {
        ++error_tags[to_string(*tag)];
      } else {
        ++error_tags["untagged"];
      }
    }
  }

  json report;
  report["run_id"] = run_id(ctx);
  report["n_instances"] = pools.size();
  report["n_samples"] = n_samples;
  report["accuracy"] = pools.empty() ? 0.0 : static_cast<double>(exact_first) / pools.size();
  report["sc_accuracy"] = pools.empty() ? 0.0 : static_cast<double>(exact_vote) / pools.size();
  json curve = json::object();
  for (std::size_t k = 1; k <= max_n; ++k) {
    double sum = 0.0;
    for (const auto& pool : pools) {
      std::size_t n = pool.predictions.samples.size();
      std::size_t c = 0;
      for (const auto& sample : pool.predictions.samples) {
        if (exact_match(sample.answers, pool.instance->gold_answer)) ++c;
      }
      sum += pass_at_k(n, c, std::min(k, n));
    }
    curve[std::to_string(k)] = pools.empty() ? 0.0 : sum / pools.size();
  }
  report["pass_at_k"] = curve;
  report["difficulty_histogram"] = difficulty;
  report["error_tags"] = error_tags;

  auto out = open_out(out_file(ctx, "report.json"));
  out << report.dump(2) << '\n';

  StageResult result{"evaluate", {}};
  result.counts["instances"] = pools.size();
  result.counts["samples"] = n_samples;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_stratify(const CommandContext& ctx, const std::string& qa_path,
                         const std::string& completions_path) {
  StageTimer timer;
  QaFile qa = read_qa(qa_path);
  auto pools = pool_completions(qa, read_completions(completions_path), ctx.config.reward);
  auto out = open_out(out_file(ctx, "difficulty.jsonl"));
  std::size_t stratified = 0, unstratified = 0;
  for (const auto& pool : pools) {
    const auto& first = pool.predictions.samples.front();
    json line;
    line["instance_id"] = pool.predictions.instance_id;
    if (first.completion.wellformed &&
        first.completion.answer->kind == AnswerForm::Kind::Program) {
      line["difficulty"] = to_string(stratify(*pool.instance, first.completion, first.answers));
      ++stratified;
    } else {
      line["difficulty"] = nullptr;
      line["reason"] = "first sample is not a wellformed program";
      ++unstratified;
    }
    out << line.dump() << '\n';
  }
  StageResult result{"stratify", {}};
  result.counts["stratified"] = stratified;
  result.counts["unstratified"] = unstratified;
  record_stage(ctx, result, timer.seconds());
  return result;
}

StageResult cmd_report(const CommandContext& ctx, const std::string& report_path) {
  StageTimer timer;
  std::ifstream in(report_path);
  if (!in) throw Error("cannot open " + report_path);
  json report;
  try {
    in >> report;
  } catch (const json::exception& e) {
    throw Error(report_path + " is unreadable: " + std::string(e.what()));
  }
  auto out = open_out(out_file(ctx, "difficulty_histogram.csv"));
  out << "difficulty,count\n";
  std::size_t rows = 0;
  const json hist = report.value("difficulty_histogram", json::object());
  for (const char* bucket : {"easy", "medium", "hard", "unstratified"}) {
    out << bucket << ',' << hist.value(bucket, 0) << '\n';
    ++rows;
  }
  StageResult result{"report", {}};
  result.counts["rows"] = rows;
  record_stage(ctx, result, timer.seconds());
  return result;
}

}  // namespace tablerl
