#include "tablerl/commands.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "tablerl/client.hpp"
#include "tablerl/dsl.hpp"
#include "tablerl/errors.hpp"
#include "tablerl/grpo.hpp"
#include "tablerl/table_io.hpp"
#include "tablerl/transform.hpp"

#include "support/random_tables.hpp"

using namespace tablerl;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "tablerl_cmd_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::filesystem::path make_tables_file(const std::filesystem::path& dir, int n_tables) {
  std::mt19937_64 rng(555);
  testing::RandomTableOptions opts;
  opts.min_rows = 2;
  opts.min_cols = 2;
  std::ostringstream out;
  for (int i = 0; i < n_tables; ++i) {
    Table t = testing::random_table(rng, opts).with_id("t" + std::to_string(i));
    out << serialize_table(t, TableFormat::Json) << '\n';
  }
  auto path = dir / "tables.jsonl";
  write_file(path, out.str());
  return path;
}

CommandContext mock_context(const std::filesystem::path& out_dir) {
  CommandContext ctx;
  ctx.seed = 7;
  ctx.out_dir = out_dir.string();
  ctx.client = std::make_shared<MockChatClient>();
  ctx.config.max_in_flight = 4;
  return ctx;
}

/// Always replies with the same completion text.
class FixedClient : public ChatClient {
 public:
  explicit FixedClient(std::string reply) : reply_(std::move(reply)) {}

 protected:
  ChatResponse send(const ChatRequest&) override { return ChatResponse{reply_, std::nullopt}; }

 private:
  std::string reply_;
};

}  // namespace

TEST_CASE("synth-lti emits consistent lti and qa views plus a manifest") {
  auto dir = fresh_dir("synth");
  auto tables = make_tables_file(dir, 3);
  CommandContext ctx = mock_context(dir / "out");

  StageResult result = cmd_synth_lti(ctx, tables.string(), 12);
  CHECK(result.counts.at("instances") == 12);
  CHECK(result.counts.at("qa_instances") + result.counts.at("qa_skipped_empty_target") == 12);

  auto lti_lines = read_jsonl(std::filesystem::path(ctx.out_dir) / "lti.jsonl");
  REQUIRE(lti_lines.size() == 12);
  for (const auto& line : lti_lines) {
    json j = json::parse(line);
    Table source = parse_table(j.at("source").dump(), TableFormat::Json);
    Table target = parse_table(j.at("target").dump(), TableFormat::Json);
    TransformProgram program = parse_program(j.at("template").get<std::string>());
    CHECK(tables_equal(apply_program(program, source), target));
  }

  auto qa_lines = read_jsonl(std::filesystem::path(ctx.out_dir) / "qa.jsonl");
  CHECK(qa_lines.size() == result.counts.at("qa_instances"));
  for (const auto& line : qa_lines) {
    QaInstance instance = qa_from_json_line(line);
    CHECK_FALSE(instance.gold_answer.empty());
    CHECK(instance.dataset_tag == "lti");
  }

  json manifest = json::parse(read_file(std::filesystem::path(ctx.out_dir) / "manifest.json"));
  CHECK(manifest.at("run_id").get<std::string>() == run_id(ctx));
  CHECK(manifest.at("run_id").get<std::string>().size() == 16);
  CHECK(manifest.at("stages").size() == 1);
  CHECK(manifest.at("stages")[0].at("stage") == "synth-lti");
}

TEST_CASE("the mock pipeline rewrites, scores, and replays byte-identically") {
  auto dir = fresh_dir("pipeline");
  auto tables = make_tables_file(dir, 2);
  auto transcript = (dir / "transcript.jsonl").string();

  auto run_pipeline = [&](const std::filesystem::path& out_dir,
                          std::shared_ptr<ChatClient> client) {
    CommandContext ctx = mock_context(out_dir);
    ctx.client = std::move(client);
    cmd_synth_lti(ctx, tables.string(), 6);
    cmd_rewrite_labels(ctx, (out_dir / "lti.jsonl").string());
    cmd_score(ctx, (out_dir / "qa.jsonl").string(), (out_dir / "completions.jsonl").string());
    return ctx;
  };

  auto recorded_ctx = run_pipeline(
      dir / "run1", std::make_shared<RecordingChatClient>(std::make_shared<MockChatClient>(),
                                                          transcript));
  auto labels1 = read_jsonl(dir / "run1" / "labels.jsonl");
  REQUIRE(labels1.size() == 6);
  for (const auto& line : labels1) {
    CHECK(json::parse(line).at("validated").get<bool>());
  }
  auto sft1 = read_jsonl(dir / "run1" / "sft.jsonl");
  REQUIRE(sft1.size() == 7);  // header plus six records
  CHECK(json::parse(sft1[0]).at("type") == "header");
  CHECK(read_jsonl(dir / "run1" / "sft_rejects.jsonl").empty());

  auto rewards1 = read_jsonl(dir / "run1" / "rewards.jsonl");
  CHECK(rewards1.size() == read_jsonl(dir / "run1" / "qa.jsonl").size());
  for (const auto& line : rewards1) {
    json j = json::parse(line);
    double total = j.at("total").get<double>();
    CHECK(total <= 3.45);
    CHECK(total >= -3.25);
  }

  // Second run consumes only the transcript: byte-identical artifacts.
  run_pipeline(dir / "run2", std::make_shared<ReplayChatClient>(transcript));
  for (const char* name : {"lti.jsonl", "qa.jsonl", "labels.jsonl", "completions.jsonl",
                           "sft.jsonl", "sft_rejects.jsonl", "rewards.jsonl"}) {
    CAPTURE(name);
    CHECK(read_file(dir / "run1" / name) == read_file(dir / "run2" / name));
  }
  CHECK(run_id(recorded_ctx) == run_id(mock_context(dir / "whatever")));
}

TEST_CASE("generate-groups emits full reward vectors and advantages consume them") {
  auto dir = fresh_dir("groups");
  auto tables = make_tables_file(dir, 2);
  CommandContext ctx = mock_context(dir / "out");
  ctx.config.group_size = 4;
  cmd_synth_lti(ctx, tables.string(), 4);

  StageResult generated =
      cmd_generate_groups(ctx, (std::filesystem::path(ctx.out_dir) / "qa.jsonl").string());
  auto qa_lines = read_jsonl(std::filesystem::path(ctx.out_dir) / "qa.jsonl");
  CHECK(generated.counts.at("groups") == qa_lines.size());
  CHECK(generated.counts.at("requests") == qa_lines.size() * 4);
  CHECK(generated.counts.at("failed_requests") == 0);

  auto group_lines = read_jsonl(std::filesystem::path(ctx.out_dir) / "groups.jsonl");
  REQUIRE(group_lines.size() == qa_lines.size());
  for (const auto& line : group_lines) {
    json j = json::parse(line);
    CHECK(j.at("rewards").size() == 4);
    CHECK(j.at("completions").size() == 4);
    CHECK(j.at("logp_current").empty());  // the mock reports no log-probs
    CHECK(j.at("logp_reference").empty());
  }

  StageResult advantages =
      cmd_advantages(ctx, (std::filesystem::path(ctx.out_dir) / "groups.jsonl").string());
  CHECK(advantages.counts.at("groups") == group_lines.size());
  for (const auto& line : read_jsonl(std::filesystem::path(ctx.out_dir) / "advantages.jsonl")) {
    json j = json::parse(line);
    REQUIRE(j.at("advantages").size() == 4);
    double sum = 0;
    for (double a : j.at("advantages")) sum += a;
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-9));
  }

  try {
    cmd_objective(ctx, (std::filesystem::path(ctx.out_dir) / "groups.jsonl").string());
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("log-probabilities are required") != std::string::npos);
  }
}

TEST_CASE("objective matches the library math on a hand-written groups file") {
  auto dir = fresh_dir("objective");
  CommandContext ctx = mock_context(dir / "out");
  auto groups_path = dir / "groups.jsonl";
  write_file(groups_path,
             R"({"group_id":"g0","rewards":[1.0,2.0,3.0],"logp_current":[-1.0,-2.0,-1.5],"logp_reference":[-1.1,-1.9,-1.5]})"
             "\n");
  StageResult result = cmd_objective(ctx, groups_path.string());
  CHECK(result.counts.at("groups") == 1);

  GroupBatch batch;
  batch.rewards = {1.0, 2.0, 3.0};
  batch.logp_current = {-1.0, -2.0, -1.5};
  batch.logp_reference = {-1.1, -1.9, -1.5};
  json line = json::parse(read_jsonl(std::filesystem::path(ctx.out_dir) / "objective.jsonl").at(0));
  CHECK(line.at("objective").get<double>() ==
        doctest::Approx(grpo_objective(batch, ctx.config.grpo)).epsilon(1e-12));
}

TEST_CASE("distill filters, caps, and resumes without duplicates") {
  auto dir = fresh_dir("distill");
  // Gold equals the full body row-major, so `emit table` is a correct
  // non-constant program and plain text is wrong.
  std::mt19937_64 rng(99);
  testing::RandomTableOptions opts;
  opts.min_rows = 2;
  opts.min_cols = 2;
  std::ostringstream qa;
  for (int i = 0; i < 5; ++i) {
    Table t = testing::random_table(rng, opts).with_id("q" + std::to_string(i));
    DslValue value{t};
    QaInstance instance{t, "copy the table over", extract_answer(value), "unit",
                        "q" + std::to_string(i)};
    if (instance.gold_answer.empty()) instance.gold_answer = {"x"};
    qa << qa_to_json_line(instance) << '\n';
  }
  auto qa_path = dir / "qa.jsonl";
  write_file(qa_path, qa.str());

  CommandContext ctx = mock_context(dir / "out");
  ctx.config.distill_cap = 2;
  ctx.client = std::make_shared<FixedClient>("<code_solution>emit table</code_solution>");
  StageResult first = cmd_distill(ctx, qa_path.string(), false);
  CHECK(first.counts.at("accepted") == 2);
  CHECK(first.counts.at("total_records") == 2);
  CHECK(read_jsonl(std::filesystem::path(ctx.out_dir) / "distill.jsonl").size() == 2);

  ctx.config.distill_cap = 4;
  StageResult second = cmd_distill(ctx, qa_path.string(), false);
  CHECK(second.counts.at("skipped_resumed") == 2);
  CHECK(second.counts.at("accepted") == 2);
  CHECK(second.counts.at("total_records") == 4);
  auto records = read_jsonl(std::filesystem::path(ctx.out_dir) / "distill.jsonl");
  REQUIRE(records.size() == 4);
  std::vector<std::string> ids;
  for (const auto& line : records) ids.push_back(json::parse(line).at("instance_id"));
  std::sort(ids.begin(), ids.end());
  CHECK(std::unique(ids.begin(), ids.end()) == ids.end());
  for (const auto& line : records) {
    json j = json::parse(line);
    CHECK(j.contains("prompt"));
    CHECK(j.contains("completion"));
  }
}

TEST_CASE("distill rejects everything when the client cannot answer") {
  auto dir = fresh_dir("distill_reject");
  Table t = parse_table("a,b\n1,2\n3,4\n", TableFormat::Csv).with_id("r0");
  DslValue value{t};
  QaInstance instance{t, "copy the table over", extract_answer(value), "unit", "r0"};
  auto qa_path = dir / "qa.jsonl";
  write_file(qa_path, qa_to_json_line(instance) + "\n");

  CommandContext ctx = mock_context(dir / "out");
  StageResult result = cmd_distill(ctx, qa_path.string(), false);  // mock answers "<answer></answer>"
  CHECK(result.counts.at("accepted") == 0);
  CHECK(result.counts.at("rejected") == 1);
  CHECK(read_jsonl(std::filesystem::path(ctx.out_dir) / "distill.jsonl").empty());
}

TEST_CASE("evaluate, stratify, and report agree on a crafted pool") {
  auto dir = fresh_dir("evaluate");
  Table pts = parse_table("team,pts\nann,3\nbob,5\ncat,7\ndan,4\n", TableFormat::Csv)
                  .with_id("pts");
  DslValue pts_value{pts};
  QaInstance inst1{pts, "total points overall", {"19"}, "unit", "i1"};
  QaInstance inst2{pts, "name the first team", {"ann"}, "unit", "i2"};
  auto qa_path = dir / "qa.jsonl";
  write_file(qa_path, qa_to_json_line(inst1) + "\n" + qa_to_json_line(inst2) + "\n");

  json c1a{{"instance_id", "i1"},
           {"completion", "<code_solution>col \"pts\" |> sum |> emit it</code_solution>"}};
  json c1b{{"instance_id", "i1"}, {"completion", "<code_solution>emit 5</code_solution>"}};
  json c1c{{"instance_id", "i1"}, {"completion", "<code_solution>bogus |></code_solution>"}};
  json c2a{{"instance_id", "i2"}, {"completion", "<answer>ann</answer>"}};
  auto completions_path = dir / "completions.jsonl";
  write_file(completions_path, c1a.dump() + "\n" + c1b.dump() + "\n" + c1c.dump() + "\n" +
                                   c2a.dump() + "\n");

  CommandContext ctx = mock_context(dir / "out");
  StageResult evaluated = cmd_evaluate(ctx, qa_path.string(), completions_path.string());
  CHECK(evaluated.counts.at("instances") == 2);
  CHECK(evaluated.counts.at("samples") == 4);

  json report = json::parse(read_file(std::filesystem::path(ctx.out_dir) / "report.json"));
  CHECK(report.at("accuracy").get<double>() == doctest::Approx(1.0));
  CHECK(report.at("sc_accuracy").get<double>() == doctest::Approx(1.0));
  // pass@1 averages 1/3 (one of three correct) and 1 (single correct sample).
  CHECK(report.at("pass_at_k").at("1").get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(report.at("pass_at_k").at("3").get<double>() == doctest::Approx(1.0));
  CHECK(report.at("difficulty_histogram").at("easy") == 1);
  CHECK(report.at("difficulty_histogram").at("unstratified") == 1);
  CHECK(report.at("error_tags").at("compile_failure") == 1);

  StageResult stratified = cmd_stratify(ctx, qa_path.string(), completions_path.string());
  CHECK(stratified.counts.at("stratified") == 1);
  CHECK(stratified.counts.at("unstratified") == 1);
  auto difficulty_lines = read_jsonl(std::filesystem::path(ctx.out_dir) / "difficulty.jsonl");
  REQUIRE(difficulty_lines.size() == 2);
  CHECK(json::parse(difficulty_lines[0]).at("difficulty") == "easy");
  CHECK(json::parse(difficulty_lines[1]).at("difficulty").is_null());

  cmd_report(ctx, (std::filesystem::path(ctx.out_dir) / "report.json").string());
  std::string csv = read_file(std::filesystem::path(ctx.out_dir) / "difficulty_histogram.csv");
  CHECK(csv == "difficulty,count\neasy,1\nmedium,0\nhard,0\nunstratified,1\n");
}

TEST_CASE("score refuses completions for unknown instances") {
  auto dir = fresh_dir("score_unknown");
  Table t = parse_table("a,b\n1,2\n3,4\n", TableFormat::Csv).with_id("s0");
  QaInstance instance{t, "q", {"1"}, "unit", "s0"};
  auto qa_path = dir / "qa.jsonl";
  write_file(qa_path, qa_to_json_line(instance) + "\n");
  auto completions_path = dir / "completions.jsonl";
  write_file(completions_path, R"({"instance_id":"ghost","completion":"<answer>1</answer>"})"
                               "\n");
  CommandContext ctx = mock_context(dir / "out");
  try {
    cmd_score(ctx, qa_path.string(), completions_path.string());
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}
