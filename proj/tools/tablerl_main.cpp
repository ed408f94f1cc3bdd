#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "tablerl/client.hpp"
#include "tablerl/commands.hpp"
#include "tablerl/config.hpp"
#include "tablerl/errors.hpp"

namespace {

std::shared_ptr<tablerl::ChatClient> make_client(const tablerl::PipelineConfig& config,
                                                 const std::string& replay_path, bool mock) {
  using namespace tablerl;
  if (!replay_path.empty() && std::filesystem::exists(replay_path)) {
    return std::make_shared<ReplayChatClient>(replay_path);
  }
  std::shared_ptr<ChatClient> base;
  if (mock) {
    base = std::make_shared<MockChatClient>();
  } else {
    HttpChatClient::Options options;
    options.endpoint = config.endpoint;
    options.auth_env = config.auth_env;
    options.retries = config.retries;
    options.backoff_ms = config.backoff_ms;
    base = std::make_shared<HttpChatClient>(options);
  }
  if (!replay_path.empty()) {
    return std::make_shared<RecordingChatClient>(base, replay_path);
  }
  return base;
}

void print_result(const tablerl::StageResult& result) {
  std::cout << result.stage << ":";
  for (const auto& [key, value] : result.counts) std::cout << ' ' << key << '=' << value;
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic training and evaluation pipeline for table reasoning"};
  app.require_subcommand(1);

  std::string config_path, replay_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool mock = false;
  app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  app.add_option("--seed", seed, "base seed for sampling and synthesis");
  app.add_option("--replay", replay_path,
                 "transcript file: replayed when it exists, recorded into otherwise");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--mock", mock, "use the offline mock client instead of HTTP");

  std::string tables_path, lti_path, qa_path, completions_path, groups_path, report_path;
  std::size_t count = 100;
  bool include_text = false;

  auto* synth = app.add_subcommand("synth-lti", "synthesize layout-transform instances");
  synth->add_option("--tables", tables_path, "tables.jsonl input")->required();
  synth->add_option("--count", count, "instances to synthesize");

  auto* rewrite = app.add_subcommand("rewrite-labels", "rewrite templates into fluent programs");
  rewrite->add_option("--lti", lti_path, "lti.jsonl input");

  auto* distill = app.add_subcommand("distill", "cold-start distillation with a quality gate");
  distill->add_option("--qa", qa_path, "qa.jsonl input")->required();
  distill->add_flag("--include-text", include_text, "also request text-form completions");

  auto* groups = app.add_subcommand("generate-groups", "sample and score completion groups");
  groups->add_option("--qa", qa_path, "qa.jsonl input")->required();

  auto* score = app.add_subcommand("score", "reward breakdowns for recorded completions");
  score->add_option("--qa", qa_path, "qa.jsonl input")->required();
  score->add_option("--completions", completions_path, "completions.jsonl input")->required();

  auto* advantages = app.add_subcommand("advantages", "group-normalized advantages");
  advantages->add_option("--groups", groups_path, "groups.jsonl input")->required();

  auto* objective = app.add_subcommand("objective", "clipped surrogate minus KL per group");
  objective->add_option("--groups", groups_path, "groups.jsonl input")->required();

  auto* evaluate = app.add_subcommand("evaluate", "accuracy, votes, pass@k, difficulty, tags");
  evaluate->add_option("--qa", qa_path, "qa.jsonl input")->required();
  evaluate->add_option("--completions", completions_path, "completions.jsonl input")->required();

  auto* stratify = app.add_subcommand("stratify", "per-instance difficulty labels");
  stratify->add_option("--qa", qa_path, "qa.jsonl input")->required();
  stratify->add_option("--completions", completions_path, "completions.jsonl input")->required();

  auto* report = app.add_subcommand("report", "render report.json as CSV");
  report->add_option("--report", report_path, "report.json input");

  CLI11_PARSE(app, argc, argv);

  try {
    tablerl::CommandContext ctx;
    ctx.config = config_path.empty() ? tablerl::PipelineConfig{} : tablerl::load_config(config_path);
    ctx.seed = seed;
    ctx.out_dir = out_dir;
    ctx.client = make_client(ctx.config, replay_path, mock);

    auto default_out = [&](const std::string& name) {
      return (std::filesystem::path(out_dir) / name).string();
    };
    if (synth->parsed()) {
      print_result(tablerl::cmd_synth_lti(ctx, tables_path, count));
    } else if (rewrite->parsed()) {
      print_result(tablerl::cmd_rewrite_labels(
          ctx, lti_path.empty() ? default_out("lti.jsonl") : lti_path));
    } else if (distill->parsed()) {
      print_result(tablerl::cmd_distill(ctx, qa_path, include_text));
    } else if (groups->parsed()) {
      print_result(tablerl::cmd_generate_groups(ctx, qa_path));
    } else if (score->parsed()) {
      print_result(tablerl::cmd_score(ctx, qa_path, completions_path));
    } else if (advantages->parsed()) {
      print_result(tablerl::cmd_advantages(ctx, groups_path));
    } else if (objective->parsed()) {
      print_result(tablerl::cmd_objective(ctx, groups_path));
    } else if (evaluate->parsed()) {
      print_result(tablerl::cmd_evaluate(ctx, qa_path, completions_path));
    } else if (stratify->parsed()) {
      print_result(tablerl::cmd_stratify(ctx, qa_path, completions_path));
    } else if (report->parsed()) {
      print_result(tablerl::cmd_report(
          ctx, report_path.empty() ? default_out("report.json") : report_path));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
