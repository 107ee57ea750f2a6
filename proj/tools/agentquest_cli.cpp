// Command-line front end: run, report, replay, extend.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "agentquest/agentquest.hpp"

namespace aq = agentquest;
namespace fs = std::filesystem;

namespace {

void print_report(const aq::metrics::RunReport& r) {
  std::printf("%s: %d instances, max %d steps\n", std::string(aq::to_string(r.benchmark)).c_str(), r.instances,
              r.max_steps);
  std::printf("  SR      %.4f (%d solved, %d aborted)\n", r.success_rate, r.successes, r.aborted);
  std::printf("  Steps   %.2f", r.mean_steps);
  if (r.mean_steps_to_success) std::printf("  (%.2f over solved runs)", *r.mean_steps_to_success);
  std::printf("\n  PR_%d   %.4f\n  RR_%d   %.4f\n", r.at_step, r.pr_at, r.at_step, r.rr_at);
}

int report_mismatches(const aq::harness::ReportOutput& out) {
  for (const auto& m : out.mismatches) std::cerr << "warning: " << m << '\n';
  return out.mismatches.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent benchmarking harness: Mastermind and Sudoku with progress and repetition rates"};
  app.require_subcommand(1);

  aq::harness::RunConfig config;
  std::string benchmark = "mastermind";
  std::string agent = "random";
  std::string rr_norm = "final";
  bool no_repeats = false;

  auto* run = app.add_subcommand("run", "Run a batch of benchmark instances");
  run->add_option("--benchmark", benchmark, "mastermind | sudoku")
      ->check(CLI::IsMember({"mastermind", "sudoku"}));
  run->add_option("--agent", agent, "random | consistent | oracle | stutter | llm")
      ->check(CLI::IsMember({"random", "consistent", "oracle", "stutter", "llm"}));
  run->add_option("--instances", config.instances, "Number of instances")->capture_default_str();
  run->add_option("--max-steps", config.max_steps, "Step cap per instance")->capture_default_str();
  run->add_option("--theta", config.theta, "Repetition similarity threshold in [0,1]")->capture_default_str();
  run->add_option("--rr-norm", rr_norm, "final | current")->check(CLI::IsMember({"final", "current"}));
  run->add_option("--seed", config.seed, "Master seed")->capture_default_str();
  run->add_option("--parallelism", config.parallelism, "Concurrent instances")->capture_default_str();
  run->add_option("--out", config.output_dir, "Output directory")->required();
  run->add_option("--code-length", config.mastermind.code_length, "Mastermind code length")->capture_default_str();
  run->add_option("--alphabet", config.mastermind.alphabet, "Mastermind digit alphabet")->capture_default_str();
  run->add_flag("--no-repeats", no_repeats, "Draw Mastermind codes without repeated digits");
  run->add_option("--sudoku-empty", config.sudoku_empty, "Target empty cells for generated puzzles")
      ->capture_default_str();
  run->add_option("--puzzles", config.sudoku_puzzles, "Sudoku fixture file (\"givens solution\" per line)");
  run->add_option("--period", config.stutter_period, "Stutter agent period")->capture_default_str();
  run->add_flag("--memory", config.memory, "Wrap the agent in the duplicate-action memory");
  run->add_option("--retry-budget", config.retry_budget, "Memory re-prompts per step")->capture_default_str();
  run->add_option("--model", config.llm_model, "LLM model name")->capture_default_str();
  run->add_option("--system-prompt", config.llm_system_prompt, "LLM system prompt");
  run->add_option("--llm-attempts", config.llm_max_attempts, "LLM request attempts per step")->capture_default_str();
  run->add_option("--llm-backoff-ms", config.llm_backoff_ms, "First LLM retry delay")->capture_default_str();
  run->add_option("--llm-timeout", config.llm_timeout_s, "LLM request timeout in seconds")->capture_default_str();

  std::string report_dir;
  std::optional<int> at_step;
  auto* report = app.add_subcommand("report", "Recompute metrics and CSV reports from a run directory");
  report->add_option("dir", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--at-step", at_step, "Step N for PR_N / RR_N (default: max steps)");

  std::string replay_file;
  auto* replay = app.add_subcommand("replay", "Replay a trajectory file and check determinism");
  replay->add_option("file", replay_file, "Trajectory .jsonl")->required()->check(CLI::ExistingFile);

  std::string extend_dir;
  int extend_steps = 0;
  auto* extend = app.add_subcommand("extend", "Re-run a batch with a larger step cap");
  extend->add_option("dir", extend_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  extend->add_option("--max-steps", extend_steps, "New step cap")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      config.benchmark = aq::parse_benchmark(benchmark);
      config.agent = aq::harness::parse_agent_kind(agent);
      config.rr_norm = aq::metrics::parse_normalization(rr_norm);
      config.mastermind.allow_repeats = !no_repeats;
      auto result = aq::harness::run(config);
      print_report(result.report);
      std::printf("wrote %s\n", config.output_dir.c_str());
      return 0;
    }
    if (*report) {
      auto out = aq::harness::report(report_dir, at_step);
      print_report(out.report);
      return report_mismatches(out);
    }
    if (*replay) {
      const auto verdict = aq::harness::replay(fs::path(replay_file));
      if (verdict.pass) {
        std::printf("PASS %s\n", replay_file.c_str());
        return 0;
      }
      std::printf("FAIL %s at step %d: %s\n", replay_file.c_str(), verdict.divergence_step.value_or(-1),
                  verdict.message.c_str());
      return 1;
    }
    if (*extend) {
      auto base_config = aq::harness::read_config(extend_dir);
      base_config.output_dir = extend_dir;
      auto base = aq::harness::report(extend_dir);
      const auto ext = aq::harness::extend_runtime(base_config, extend_steps, base.report);
      print_report(ext.extended);
      std::printf("  dSR %+.4f  dPR %+.4f  dRR %+.4f\n", ext.delta_sr(), ext.delta_pr(), ext.delta_rr());
      std::printf("wrote %s\n",
                  (fs::path(extend_dir) / aq::harness::extension_dir_name(extend_steps)).string().c_str());
      return 0;
    }
  } catch (const aq::harness::VersionMismatch& e) {
    std::cerr << "version mismatch: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
