#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "agentquest/agents.hpp"
#include "agentquest/core.hpp"
#include "agentquest/envs/mastermind.hpp"
#include "agentquest/envs/sudoku.hpp"
#include "agentquest/harness/config.hpp"
#include "agentquest/harness/persistence.hpp"
#include "agentquest/llm_agent.hpp"
#include "agentquest/metrics.hpp"

namespace agentquest::harness {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kAgentSeedSalt = 0xA6E7'5EED'0000'0001ULL;

/// Seeds derive from the master seed and the instance index only, so adding
/// instances never changes the existing ones.
inline std::uint64_t instance_seed(std::uint64_t master, int instance_id) {
  return master ^ static_cast<std::uint64_t>(instance_id);
}

/// "<givens> <solution>" lines; blank lines and '#' comments are skipped.
inline std::vector<sudoku::Instance> load_puzzles(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open puzzle file " + file.string());
  std::vector<sudoku::Instance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(sudoku::instance_from_string(line));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw std::runtime_error("no puzzles in " + file.string());
  return out;
}

/// Rebuilds a driver from a benchmark and its truth descriptor.
inline std::unique_ptr<Driver> make_driver(Benchmark benchmark, const std::string& truth) {
  if (benchmark == Benchmark::mastermind) return std::make_unique<mastermind::Driver>(truth);
  return std::make_unique<sudoku::Driver>(sudoku::instance_from_string(truth));
}

/// Truth descriptor for instance `instance_id` of a run.
inline std::string instance_truth(const RunConfig& config, int instance_id,
                                  const std::vector<sudoku::Instance>& puzzles = {}) {
  const auto seed = instance_seed(config.seed, instance_id);
  if (config.benchmark == Benchmark::mastermind) return mastermind::random_code(config.mastermind, seed);
  if (!puzzles.empty()) return sudoku::describe(puzzles[static_cast<std::size_t>(instance_id) % puzzles.size()]);
  return sudoku::describe(sudoku::generate(seed, config.sudoku_empty));
}

inline std::unique_ptr<Agent> make_agent(const RunConfig& config, int instance_id, const std::string& truth) {
  const auto seed = instance_seed(config.seed, instance_id) ^ kAgentSeedSalt;
  const bool mm = config.benchmark == Benchmark::mastermind;
  auto random_agent = [&]() -> std::unique_ptr<Agent> {
    if (mm)
      return std::make_unique<RandomMastermindAgent>(config.mastermind.code_length, config.mastermind.alphabet, seed);
    return std::make_unique<RandomSudokuAgent>(seed);
  };

  std::unique_ptr<Agent> agent;
  switch (config.agent) {
    case AgentKind::random:
      agent = random_agent();
      break;
    case AgentKind::consistent:
    case AgentKind::oracle:
      if (mm)
        agent = std::make_unique<ConsistentMastermindAgent>(config.mastermind.code_length, config.mastermind.alphabet);
      else
        agent = std::make_unique<SudokuOracleAgent>(sudoku::instance_from_string(truth));
      break;
    case AgentKind::stutter:
      agent = std::make_unique<StutterAgent>(random_agent(), config.stutter_period);
      break;
    case AgentKind::llm: {
      LlmOptions opts;
      opts.model = config.llm_model;
      opts.system_prompt = config.llm_system_prompt;
      opts.timeout = std::chrono::seconds(config.llm_timeout_s);
      opts.retry.max_attempts = config.llm_max_attempts;
      opts.retry.initial_backoff = std::chrono::milliseconds(config.llm_backoff_ms);
      agent = std::make_unique<HttpLlmAgent>(options_from_env(std::move(opts)));
      break;
    }
  }
  if (config.memory) agent = std::make_unique<MemoryDedupAgent>(std::move(agent), config.retry_budget);
  return agent;
}

/// Scores hidden states against the milestones of one instance.
class ProgressScorer {
 public:
  ProgressScorer(Benchmark benchmark, const std::string& truth) : benchmark_(benchmark), truth_(truth) {
    if (benchmark_ == Benchmark::sudoku) instance_ = sudoku::instance_from_string(truth);
  }

  int operator()(const EnvState& state) const {
    if (benchmark_ == Benchmark::mastermind)
      return metrics::get_progress_mastermind(std::get<std::string>(state), truth_);
    return metrics::get_progress_sudoku(std::get<SudokuGrid>(state), *instance_);
  }

 private:
  Benchmark benchmark_;
  std::string truth_;
  std::optional<sudoku::Instance> instance_;
};

inline std::string run_id(const RunConfig& c) {
  return std::string(to_string(c.benchmark)) + "-" + std::string(to_string(c.agent)) + (c.memory ? "-mem" : "") +
         "-s" + std::to_string(c.seed) + "-T" + std::to_string(c.max_steps);
}

inline fs::path trajectory_path(const fs::path& run_dir, int instance_id) {
  char name[32];
  std::snprintf(name, sizeof name, "instance_%04d.jsonl", instance_id);
  return run_dir / "trajectories" / name;
}

/// The agent loop for one instance: reset, then step until done or the cap,
/// scoring progress and repetitions after every step. Steps are appended to
/// `file` as they happen when a path is given.
inline Trajectory run_instance(const RunConfig& config, int instance_id, const std::string& truth,
                               Agent& agent, const std::optional<fs::path>& file = std::nullopt) {
  Trajectory t;
  t.run_id = run_id(config);
  t.benchmark = config.benchmark;
  t.instance_id = instance_id;
  t.seed = instance_seed(config.seed, instance_id);
  t.max_steps = config.max_steps;
  t.truth_descriptor = truth;

  auto driver = make_driver(config.benchmark, truth);
  t.env_version = std::string(driver->version());
  const ProgressScorer score(config.benchmark, truth);
  metrics::RepetitionTracker repetitions(config.theta);

  Observation obs = driver->reset();
  t.initial_observation = obs.output;
  std::optional<TrajectoryWriter> writer;
  if (file) writer.emplace(*file, t, to_json(config));

  std::vector<Exchange> history;
  while (!obs.done && static_cast<int>(t.records.size()) < config.max_steps) {
    const auto started = std::chrono::steady_clock::now();
    std::string action = agent.next_action(obs.output, history);
    const StepFlags flags = agent.last_flags();
    history.push_back({obs.output, action});
    obs = driver->step(Action{action});

    StepRecord r;
    r.step_index = static_cast<int>(t.records.size()) + 1;
    r.action_value = action;
    r.observation_output = obs.output;
    r.done = obs.done;
    r.progress_raw = score(driver->state());
    repetitions.add(std::move(action));
    r.repetitions_raw = repetitions.count();
    r.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
                         .count();
    r.flags = flags;
    if (writer) writer->append(r);
    t.records.push_back(std::move(r));
    if (flags.aborted) break;
  }
  t.success = obs.done;
  return t;
}

struct RunResult {
  std::vector<Trajectory> trajectories;  // ordered by instance id
  metrics::RunReport report;
};

inline void write_config(const fs::path& run_dir, const RunConfig& config) {
  std::ofstream out(run_dir / "config.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (run_dir / "config.json").string());
  out << to_json(config).dump(2) << '\n';
}

inline RunConfig read_config(const fs::path& run_dir) {
  std::ifstream in(run_dir / "config.json");
  if (!in) throw std::runtime_error("missing " + (run_dir / "config.json").string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("corrupt " + (run_dir / "config.json").string());
  return config_from_json(j);
}

/// Runs every instance (up to `parallelism` at a time), persisting each
/// trajectory when an output directory is configured.
inline std::vector<Trajectory> run_trajectories(const RunConfig& config) {
  config.validate();
  std::vector<sudoku::Instance> puzzles;
  if (config.benchmark == Benchmark::sudoku && !config.sudoku_puzzles.empty())
    puzzles = load_puzzles(config.sudoku_puzzles);

  const bool persist = !config.output_dir.empty();
  if (persist) {
    fs::create_directories(fs::path(config.output_dir) / "trajectories");
    write_config(config.output_dir, config);
  }

  std::vector<Trajectory> out(static_cast<std::size_t>(config.instances));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < config.instances; i = next++) {
      try {
        const auto truth = instance_truth(config, i, puzzles);
        auto agent = make_agent(config, i, truth);
        std::optional<fs::path> file;
        if (persist) file = trajectory_path(config.output_dir, i);
        out[i] = run_instance(config, i, truth, *agent, file);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::min(config.parallelism, config.instances);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace agentquest::harness
