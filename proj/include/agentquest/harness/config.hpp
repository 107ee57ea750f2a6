#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "agentquest/core.hpp"
#include "agentquest/envs/mastermind.hpp"
#include "agentquest/metrics.hpp"

namespace agentquest::harness {

enum class AgentKind { random, consistent, oracle, stutter, llm };

inline std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::random: return "random";
    case AgentKind::consistent: return "consistent";
    case AgentKind::oracle: return "oracle";
    case AgentKind::stutter: return "stutter";
    case AgentKind::llm: return "llm";
  }
  return "?";
}

inline AgentKind parse_agent_kind(std::string_view s) {
  for (auto k : {AgentKind::random, AgentKind::consistent, AgentKind::oracle, AgentKind::stutter, AgentKind::llm})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown agent: " + std::string(s));
}

inline constexpr std::string_view kDefaultSystemPrompt =
    "You are playing a game through a text interface. Each user message is the environment's "
    "latest observation. Reply with your next action only, exactly in the format the environment asks for.";

struct RunConfig {
  Benchmark benchmark = Benchmark::mastermind;
  AgentKind agent = AgentKind::random;
  int stutter_period = 2;
  bool memory = false;  // wrap the agent in the dedup memory
  int retry_budget = 5;
  std::string llm_model = "gpt-4";
  std::string llm_system_prompt = std::string(kDefaultSystemPrompt);
  int llm_max_attempts = 4;
  int llm_backoff_ms = 500;  // first retry delay, doubled each retry
  int llm_timeout_s = 60;

  int instances = 15;
  int max_steps = 60;
  double theta = 1.0;
  metrics::RrNormalization rr_norm = metrics::RrNormalization::final_T;
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::string output_dir;  // empty: keep everything in memory

  mastermind::Config mastermind;
  int sudoku_empty = 40;
  std::string sudoku_puzzles;  // fixture file; empty: generate

  void validate() const {
    if (instances < 1) throw std::invalid_argument("instances must be >= 1");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in [0, 1]");
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
    if (retry_budget < 1) throw std::invalid_argument("retry_budget must be >= 1");
    if (llm_max_attempts < 1 || llm_backoff_ms < 0 || llm_timeout_s < 1)
      throw std::invalid_argument("invalid LLM retry settings");
    if (agent == AgentKind::stutter && stutter_period < 2)
      throw std::invalid_argument("stutter period must be >= 2");
    if (benchmark == Benchmark::sudoku && agent == AgentKind::consistent)
      throw std::invalid_argument("the consistent agent plays mastermind only; use --agent oracle for sudoku");
    if (sudoku_empty < 0 || sudoku_empty > 64) throw std::invalid_argument("sudoku_empty must be in [0, 64]");
    mastermind.validate();
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"benchmark", to_string(c.benchmark)},
          {"agent", to_string(c.agent)},
          {"stutter_period", c.stutter_period},
          {"memory", c.memory},
          {"retry_budget", c.retry_budget},
          {"llm_model", c.llm_model},
          {"llm_system_prompt", c.llm_system_prompt},
          {"llm_max_attempts", c.llm_max_attempts},
          {"llm_backoff_ms", c.llm_backoff_ms},
          {"llm_timeout_s", c.llm_timeout_s},
          {"instances", c.instances},
          {"max_steps", c.max_steps},
          {"theta", c.theta},
          {"rr_norm", metrics::to_string(c.rr_norm)},
          {"seed", c.seed},
          {"parallelism", c.parallelism},
          {"output_dir", c.output_dir},
          {"mastermind",
           {{"code_length", c.mastermind.code_length},
            {"alphabet", c.mastermind.alphabet},
            {"allow_repeats", c.mastermind.allow_repeats}}},
          {"sudoku", {{"target_empty", c.sudoku_empty}, {"puzzles", c.sudoku_puzzles}}}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.benchmark = parse_benchmark(j.at("benchmark").get<std::string>());
  c.agent = parse_agent_kind(j.at("agent").get<std::string>());
  c.stutter_period = j.value("stutter_period", c.stutter_period);
  c.memory = j.value("memory", c.memory);
  c.retry_budget = j.value("retry_budget", c.retry_budget);
  c.llm_model = j.value("llm_model", c.llm_model);
  c.llm_system_prompt = j.value("llm_system_prompt", c.llm_system_prompt);
  c.llm_max_attempts = j.value("llm_max_attempts", c.llm_max_attempts);
  c.llm_backoff_ms = j.value("llm_backoff_ms", c.llm_backoff_ms);
  c.llm_timeout_s = j.value("llm_timeout_s", c.llm_timeout_s);
  c.instances = j.at("instances").get<int>();
  c.max_steps = j.at("max_steps").get<int>();
  c.theta = j.value("theta", c.theta);
  c.rr_norm = metrics::parse_normalization(j.value("rr_norm", std::string("final")));
  c.seed = j.at("seed").get<std::uint64_t>();
  c.parallelism = j.value("parallelism", c.parallelism);
  c.output_dir = j.value("output_dir", std::string());
  if (j.contains("mastermind")) {
    const auto& m = j.at("mastermind");
    c.mastermind.code_length = m.value("code_length", c.mastermind.code_length);
    c.mastermind.alphabet = m.value("alphabet", c.mastermind.alphabet);
    c.mastermind.allow_repeats = m.value("allow_repeats", c.mastermind.allow_repeats);
  }
  if (j.contains("sudoku")) {
    const auto& s = j.at("sudoku");
    c.sudoku_empty = s.value("target_empty", c.sudoku_empty);
    c.sudoku_puzzles = s.value("puzzles", std::string());
  }
  c.validate();
  return c;
}

}  // namespace agentquest::harness
