#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentquest/core.hpp"

namespace agentquest::harness {

inline constexpr int kFormatVersion = 1;

/// Missing, unreadable or malformed trajectory file. The message names the file.
class TrajectoryError : public std::runtime_error {
 public:
  TrajectoryError(const std::filesystem::path& file, const std::string& what)
      : std::runtime_error(file.string() + ": " + what), file_(file) {}
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
};

inline nlohmann::json header_json(const Trajectory& t, const nlohmann::json& config) {
  return {{"type", "header"},
          {"format_version", kFormatVersion},
          {"run_id", t.run_id},
          {"benchmark", to_string(t.benchmark)},
          {"instance_id", t.instance_id},
          {"seed", t.seed},
          {"max_steps", t.max_steps},
          {"truth", t.truth_descriptor},
          {"env_version", t.env_version},
          {"initial_observation", t.initial_observation},
          {"config", config}};
}

inline nlohmann::json step_json(const StepRecord& r) {
  return {{"type", "step"},
          {"step", r.step_index},
          {"action", r.action_value},
          {"observation", r.observation_output},
          {"done", r.done},
          {"progress", r.progress_raw},
          {"repetitions", r.repetitions_raw},
          {"wall_time_ms", r.wall_time_ms},
          {"flags",
           {{"repeated_forced", r.flags.repeated_forced},
            {"aborted", r.flags.aborted},
            {"agent_failure", r.flags.agent_failure}}}};
}

/// Append-only JSONL writer: one header line, then one line per step.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::filesystem::path& file, const Trajectory& header, const nlohmann::json& config)
      : file_(file), out_(file, std::ios::binary | std::ios::trunc) {
    if (!out_) throw TrajectoryError(file, "cannot open for writing");
    write_line(header_json(header, config));
  }

  void append(const StepRecord& r) { write_line(step_json(r)); }

 private:
  void write_line(const nlohmann::json& j) {
    out_ << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    out_.flush();
    if (!out_) throw TrajectoryError(file_, "write failed");
  }

  std::filesystem::path file_;
  std::ofstream out_;
};

inline void write_trajectory(const std::filesystem::path& file, const Trajectory& t,
                             const nlohmann::json& config = nlohmann::json::object()) {
  TrajectoryWriter w(file, t, config);
  for (const auto& r : t.records) w.append(r);
}

struct LoadedTrajectory {
  Trajectory trajectory;
  nlohmann::json config;
};

inline LoadedTrajectory read_trajectory(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw TrajectoryError(file, "cannot open trajectory file");
  LoadedTrajectory out;
  auto& t = out.trajectory;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw TrajectoryError(file, where + "not a JSON object");
    try {
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        if (have_header) throw TrajectoryError(file, where + "duplicate header");
        if (j.at("format_version").get<int>() != kFormatVersion)
          throw TrajectoryError(file, where + "unsupported format_version");
        have_header = true;
        t.run_id = j.at("run_id").get<std::string>();
        t.benchmark = parse_benchmark(j.at("benchmark").get<std::string>());
        t.instance_id = j.at("instance_id").get<int>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.max_steps = j.at("max_steps").get<int>();
        t.truth_descriptor = j.at("truth").get<std::string>();
        t.env_version = j.at("env_version").get<std::string>();
        t.initial_observation = j.at("initial_observation").get<std::string>();
        out.config = j.value("config", nlohmann::json::object());
      } else if (type == "step") {
        if (!have_header) throw TrajectoryError(file, where + "step before header");
        StepRecord r;
        r.step_index = j.at("step").get<int>();
        r.action_value = j.at("action").get<std::string>();
        r.observation_output = j.at("observation").get<std::string>();
        r.done = j.at("done").get<bool>();
        r.progress_raw = j.at("progress").get<int>();
        r.repetitions_raw = j.at("repetitions").get<int>();
        r.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
        if (j.contains("flags")) {
          const auto& f = j.at("flags");
          r.flags.repeated_forced = f.value("repeated_forced", false);
          r.flags.aborted = f.value("aborted", false);
          r.flags.agent_failure = f.value("agent_failure", false);
        }
        if (r.step_index != static_cast<int>(t.records.size()) + 1)
          throw TrajectoryError(file, where + "step indices are not consecutive");
        if (!t.records.empty() && t.records.back().done)
          throw TrajectoryError(file, where + "step recorded after completion");
        t.records.push_back(std::move(r));
      } else {
        throw TrajectoryError(file, where + "unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw TrajectoryError(file, where + e.what());
    } catch (const std::invalid_argument& e) {
      throw TrajectoryError(file, where + e.what());
    }
  }
  if (!have_header) throw TrajectoryError(file, "missing header line");
  if (static_cast<int>(t.records.size()) > t.max_steps)
    throw TrajectoryError(file, "more steps than max_steps");
  t.success = !t.records.empty() && t.records.back().done;
  return out;
}

}  // namespace agentquest::harness
