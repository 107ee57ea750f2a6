#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace agentquest {

/// Thrown when a caller breaks the driver protocol (step before reset,
/// step after done, double reset) or a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Environment -> agent message.
struct Observation {
  std::string output;
  bool done = false;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Agent -> environment message. Any text is a valid action; the
/// environment decides what to make of it.
struct Action {
  std::string action_value;
};

enum class Benchmark { mastermind, sudoku };

inline std::string_view to_string(Benchmark b) {
  return b == Benchmark::mastermind ? "mastermind" : "sudoku";
}

inline Benchmark parse_benchmark(std::string_view s) {
  if (s == "mastermind") return Benchmark::mastermind;
  if (s == "sudoku") return Benchmark::sudoku;
  throw std::invalid_argument("unknown benchmark: " + std::string(s));
}

/// Row-major 9x9 grid; 0 marks an empty cell.
using SudokuGrid = std::array<std::uint8_t, 81>;

/// Hidden state snapshot. Mastermind exposes the last accepted guess (empty
/// before the first one), Sudoku the current grid.
using EnvState = std::variant<std::string, SudokuGrid>;

/// Per-step flags raised by agents and recorded alongside the step.
struct StepFlags {
  bool repeated_forced = false;  // dedup wrapper ran out of retries
  bool aborted = false;          // agent could not produce an action (LLM transport)
  bool agent_failure = false;    // agent logic reached an impossible state

  bool any() const { return repeated_forced || aborted || agent_failure; }
  friend bool operator==(const StepFlags&, const StepFlags&) = default;
};

struct StepRecord {
  int step_index = 0;  // 1-based, consecutive
  std::string action_value;
  std::string observation_output;
  bool done = false;
  int progress_raw = 0;
  int repetitions_raw = 0;  // cumulative
  std::int64_t wall_time_ms = 0;
  StepFlags flags;
};

/// One benchmark instance's full interaction. Carries the seed and truth so
/// a run can be replayed without the original RNG stream.
struct Trajectory {
  std::string run_id;
  Benchmark benchmark = Benchmark::mastermind;
  int instance_id = 0;
  std::uint64_t seed = 0;
  int max_steps = 0;
  // Mastermind: the secret code. Sudoku: "<givens81> <solution81>".
  std::string truth_descriptor;
  std::string env_version;
  std::string initial_observation;
  std::vector<StepRecord> records;
  bool success = false;

  bool aborted() const {
    for (const auto& r : records)
      if (r.flags.aborted) return true;
    return false;
  }
  int steps() const { return static_cast<int>(records.size()); }
  std::vector<std::string> actions() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.action_value);
    return out;
  }
};

/// Unified environment interface: reset once, then step until done.
///
/// step() never throws on malformed action text; the environment answers
/// with a corrective observation and the step still counts.
class Driver {
 public:
  virtual ~Driver() = default;

  Observation reset() {
    if (reset_called_) throw ContractViolation("reset() called twice on the same driver");
    reset_called_ = true;
    Observation obs = do_reset();
    finished_ = obs.done;
    return obs;
  }

  Observation step(const Action& action) {
    if (!reset_called_) throw ContractViolation("step() called before reset()");
    if (finished_) throw ContractViolation("step() called after the task was completed");
    Observation obs = do_step(action);
    finished_ = obs.done;
    return obs;
  }

  /// Copy of the hidden state; never mutates the environment.
  virtual EnvState state() const = 0;

  /// Tag written into trajectories; replay refuses files with another tag.
  virtual std::string_view version() const = 0;

  bool finished() const { return finished_; }

 protected:
  virtual Observation do_reset() = 0;
  virtual Observation do_step(const Action& action) = 0;

 private:
  bool reset_called_ = false;
  bool finished_ = false;
};

}  // namespace agentquest
