#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "agentquest/core.hpp"
#include "agentquest/harness/config.hpp"
#include "agentquest/harness/persistence.hpp"
#include "agentquest/harness/run.hpp"
#include "agentquest/metrics.hpp"

namespace agentquest::harness {

namespace fs = std::filesystem;

/// Raised when a trajectory was written by a different environment version.
class VersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

struct ReplayVerdict {
  bool pass = true;
  std::optional<int> divergence_step;  // 0 is the reset observation
  std::string message;
};

/// Rebuilds the driver from the recorded truth and replays every action,
/// comparing observations byte for byte.
inline ReplayVerdict replay(const Trajectory& t) {
  auto driver = make_driver(t.benchmark, t.truth_descriptor);
  if (driver->version() != t.env_version)
    throw VersionMismatch("trajectory was recorded with environment '" + t.env_version + "' but this build has '" +
                          std::string(driver->version()) + "'");
  auto fail = [](int step, std::string msg) { return ReplayVerdict{false, step, std::move(msg)}; };

  const Observation first = driver->reset();
  if (first.output != t.initial_observation) return fail(0, "reset observation differs");
  if (first.done && !t.records.empty()) return fail(1, "environment finished at reset but steps were recorded");
  for (const auto& r : t.records) {
    Observation obs;
    try {
      obs = driver->step(Action{r.action_value});
    } catch (const ContractViolation& e) {
      return fail(r.step_index, e.what());
    }
    if (obs.output != r.observation_output) return fail(r.step_index, "observation differs");
    if (obs.done != r.done) return fail(r.step_index, "done flag differs");
  }
  return {true, std::nullopt, "ok"};
}

inline ReplayVerdict replay(const fs::path& file) { return replay(read_trajectory(file).trajectory); }

// ---------------------------------------------------------------------------
// Offline recomputation
// ---------------------------------------------------------------------------

/// Recomputes per-step progress (by replaying the driver) and cumulative
/// repetitions from the recorded actions. Returns one description per field
/// that disagrees with the stored value; `t` is updated to the recomputed
/// values.
inline std::vector<std::string> recompute_metrics(Trajectory& t, double theta) {
  std::vector<std::string> mismatches;
  auto driver = make_driver(t.benchmark, t.truth_descriptor);
  const ProgressScorer score(t.benchmark, t.truth_descriptor);
  const auto repeats = metrics::cumulative_repetitions(t.actions(), theta);
  driver->reset();
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    auto& r = t.records[i];
    int progress = r.progress_raw;
    try {
      driver->step(Action{r.action_value});
      progress = score(driver->state());
    } catch (const ContractViolation&) {
      mismatches.push_back("instance " + std::to_string(t.instance_id) + " step " + std::to_string(r.step_index) +
                           ": cannot replay");
    }
    auto note = [&](const char* field, int stored, int fresh) {
      if (stored != fresh)
        mismatches.push_back("instance " + std::to_string(t.instance_id) + " step " + std::to_string(r.step_index) +
                             ": " + field + " stored " + std::to_string(stored) + ", recomputed " +
                             std::to_string(fresh));
    };
    note("progress", r.progress_raw, progress);
    note("repetitions", r.repetitions_raw, repeats[i]);
    r.progress_raw = progress;
    r.repetitions_raw = repeats[i];
  }
  return mismatches;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline std::string summary_csv(const metrics::RunReport& rep) {
  const auto n = std::to_string(rep.at_step);
  std::ostringstream out;
  out << "benchmark,instances,max_steps,SR,Steps,PR_" << n << ",RR_" << n << ",Steps_success,aborted\n";
  out << to_string(rep.benchmark) << ',' << rep.instances << ',' << rep.max_steps << ',' << fmt6(rep.success_rate)
      << ',' << fmt6(rep.mean_steps) << ',' << fmt6(rep.pr_at) << ',' << fmt6(rep.rr_at) << ','
      << (rep.mean_steps_to_success ? fmt6(*rep.mean_steps_to_success) : std::string()) << ',' << rep.aborted
      << '\n';
  return out.str();
}

inline std::string curves_csv(const metrics::RunReport& rep) {
  std::ostringstream out;
  out << "step,mean_PR,mean_RR\n";
  for (std::size_t i = 0; i < rep.mean_pr.size(); ++i)
    out << i + 1 << ',' << fmt6(rep.mean_pr[i]) << ',' << fmt6(rep.mean_rr[i]) << '\n';
  return out.str();
}

inline std::string instances_csv(const metrics::RunReport& rep) {
  const auto n = std::to_string(rep.at_step);
  std::ostringstream out;
  out << "instance,success,steps,PR_" << n << ",RR_" << n << ",aborted,flagged\n";
  for (const auto& r : rep.rows)
    out << r.instance_id << ',' << (r.success ? 1 : 0) << ',' << r.steps << ',' << fmt6(r.pr_final) << ','
        << fmt6(r.rr_final) << ',' << (r.aborted ? 1 : 0) << ',' << (r.flagged ? 1 : 0) << '\n';
  return out.str();
}

/// One row per recorded step: whether that action repeats an earlier one.
inline std::string repetition_map_csv(std::span<const Trajectory> trajectories, double theta) {
  std::vector<const Trajectory*> sorted;
  for (const auto& t : trajectories) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const Trajectory* a, const Trajectory* b) { return a->instance_id < b->instance_id; });
  std::ostringstream out;
  out << "instance,step,is_repeated\n";
  for (const auto* t : sorted) {
    const auto flags = metrics::repetition_flags(t->actions(), theta);
    for (std::size_t i = 0; i < flags.size(); ++i)
      out << t->instance_id << ',' << i + 1 << ',' << (flags[i] ? 1 : 0) << '\n';
  }
  return out.str();
}

inline void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

// ---------------------------------------------------------------------------
// report()
// ---------------------------------------------------------------------------

struct ReportOutput {
  metrics::RunReport report;
  std::vector<Trajectory> trajectories;  // with recomputed metrics
  std::vector<std::string> mismatches;   // stored vs recomputed
};

inline std::vector<fs::path> trajectory_files(const fs::path& run_dir) {
  const auto dir = run_dir / "trajectories";
  if (!fs::is_directory(dir)) throw std::runtime_error("no trajectories directory in " + run_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no trajectory files in " + dir.string());
  return files;
}

/// Recomputes every metric from the persisted trajectories and writes
/// summary.csv, curves.csv, instances.csv and repetition_map.csv into
/// `run_dir`.
inline ReportOutput report(const fs::path& run_dir, std::optional<int> at_step = std::nullopt) {
  const RunConfig config = read_config(run_dir);
  ReportOutput out;
  for (const auto& file : trajectory_files(run_dir)) {
    auto loaded = read_trajectory(file);
    try {
      auto m = recompute_metrics(loaded.trajectory, config.theta);
      out.mismatches.insert(out.mismatches.end(), m.begin(), m.end());
    } catch (const std::invalid_argument& e) {
      throw TrajectoryError(file, e.what());
    }
    out.trajectories.push_back(std::move(loaded.trajectory));
  }
  out.report = metrics::aggregate(out.trajectories, {config.theta, config.rr_norm, at_step});
  write_text(run_dir / "summary.csv", summary_csv(out.report));
  write_text(run_dir / "curves.csv", curves_csv(out.report));
  write_text(run_dir / "instances.csv", instances_csv(out.report));
  write_text(run_dir / "repetition_map.csv", repetition_map_csv(out.trajectories, config.theta));
  return out;
}

// ---------------------------------------------------------------------------
// run() / extend_runtime()
// ---------------------------------------------------------------------------

/// Runs all instances; with an output directory the report is recomputed
/// from the files just written, otherwise aggregated in memory.
inline RunResult run(const RunConfig& config) {
  RunResult result;
  result.trajectories = run_trajectories(config);
  if (config.output_dir.empty()) {
    result.report = metrics::aggregate(result.trajectories, {config.theta, config.rr_norm, std::nullopt});
  } else {
    result.report = report(config.output_dir).report;
  }
  return result;
}

struct ExtensionReport {
  metrics::RunReport base;
  metrics::RunReport extended;
  double delta_sr() const { return extended.success_rate - base.success_rate; }
  double delta_pr() const { return extended.pr_at - base.pr_at; }
  double delta_rr() const { return extended.rr_at - base.rr_at; }
};

inline std::string extension_csv(const ExtensionReport& e) {
  std::ostringstream out;
  out << "max_steps_base,max_steps_extended,SR_base,SR_extended,dSR,PR_base,PR_extended,dPR,RR_base,RR_extended,dRR,"
         "Steps_base,Steps_extended\n";
  out << e.base.max_steps << ',' << e.extended.max_steps << ',' << fmt6(e.base.success_rate) << ','
      << fmt6(e.extended.success_rate) << ',' << fmt6(e.delta_sr()) << ',' << fmt6(e.base.pr_at) << ','
      << fmt6(e.extended.pr_at) << ',' << fmt6(e.delta_pr()) << ',' << fmt6(e.base.rr_at) << ','
      << fmt6(e.extended.rr_at) << ',' << fmt6(e.delta_rr()) << ',' << fmt6(e.base.mean_steps) << ','
      << fmt6(e.extended.mean_steps) << '\n';
  return out.str();
}

inline std::string extension_dir_name(int new_max_steps) { return "extended_T" + std::to_string(new_max_steps); }

/// Re-runs the same seeds with a larger step cap. The base report is
/// recomputed by running `config` when not supplied.
inline ExtensionReport extend_runtime(const RunConfig& config, int new_max_steps,
                                      std::optional<metrics::RunReport> base = std::nullopt) {
  if (new_max_steps <= config.max_steps)
    throw std::invalid_argument("extended max_steps must exceed the original " + std::to_string(config.max_steps));
  ExtensionReport e;
  if (base) {
    e.base = *base;
  } else {
    RunConfig in_memory = config;
    in_memory.output_dir.clear();
    e.base = run(in_memory).report;
  }
  RunConfig longer = config;
  longer.max_steps = new_max_steps;
  if (!config.output_dir.empty()) longer.output_dir = (fs::path(config.output_dir) / extension_dir_name(new_max_steps)).string();
  e.extended = run(longer).report;
  if (!longer.output_dir.empty()) write_text(fs::path(longer.output_dir) / "extension.csv", extension_csv(e));
  return e;
}

}  // namespace agentquest::harness
