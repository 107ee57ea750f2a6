#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agentquest/core.hpp"
#include "agentquest/envs/sudoku.hpp"

namespace agentquest::metrics {

// ---------------------------------------------------------------------------
// Similarity
// ---------------------------------------------------------------------------

/// Decodes UTF-8 into code points. Malformed bytes map to themselves so that
/// arbitrary agent output still compares deterministically.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    char32_t cp = 0;
    if (ok) {
      cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
      for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b >> 6) != 0x2) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok) {
      out.push_back(b0);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

/// Length of the longest common subsequence, bit-parallel over `a`
/// (Hyyrö's formulation, one 64-bit word per 64 characters).
inline std::size_t lcs_length(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) return 0;
  const std::size_t words = (a.size() + 63) / 64;
  std::unordered_map<char32_t, std::vector<std::uint64_t>> pattern;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& bits = pattern[a[i]];
    if (bits.empty()) bits.assign(words, 0);
    bits[i / 64] |= std::uint64_t{1} << (i % 64);
  }

  std::vector<std::uint64_t> s(words, ~std::uint64_t{0});
  for (char32_t ch : b) {
    auto it = pattern.find(ch);
    if (it == pattern.end()) continue;
    const auto& match = it->second;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = s[w] & match[w];
      const std::uint64_t sum = s[w] + u;
      const std::uint64_t x = sum + carry;
      carry = (sum < s[w]) || (x < sum) ? 1 : 0;
      s[w] = x | (s[w] - u);
    }
  }

  std::size_t lcs = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t zeros = ~s[w];
    const std::size_t bits_here = std::min<std::size_t>(64, a.size() - w * 64);
    if (bits_here < 64) zeros &= (std::uint64_t{1} << bits_here) - 1;
    lcs += static_cast<std::size_t>(std::popcount(zeros));
  }
  return lcs;
}

/// Normalised indel similarity: (|a|+|b| - D)/(|a|+|b|) where D is the edit
/// distance with unit insert/delete and substitution cost 2. Two empty
/// strings are identical (1.0).
inline double levenshtein_ratio(std::string_view a, std::string_view b) {
  const auto ua = decode_utf8(a);
  const auto ub = decode_utf8(b);
  const std::size_t total = ua.size() + ub.size();
  if (total == 0) return 1.0;
  const std::size_t distance = total - 2 * lcs_length(ua, ub);
  return static_cast<double>(total - distance) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Repetitions
// ---------------------------------------------------------------------------

/// flags[i] is true when action i is at least `theta`-similar to some earlier
/// action (every earlier action is compared, not only the unique ones).
inline std::vector<bool> repetition_flags(std::span<const std::string> actions, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in [0, 1]");
  std::vector<bool> flags(actions.size(), false);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    for (std::size_t x = 0; x < i; ++x) {
      // exact duplicates are the common case at theta = 1
      if (actions[i] == actions[x] || levenshtein_ratio(actions[i], actions[x]) >= theta) {
        flags[i] = true;
        break;
      }
    }
  }
  return flags;
}

/// Number of repeated actions: len(actions) minus the unique ones.
inline int get_repetitions(std::span<const std::string> actions, double theta) {
  const auto flags = repetition_flags(actions, theta);
  return static_cast<int>(std::count(flags.begin(), flags.end(), true));
}

/// Cumulative repetition count after each step.
inline std::vector<int> cumulative_repetitions(std::span<const std::string> actions, double theta) {
  const auto flags = repetition_flags(actions, theta);
  std::vector<int> out;
  out.reserve(flags.size());
  int total = 0;
  for (bool f : flags) out.push_back(total += f ? 1 : 0);
  return out;
}

/// Online form of get_repetitions for the agent loop: add() reports whether
/// the new action repeats an earlier one under the same rule.
class RepetitionTracker {
 public:
  explicit RepetitionTracker(double theta) : theta_(theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in [0, 1]");
  }

  bool add(std::string action) {
    bool repeated = false;
    for (const auto& prev : actions_) {
      if (prev == action || levenshtein_ratio(action, prev) >= theta_) {
        repeated = true;
        break;
      }
    }
    actions_.push_back(std::move(action));
    count_ += repeated ? 1 : 0;
    return repeated;
  }

  int count() const { return count_; }

 private:
  double theta_;
  std::vector<std::string> actions_;
  int count_ = 0;
};

// ---------------------------------------------------------------------------
// Progress
// ---------------------------------------------------------------------------

/// Positions where the last guess matches the code. Empty state (no valid
/// guess yet) reaches nothing.
inline int get_progress_mastermind(std::string_view state, std::string_view milestones) {
  if (state.empty()) return 0;
  if (state.size() != milestones.size())
    throw ContractViolation("mastermind progress: state and milestones differ in length");
  int reached = 0;
  for (std::size_t i = 0; i < state.size(); ++i) reached += (state[i] == milestones[i]);
  return reached;
}

/// Initially-empty cells currently holding their solution value.
inline int get_progress_sudoku(const SudokuGrid& grid, const sudoku::Instance& instance) {
  int reached = 0;
  for (int c = 0; c < 81; ++c)
    if (!instance.is_given(c) && grid[c] == instance.solution[c]) ++reached;
  return reached;
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

enum class RrNormalization {
  final_T,   // repeats_t / (T - 1), T = final trajectory length
  current_t  // repeats_t / (t - 1), RR_1 = 0
};

inline std::string_view to_string(RrNormalization n) {
  return n == RrNormalization::final_T ? "final" : "current";
}

inline RrNormalization parse_normalization(std::string_view s) {
  if (s == "final" || s == "final_T") return RrNormalization::final_T;
  if (s == "current" || s == "current_t") return RrNormalization::current_t;
  throw std::invalid_argument("unknown repetition-rate normalization: " + std::string(s));
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// PR_t = reached_t / |M|. A task without milestones is complete by
/// definition (PR = 1).
inline std::vector<double> progress_rate_curve(std::span<const int> progress_raw, int milestone_count) {
  if (milestone_count < 0) throw std::invalid_argument("milestone_count must be >= 0");
  std::vector<double> out;
  out.reserve(progress_raw.size());
  for (int p : progress_raw)
    out.push_back(milestone_count == 0 ? 1.0 : clamp01(static_cast<double>(p) / milestone_count));
  return out;
}

/// Running maximum of a PR curve. Not one of the two standard metrics;
/// offered for Mastermind where the last guess may regress.
inline std::vector<double> best_so_far(std::span<const double> curve) {
  std::vector<double> out(curve.begin(), curve.end());
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::max(out[i], out[i - 1]);
  return out;
}

inline std::vector<double> repetition_rate_from_counts(std::span<const int> repeats, RrNormalization norm) {
  std::vector<double> out;
  out.reserve(repeats.size());
  const auto T = repeats.size();
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t t = i + 1;
    const std::size_t denom = norm == RrNormalization::final_T ? T - 1 : t - 1;
    out.push_back(denom == 0 ? 0.0 : clamp01(static_cast<double>(repeats[i]) / static_cast<double>(denom)));
  }
  return out;
}

inline std::vector<double> repetition_rate_curve(std::span<const std::string> actions, double theta,
                                                 RrNormalization norm = RrNormalization::final_T) {
  const auto repeats = cumulative_repetitions(actions, theta);
  return repetition_rate_from_counts(repeats, norm);
}

/// |M| for a trajectory: code length for Mastermind, initially-empty cells
/// for Sudoku.
inline int milestone_count(const Trajectory& t) {
  if (t.benchmark == Benchmark::mastermind) return static_cast<int>(t.truth_descriptor.size());
  return sudoku::instance_from_string(t.truth_descriptor).empty_count();
}

inline std::vector<double> progress_rate_curve(const Trajectory& t) {
  std::vector<int> raw;
  raw.reserve(t.records.size());
  for (const auto& r : t.records) raw.push_back(r.progress_raw);
  return progress_rate_curve(raw, milestone_count(t));
}

inline std::vector<double> repetition_rate_curve(const Trajectory& t, double theta,
                                                 RrNormalization norm = RrNormalization::final_T) {
  const auto actions = t.actions();
  return repetition_rate_curve(actions, theta, norm);
}

/// Extends a curve to `length` by repeating its last value; a terminated run
/// keeps its settled metrics. An empty curve is padded with `empty_value`.
inline std::vector<double> carry_forward(std::vector<double> curve, std::size_t length, double empty_value = 0.0) {
  const double fill = curve.empty() ? empty_value : curve.back();
  if (curve.size() > length) curve.resize(length);
  curve.resize(length, fill);
  return curve;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct InstanceRow {
  int instance_id = 0;
  bool success = false;
  int steps = 0;
  double pr_final = 0.0;  // at the report step
  double rr_final = 0.0;
  bool aborted = false;
  bool flagged = false;  // any step carried an agent flag
};

struct RunReport {
  Benchmark benchmark = Benchmark::mastermind;
  int instances = 0;
  int max_steps = 0;
  int at_step = 0;  // N in PR_N / RR_N
  double success_rate = 0.0;
  double mean_steps = 0.0;                        // failures count as max_steps
  std::optional<double> mean_steps_to_success;    // over successful runs only
  double pr_at = 0.0;
  double rr_at = 0.0;
  int aborted = 0;
  int successes = 0;
  std::vector<double> mean_pr;  // length max_steps
  std::vector<double> mean_rr;
  std::vector<InstanceRow> rows;
};

struct AggregateOptions {
  double theta = 1.0;
  RrNormalization normalization = RrNormalization::final_T;
  std::optional<int> at_step;  // defaults to max_steps
};

/// Table-style aggregates over runs of one benchmark. Rows and sums are
/// ordered by instance id so the result does not depend on input order.
inline RunReport aggregate(std::span<const Trajectory> trajectories, const AggregateOptions& opts = {}) {
  if (trajectories.empty()) throw std::invalid_argument("aggregate: no trajectories");
  std::vector<const Trajectory*> sorted;
  for (const auto& t : trajectories) {
    if (t.benchmark != trajectories.front().benchmark)
      throw std::invalid_argument("aggregate: trajectories mix benchmarks");
    sorted.push_back(&t);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Trajectory* a, const Trajectory* b) {
    if (a->instance_id != b->instance_id) return a->instance_id < b->instance_id;
    if (a->run_id != b->run_id) return a->run_id < b->run_id;
    return a->seed < b->seed;
  });

  RunReport rep;
  rep.benchmark = trajectories.front().benchmark;
  rep.instances = static_cast<int>(sorted.size());
  for (const auto* t : sorted) rep.max_steps = std::max(rep.max_steps, t->max_steps);
  if (rep.max_steps < 1) throw std::invalid_argument("aggregate: max_steps must be >= 1");
  rep.at_step = opts.at_step.value_or(rep.max_steps);
  if (rep.at_step < 1 || rep.at_step > rep.max_steps)
    throw std::invalid_argument("aggregate: report step must be in [1, max_steps]");

  const auto len = static_cast<std::size_t>(rep.max_steps);
  rep.mean_pr.assign(len, 0.0);
  rep.mean_rr.assign(len, 0.0);
  double steps_sum = 0.0;
  double success_steps_sum = 0.0;
  for (const auto* t : sorted) {
    const int milestones = milestone_count(*t);
    const auto pr = carry_forward(progress_rate_curve(*t), len, milestones == 0 ? 1.0 : 0.0);
    const auto rr = carry_forward(repetition_rate_curve(*t, opts.theta, opts.normalization), len);
    for (std::size_t i = 0; i < len; ++i) {
      rep.mean_pr[i] += pr[i];
      rep.mean_rr[i] += rr[i];
    }
    InstanceRow row;
    row.instance_id = t->instance_id;
    row.success = t->success;
    row.steps = t->steps();
    row.pr_final = pr[rep.at_step - 1];
    row.rr_final = rr[rep.at_step - 1];
    row.aborted = t->aborted();
    for (const auto& r : t->records) row.flagged = row.flagged || r.flags.any();
    rep.rows.push_back(row);

    if (row.aborted) ++rep.aborted;
    if (t->success) {
      ++rep.successes;
      success_steps_sum += row.steps;
      steps_sum += row.steps;
    } else {
      steps_sum += t->max_steps;
    }
  }
  const double n = static_cast<double>(rep.instances);
  for (std::size_t i = 0; i < len; ++i) {
    rep.mean_pr[i] /= n;
    rep.mean_rr[i] /= n;
  }
  rep.success_rate = rep.successes / n;
  rep.mean_steps = steps_sum / n;
  if (rep.successes > 0) rep.mean_steps_to_success = success_steps_sum / rep.successes;
  rep.pr_at = rep.mean_pr[rep.at_step - 1];
  rep.rr_at = rep.mean_rr[rep.at_step - 1];
  return rep;
}

}  // namespace agentquest::metrics
