#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "agentquest/core.hpp"
#include "agentquest/envs/mastermind.hpp"
#include "agentquest/envs/sudoku.hpp"
#include "agentquest/random.hpp"

namespace agentquest {

/// One turn of the conversation: what the agent was shown and what it replied.
struct Exchange {
  std::string observation;
  std::string action;
};

/// Maps the latest observation (plus every earlier exchange) to action text.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string next_action(std::string_view observation, std::span<const Exchange> history) = 0;
  /// Flags raised while producing the most recent action.
  virtual StepFlags last_flags() const { return {}; }
};

/// Uniformly random code over the alphabet, repeats allowed.
class RandomMastermindAgent final : public Agent {
 public:
  RandomMastermindAgent(int code_length, std::string alphabet, std::uint64_t seed)
      : code_length_(code_length), alphabet_(std::move(alphabet)), rng_(seed) {
    if (code_length_ < 1 || alphabet_.empty()) throw std::invalid_argument("random agent: empty code space");
  }

  std::string next_action(std::string_view, std::span<const Exchange>) override {
    std::string code;
    for (int i = 0; i < code_length_; ++i) code.push_back(alphabet_[rng_.below(alphabet_.size())]);
    return code;
  }

 private:
  int code_length_;
  std::string alphabet_;
  Rng rng_;
};

/// Uniformly random "row col value" placement.
class RandomSudokuAgent final : public Agent {
 public:
  explicit RandomSudokuAgent(std::uint64_t seed) : rng_(seed) {}

  std::string next_action(std::string_view, std::span<const Exchange>) override {
    const auto r = rng_.below(9) + 1;
    const auto c = rng_.below(9) + 1;
    const auto v = rng_.below(9) + 1;
    return std::to_string(r) + " " + std::to_string(c) + " " + std::to_string(v);
  }

 private:
  Rng rng_;
};

/// Keeps every code consistent with the feedback read from the observation
/// text and always plays the lexicographically smallest one.
///
/// Each non-winning guess is eliminated by its own feedback, so the
/// candidate set shrinks every turn and the agent never repeats itself.
class ConsistentMastermindAgent final : public Agent {
 public:
  static constexpr std::string_view kNoCandidate = "NO CONSISTENT CODE";

  ConsistentMastermindAgent(int code_length, std::string alphabet) : code_length_(code_length) {
    std::sort(alphabet.begin(), alphabet.end());
    alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
    if (code_length < 1 || alphabet.empty()) throw std::invalid_argument("consistent agent: empty code space");
    std::string code(static_cast<std::size_t>(code_length), alphabet.front());
    std::vector<std::size_t> digits(static_cast<std::size_t>(code_length), 0);
    // odometer over the alphabet, rightmost digit fastest -> lexicographic order
    while (true) {
      candidates_.push_back(code);
      int pos = code_length - 1;
      while (pos >= 0 && digits[pos] + 1 == alphabet.size()) {
        digits[pos] = 0;
        code[pos] = alphabet.front();
        --pos;
      }
      if (pos < 0) break;
      code[pos] = alphabet[++digits[pos]];
    }
  }

  std::string next_action(std::string_view observation, std::span<const Exchange> history) override {
    flags_ = {};
    for (; processed_ < history.size(); ++processed_) {
      const std::string_view after =
          processed_ + 1 < history.size() ? std::string_view(history[processed_ + 1].observation) : observation;
      absorb(history[processed_].action, after);
    }
    if (candidates_.empty()) {
      flags_.agent_failure = true;
      return std::string(kNoCandidate);
    }
    return candidates_.front();
  }

  StepFlags last_flags() const override { return flags_; }
  const std::vector<std::string>& candidates() const { return candidates_; }

 private:
  void absorb(std::string_view action, std::string_view observation) {
    const auto guess = mastermind::parse_guess(action, code_length_);
    const auto fb = mastermind::parse_feedback(observation);
    if (!guess || !fb) return;
    std::erase_if(candidates_, [&](const std::string& c) { return mastermind::feedback(*guess, c) != *fb; });
  }

  int code_length_;
  std::vector<std::string> candidates_;
  std::size_t processed_ = 0;
  StepFlags flags_;
};

/// White-box agent that plays the known solution, initially-empty cells in
/// row-major order.
class SudokuOracleAgent final : public Agent {
 public:
  explicit SudokuOracleAgent(const sudoku::Instance& instance) {
    for (int c = 0; c < 81; ++c)
      if (!instance.is_given(c))
        moves_.push_back(std::to_string(c / 9 + 1) + " " + std::to_string(c % 9 + 1) + " " +
                         std::to_string(instance.solution[c]));
  }

  std::string next_action(std::string_view, std::span<const Exchange> history) override {
    if (moves_.empty()) return "1 1 1";  // nothing to fill; any action completes the check
    return moves_[std::min(history.size(), moves_.size() - 1)];
  }

 private:
  std::vector<std::string> moves_;
};

/// Re-emits its previous action, delegating to `inner` only on every
/// `period`-th call (starting with the first).
class StutterAgent final : public Agent {
 public:
  StutterAgent(std::unique_ptr<Agent> inner, int period) : inner_(std::move(inner)), period_(period) {
    if (period_ < 2) throw std::invalid_argument("stutter period must be >= 2");
  }

  std::string next_action(std::string_view observation, std::span<const Exchange> history) override {
    flags_ = {};
    if (calls_++ % period_ == 0) {
      last_ = inner_->next_action(observation, history);
      flags_ = inner_->last_flags();
    }
    return last_;
  }

  StepFlags last_flags() const override { return flags_; }

 private:
  std::unique_ptr<Agent> inner_;
  long long period_;
  long long calls_ = 0;
  std::string last_;
  StepFlags flags_;
};

inline std::string dedup_reprompt(std::string_view observation, std::string_view repeated) {
  return std::string(observation) + "\nYou already tried \"" + std::string(repeated) +
         "\". Provide a new action that you have not tried before.";
}

/// Memory wrapper: buffers every emitted action and re-prompts the inner
/// agent when it proposes an exact duplicate, at most `retry_budget` times.
class MemoryDedupAgent final : public Agent {
 public:
  MemoryDedupAgent(std::unique_ptr<Agent> inner, int retry_budget = 5)
      : inner_(std::move(inner)), retry_budget_(retry_budget) {
    if (retry_budget_ < 1) throw std::invalid_argument("retry_budget must be >= 1");
  }

  std::string next_action(std::string_view observation, std::span<const Exchange> history) override {
    flags_ = {};
    std::string proposal = inner_->next_action(observation, history);
    merge(inner_->last_flags());
    for (int attempt = 0; attempt < retry_budget_ && seen_.contains(proposal) && !flags_.aborted; ++attempt) {
      ++reprompts_;
      proposal = inner_->next_action(dedup_reprompt(observation, proposal), history);
      merge(inner_->last_flags());
    }
    if (seen_.contains(proposal)) flags_.repeated_forced = true;
    else seen_.insert(proposal);
    buffer_.push_back(proposal);
    return proposal;
  }

  StepFlags last_flags() const override { return flags_; }
  const std::vector<std::string>& buffer() const { return buffer_; }
  int reprompts() const { return reprompts_; }

 private:
  void merge(const StepFlags& f) {
    flags_.aborted = flags_.aborted || f.aborted;
    flags_.agent_failure = flags_.agent_failure || f.agent_failure;
    flags_.repeated_forced = flags_.repeated_forced || f.repeated_forced;
  }

  std::unique_ptr<Agent> inner_;
  int retry_budget_;
  std::vector<std::string> buffer_;
  std::unordered_set<std::string> seen_;
  int reprompts_ = 0;
  StepFlags flags_;
};

}  // namespace agentquest
