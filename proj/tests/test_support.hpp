#pragma once

// Test-only reference implementations. They are deliberately naive and must
// not call into the library code they are used to check.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agentquest/agents.hpp"

namespace aqtest {

/// Mastermind scoring by marking: exact positions first, then pair each
/// remaining guess digit with the first unmarked equal truth digit.
inline std::pair<int, int> naive_feedback(std::string_view guess, std::string_view truth) {
  std::vector<bool> g_used(guess.size()), t_used(truth.size());
  int exact = 0, misplaced = 0;
  for (std::size_t i = 0; i < guess.size(); ++i)
    if (guess[i] == truth[i]) {
      ++exact;
      g_used[i] = t_used[i] = true;
    }
  for (std::size_t i = 0; i < guess.size(); ++i) {
    if (g_used[i]) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (!t_used[j] && truth[j] == guess[i]) {
        t_used[j] = true;
        ++misplaced;
        break;
      }
    }
  }
  return {exact, misplaced};
}

/// Full quadratic edit-distance table with insert/delete 1, substitute 2,
/// over bytes (tests only feed ASCII or pre-decoded code points).
template <typename Str>
inline std::size_t weighted_edit_distance(const Str& a, const Str& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 2)});
  return d[a.size()][b.size()];
}

template <typename Str>
inline double oracle_ratio(const Str& a, const Str& b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return static_cast<double>(total - weighted_edit_distance(a, b)) / static_cast<double>(total);
}

/// Literal transcription of the reference get_repetitions loop: a set of
/// unique actions, each candidate compared against every earlier action.
inline int literal_get_repetitions(const std::vector<std::string>& actions, double theta) {
  std::set<std::string> unique_act;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    bool all_below = true;
    for (std::size_t x = 0; x < i; ++x)
      if (!(oracle_ratio(actions[i], actions[x]) < theta)) all_below = false;
    if (all_below) unique_act.insert(actions[i]);
  }
  return static_cast<int>(actions.size() - unique_act.size());
}

inline bool brute_valid_sudoku(const std::array<std::uint8_t, 81>& g) {
  for (int unit = 0; unit < 9; ++unit) {
    std::set<int> row, col, box;
    for (int k = 0; k < 9; ++k) {
      row.insert(g[unit * 9 + k]);
      col.insert(g[k * 9 + unit]);
      box.insert(g[(unit / 3 * 3 + k / 3) * 9 + unit % 3 * 3 + k % 3]);
    }
    for (const auto* s : {&row, &col, &box})
      if (s->size() != 9 || s->count(0) || *s->rbegin() > 9) return false;
  }
  return true;
}

inline std::string random_string(std::mt19937_64& gen, int max_len, int alphabet) {
  std::uniform_int_distribution<int> len(0, max_len), ch(0, alphabet - 1);
  std::string s(static_cast<std::size_t>(len(gen)), 'a');
  for (auto& c : s) c = static_cast<char>('a' + ch(gen));
  return s;
}

/// Plays a fixed list of actions, then repeats the last one.
class ScriptedAgent final : public agentquest::Agent {
 public:
  explicit ScriptedAgent(std::vector<std::string> script) : script_(std::move(script)) {}
  std::string next_action(std::string_view observation, std::span<const agentquest::Exchange>) override {
    seen_.emplace_back(observation);
    if (script_.empty()) return "";
    const auto i = std::min(calls_++, script_.size() - 1);
    return script_[i];
  }
  const std::vector<std::string>& seen() const { return seen_; }

 private:
  std::vector<std::string> script_;
  std::size_t calls_ = 0;
  std::vector<std::string> seen_;
};

/// Emits "a0", "a1", ... - never repeats.
class CounterAgent final : public agentquest::Agent {
 public:
  std::string next_action(std::string_view, std::span<const agentquest::Exchange>) override {
    return "a" + std::to_string(n_++);
  }

 private:
  int n_ = 0;
};

}  // namespace aqtest
