#pragma once

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentquest/core.hpp"
#include "agentquest/random.hpp"

namespace agentquest::sudoku {

inline constexpr std::string_view kVersion = "sudoku/1";

using Grid = SudokuGrid;

inline constexpr int row_of(int cell) { return cell / 9; }
inline constexpr int col_of(int cell) { return cell % 9; }
inline constexpr int box_of(int cell) { return (cell / 27) * 3 + (cell % 9) / 3; }

inline int count_empty(const Grid& g) {
  int n = 0;
  for (auto v : g) n += (v == 0);
  return n;
}

/// Each row, column and box holds 1..9 exactly once.
inline bool is_complete_and_valid(const Grid& g) {
  std::array<std::uint16_t, 9> rows{}, cols{}, boxes{};
  for (int c = 0; c < 81; ++c) {
    if (g[c] < 1 || g[c] > 9) return false;
    const std::uint16_t bit = 1u << g[c];
    if ((rows[row_of(c)] | cols[col_of(c)] | boxes[box_of(c)]) & bit) return false;
    rows[row_of(c)] |= bit;
    cols[col_of(c)] |= bit;
    boxes[box_of(c)] |= bit;
  }
  return true;
}

namespace detail {

// Bitmask search state; candidate bits 1..9.
struct Search {
  std::array<std::uint16_t, 9> rows{}, cols{}, boxes{};
  Grid grid{};

  // false when the filled cells already conflict
  bool load(const Grid& g) {
    grid = g;
    for (int c = 0; c < 81; ++c) {
      if (g[c] == 0) continue;
      if (g[c] > 9) return false;
      const std::uint16_t bit = 1u << g[c];
      if ((rows[row_of(c)] | cols[col_of(c)] | boxes[box_of(c)]) & bit) return false;
      place(c, g[c]);
    }
    return true;
  }
  std::uint16_t candidates(int c) const {
    return static_cast<std::uint16_t>(~(rows[row_of(c)] | cols[col_of(c)] | boxes[box_of(c)]) & 0x3FE);
  }
  void place(int c, int v) {
    const std::uint16_t bit = 1u << v;
    grid[c] = static_cast<std::uint8_t>(v);
    rows[row_of(c)] |= bit;
    cols[col_of(c)] |= bit;
    boxes[box_of(c)] |= bit;
  }
  void clear(int c) {
    const std::uint16_t bit = ~(1u << grid[c]);
    rows[row_of(c)] &= bit;
    cols[col_of(c)] &= bit;
    boxes[box_of(c)] &= bit;
    grid[c] = 0;
  }
  // Most-constrained empty cell, -1 when full.
  int pick(std::uint16_t& cand) const {
    int best = -1;
    int best_count = 10;
    for (int c = 0; c < 81; ++c) {
      if (grid[c] != 0) continue;
      const std::uint16_t m = candidates(c);
      const int n = std::popcount(m);
      if (n < best_count) {
        best = c;
        best_count = n;
        cand = m;
        if (n <= 1) break;
      }
    }
    return best;
  }

  void count(int cap, int& found) {
    std::uint16_t cand = 0;
    const int c = pick(cand);
    if (c < 0) {
      ++found;
      return;
    }
    for (int v = 1; v <= 9 && found < cap; ++v) {
      if (!(cand & (1u << v))) continue;
      place(c, v);
      count(cap, found);
      clear(c);
    }
  }

  bool fill_random(Rng& rng) {
    std::uint16_t cand = 0;
    const int c = pick(cand);
    if (c < 0) return true;
    std::array<int, 9> order;
    std::iota(order.begin(), order.end(), 1);
    rng.shuffle(std::span<int>(order));
    for (int v : order) {
      if (!(cand & (1u << v))) continue;
      place(c, v);
      if (fill_random(rng)) return true;
      clear(c);
    }
    return false;
  }
};

}  // namespace detail

/// Number of completions of `grid`, stopping once `cap` is reached.
inline int count_solutions(const Grid& grid, int cap) {
  if (cap <= 0) return 0;
  detail::Search s;
  if (!s.load(grid)) return 0;
  int found = 0;
  s.count(cap, found);
  return found;
}

/// First completion found, if any.
inline std::optional<Grid> solve(const Grid& grid) {
  detail::Search s;
  if (!s.load(grid)) return std::nullopt;
  struct Local {
    static bool go(detail::Search& s) {
      std::uint16_t cand = 0;
      const int c = s.pick(cand);
      if (c < 0) return true;
      for (int v = 1; v <= 9; ++v) {
        if (!(cand & (1u << v))) continue;
        s.place(c, v);
        if (go(s)) return true;
        s.clear(c);
      }
      return false;
    }
  };
  if (!Local::go(s)) return std::nullopt;
  return s.grid;
}

struct Instance {
  Grid givens{};
  Grid solution{};

  int empty_count() const { return count_empty(givens); }
  bool is_given(int cell) const { return givens[cell] != 0; }
};

inline std::string to_string(const Grid& g) {
  std::string s(81, '.');
  for (int c = 0; c < 81; ++c)
    if (g[c] != 0) s[c] = static_cast<char>('0' + g[c]);
  return s;
}

/// Accepts 81 characters, '.' or '0' for empty.
inline Grid grid_from_string(std::string_view s) {
  if (s.size() != 81) throw std::invalid_argument("sudoku grid string must have 81 characters");
  Grid g{};
  for (int c = 0; c < 81; ++c) {
    const char ch = s[c];
    if (ch == '.' || ch == '0') continue;
    if (ch < '1' || ch > '9') throw std::invalid_argument("invalid sudoku cell character");
    g[c] = static_cast<std::uint8_t>(ch - '0');
  }
  return g;
}

/// "<givens> <solution>" as stored in fixture files and trajectory headers.
inline std::string describe(const Instance& inst) {
  return to_string(inst.givens) + " " + to_string(inst.solution);
}

inline Instance instance_from_string(std::string_view s) {
  const auto sep = s.find_first_of(" \t");
  if (sep == std::string_view::npos) throw std::invalid_argument("expected \"<givens> <solution>\"");
  auto rest = s.substr(sep);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);
  Instance inst{grid_from_string(s.substr(0, sep)), grid_from_string(rest)};
  if (!is_complete_and_valid(inst.solution)) throw std::invalid_argument("sudoku solution is not a valid grid");
  for (int c = 0; c < 81; ++c)
    if (inst.givens[c] != 0 && inst.givens[c] != inst.solution[c])
      throw std::invalid_argument("sudoku givens disagree with solution");
  return inst;
}

/// Full random grid, then seeded single-cell removals that keep the solution
/// unique, until `target_empty` cells are empty or every cell has been tried.
inline Instance generate(std::uint64_t seed, int target_empty) {
  if (target_empty < 0 || target_empty > 64) throw std::invalid_argument("target_empty must be in [0, 64]");
  Rng rng(seed);
  detail::Search s;
  s.fill_random(rng);
  Instance inst{s.grid, s.grid};

  std::array<int, 81> order;
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  int removed = 0;
  for (int cell : order) {
    if (removed >= target_empty) break;
    const auto keep = inst.givens[cell];
    inst.givens[cell] = 0;
    if (count_solutions(inst.givens, 2) == 1) {
      ++removed;
    } else {
      inst.givens[cell] = keep;
    }
  }
  return inst;
}

struct Placement {
  int row = 0;  // 1..9
  int col = 0;
  int value = 0;
};

/// First three integers in the text, each required to lie in 1..9.
inline std::optional<Placement> parse_placement(std::string_view text) {
  std::array<long, 3> nums{};
  int found = 0;
  for (std::size_t i = 0; i < text.size() && found < 3;) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const bool negative = i > 0 && text[i - 1] == '-';
    long v = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      if (v < 1000) v = v * 10 + (text[i] - '0');
      ++i;
    }
    nums[found++] = negative ? -v : v;
  }
  if (found < 3) return std::nullopt;
  for (long v : nums)
    if (v < 1 || v > 9) return std::nullopt;
  return Placement{static_cast<int>(nums[0]), static_cast<int>(nums[1]), static_cast<int>(nums[2])};
}

inline std::string render(const Grid& g) {
  std::string out = "    1 2 3   4 5 6   7 8 9\n";
  const std::string rule = "  +-------+-------+-------+\n";
  for (int r = 0; r < 9; ++r) {
    if (r % 3 == 0) out += rule;
    out += std::to_string(r + 1) + " |";
    for (int c = 0; c < 9; ++c) {
      const auto v = g[r * 9 + c];
      out += ' ';
      out += v ? static_cast<char>('0' + v) : '.';
      if (c % 3 == 2) out += " |";
    }
    out += '\n';
  }
  out += rule;
  return out;
}

inline constexpr std::string_view kFormatHint =
    "Reply with \"row col value\": three integers between 1 and 9 (row and column are 1-indexed).";

class Driver final : public agentquest::Driver {
 public:
  explicit Driver(Instance instance) : instance_(instance), grid_(instance.givens) {}

  EnvState state() const override { return grid_; }
  std::string_view version() const override { return kVersion; }

  const Instance& instance() const { return instance_; }

 protected:
  Observation do_reset() override {
    grid_ = instance_.givens;
    return {"Solve the Sudoku: fill every empty cell so that each row, column and 3x3 box contains "
            "the digits 1-9 exactly once. " +
                std::string(kFormatHint) + "\n" + board_summary(),
            false};
  }

  Observation do_step(const Action& action) override {
    std::string head;
    if (auto p = parse_placement(action.action_value)) {
      const int cell = (p->row - 1) * 9 + (p->col - 1);
      if (instance_.is_given(cell)) {
        head = "Invalid move: cell (" + std::to_string(p->row) + "," + std::to_string(p->col) +
               ") is a fixed clue.";
      } else {
        grid_[cell] = static_cast<std::uint8_t>(p->value);
        head = "Placed " + std::to_string(p->value) + " at (" + std::to_string(p->row) + "," +
               std::to_string(p->col) + ").";
      }
    } else {
      head = "Invalid action. " + std::string(kFormatHint);
    }

    if (count_empty(grid_) == 0) {
      if (is_complete_and_valid(grid_)) return {head + "\nSudoku solved!\n" + render(grid_), true};
      return {head + "\nThe grid is complete but invalid: some row, column or box repeats a digit.\n" +
                  render(grid_),
              false};
    }
    return {head + "\n" + board_summary(), false};
  }

 private:
  std::string board_summary() const {
    return render(grid_) + std::to_string(count_empty(grid_)) + " empty cells remaining.";
  }

  Instance instance_;
  Grid grid_;
};

}  // namespace agentquest::sudoku
