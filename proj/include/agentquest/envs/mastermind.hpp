#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "agentquest/core.hpp"
#include "agentquest/random.hpp"

namespace agentquest::mastermind {

inline constexpr std::string_view kVersion = "mastermind/1";

struct Config {
  int code_length = 4;
  std::string alphabet = "0123456789";
  bool allow_repeats = true;

  void validate() const {
    if (code_length < 1) throw std::invalid_argument("code_length must be >= 1");
    if (alphabet.empty()) throw std::invalid_argument("alphabet must not be empty");
    for (char c : alphabet)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw std::invalid_argument("alphabet must consist of digits");
    if (!allow_repeats && static_cast<int>(alphabet.size()) < code_length)
      throw std::invalid_argument("alphabet too small for a repeat-free code");
  }
};

struct Feedback {
  int exact = 0;      // right digit, right position
  int misplaced = 0;  // right digit, wrong position

  friend bool operator==(const Feedback&, const Feedback&) = default;
};

/// Standard multiset scoring.
inline Feedback feedback(std::string_view guess, std::string_view truth) {
  if (guess.size() != truth.size())
    throw ContractViolation("mastermind feedback: guess and truth differ in length");
  std::array<int, 256> guess_counts{};
  std::array<int, 256> truth_counts{};
  Feedback fb;
  for (std::size_t i = 0; i < guess.size(); ++i) {
    if (guess[i] == truth[i]) ++fb.exact;
    ++guess_counts[static_cast<unsigned char>(guess[i])];
    ++truth_counts[static_cast<unsigned char>(truth[i])];
  }
  int common = 0;
  for (std::size_t d = 0; d < 256; ++d) common += std::min(guess_counts[d], truth_counts[d]);
  fb.misplaced = common - fb.exact;
  return fb;
}

/// First maximal run of digits whose length is exactly `code_length`.
inline std::optional<std::string> parse_guess(std::string_view text, int code_length) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j - i == static_cast<std::size_t>(code_length)) return std::string(text.substr(i, j - i));
    i = j;
  }
  return std::nullopt;
}

inline std::string start_message(int code_length) {
  return "Start guessing the " + std::to_string(code_length) + " digits code.";
}

inline std::string feedback_message(const Feedback& fb) {
  return "Your guess has " + std::to_string(fb.misplaced) +
         " correct numbers in the wrong position and " + std::to_string(fb.exact) +
         " correct numbers in the correct position. Keep guessing...";
}

inline std::string corrective_message(int code_length) {
  return "Provide a " + std::to_string(code_length) + " digit code.";
}

inline std::string success_message(std::string_view code) {
  return "You guessed the code " + std::string(code) + ". Well done!";
}

/// Inverse of feedback_message(); used by agents that read the text channel.
inline std::optional<Feedback> parse_feedback(std::string_view text) {
  constexpr std::string_view head = "Your guess has ";
  constexpr std::string_view mid = " correct numbers in the wrong position and ";
  constexpr std::string_view tail = " correct numbers in the correct position.";
  auto read_int = [](std::string_view s, std::size_t& pos) -> std::optional<int> {
    std::size_t start = pos;
    int v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) v = v * 10 + (s[pos++] - '0');
    if (pos == start) return std::nullopt;
    return v;
  };
  std::size_t pos = text.find(head);
  if (pos == std::string_view::npos) return std::nullopt;
  pos += head.size();
  auto misplaced = read_int(text, pos);
  if (!misplaced || text.substr(pos, mid.size()) != mid) return std::nullopt;
  pos += mid.size();
  auto exact = read_int(text, pos);
  if (!exact || text.substr(pos, tail.size()) != tail) return std::nullopt;
  return Feedback{*exact, *misplaced};
}

/// Uniform code over the alphabet, optionally without repeated digits.
inline std::string random_code(const Config& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::string pool = config.alphabet;
  std::string code;
  for (int i = 0; i < config.code_length; ++i) {
    const auto k = rng.below(pool.size());
    code.push_back(pool[k]);
    if (!config.allow_repeats) pool.erase(k, 1);
  }
  return code;
}

class Driver final : public agentquest::Driver {
 public:
  Driver(std::string truth) : truth_(std::move(truth)) {
    if (truth_.empty()) throw std::invalid_argument("mastermind truth must not be empty");
    for (char c : truth_)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw std::invalid_argument("mastermind truth must be a digit string");
  }

  Driver(const Config& config, std::uint64_t seed) : Driver(random_code(config, seed)) {}

  EnvState state() const override { return last_guess_; }
  std::string_view version() const override { return kVersion; }

  const std::string& truth() const { return truth_; }
  int code_length() const { return static_cast<int>(truth_.size()); }

 protected:
  Observation do_reset() override {
    last_guess_.clear();
    return {start_message(code_length()), false};
  }

  Observation do_step(const Action& action) override {
    auto guess = parse_guess(action.action_value, code_length());
    if (!guess) return {corrective_message(code_length()), false};
    last_guess_ = *guess;
    const Feedback fb = feedback(*guess, truth_);
    if (fb.exact == code_length()) return {success_message(truth_), true};
    return {feedback_message(fb), false};
  }

 private:
  std::string truth_;
  std::string last_guess_;
};

}  // namespace agentquest::mastermind
