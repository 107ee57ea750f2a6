#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "agentquest/harness/run.hpp"
#include "agentquest/metrics.hpp"
#include "test_support.hpp"

using namespace agentquest;
using namespace agentquest::metrics;

namespace {

const std::vector<std::string> kPaperActions = {"1234", "2143", "1234", "5618"};

// Builds a Mastermind trajectory by playing `actions` against `truth`.
Trajectory scripted(const std::string& truth, std::vector<std::string> actions, int max_steps, int instance_id = 0) {
  harness::RunConfig cfg;
  cfg.max_steps = max_steps;
  aqtest::ScriptedAgent agent(std::move(actions));
  return harness::run_instance(cfg, instance_id, truth, agent);
}

}  // namespace

TEST(LevenshteinRatio, Examples) {
  EXPECT_EQ(levenshtein_ratio("1234", "1234"), 1.0);
  EXPECT_EQ(aqtest::oracle_ratio(std::string("1234"), std::string("5618")), 0.25);
  EXPECT_EQ(levenshtein_ratio("1234", "5618"), 0.25);
  EXPECT_EQ(aqtest::oracle_ratio(std::string("2143"), std::string("1234")), 0.5);
  EXPECT_EQ(levenshtein_ratio("2143", "1234"), 0.5);
  EXPECT_EQ(levenshtein_ratio("", ""), 1.0);
  EXPECT_EQ(levenshtein_ratio("abc", ""), 0.0);
}

TEST(LevenshteinRatio, MatchesQuadraticOracle) {
  std::mt19937_64 gen(12345);
  for (int i = 0; i < 1000; ++i) {
    std::uniform_int_distribution<int> alpha(1, 10);
    const int k = alpha(gen);
    const auto a = aqtest::random_string(gen, 12, k);
    const auto b = aqtest::random_string(gen, 12, k);
    ASSERT_EQ(levenshtein_ratio(a, b), aqtest::oracle_ratio(a, b)) << a << " / " << b;
    EXPECT_EQ(levenshtein_ratio(a, b), levenshtein_ratio(b, a));
    EXPECT_EQ(levenshtein_ratio(a, b) == 1.0, a == b);
  }
}

TEST(LevenshteinRatio, MultiWordStringsMatchOracle) {
  // exercises carry propagation between 64-bit words
  std::mt19937_64 gen(7);
  for (int i = 0; i < 100; ++i) {
    const auto a = aqtest::random_string(gen, 300, 3);
    const auto b = aqtest::random_string(gen, 300, 3);
    ASSERT_EQ(levenshtein_ratio(a, b), aqtest::oracle_ratio(a, b));
  }
  const std::string run(200, 'a');
  EXPECT_EQ(levenshtein_ratio(run, run + "b"), aqtest::oracle_ratio(run, run + "b"));
}

TEST(LevenshteinRatio, ComparesCodePoints) {
  // é is one code point (two bytes): LCS 4 of 5+5
  EXPECT_DOUBLE_EQ(levenshtein_ratio("h\xc3\xa9llo", "hello"), 0.8);
  const auto a = decode_utf8("h\xc3\xa9llo");
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(levenshtein_ratio("h\xc3\xa9llo", "hello"), aqtest::oracle_ratio(a, decode_utf8("hello")));
  // malformed bytes still compare
  EXPECT_EQ(levenshtein_ratio("\xff\xfe", "\xff\xfe"), 1.0);
}

TEST(Repetitions, PaperExample) {
  EXPECT_EQ(get_repetitions(kPaperActions, 1.0), 1);
  EXPECT_EQ(aqtest::literal_get_repetitions(kPaperActions, 1.0), 1);
}

TEST(Repetitions, LowerResolutionCountsSimilarActions) {
  EXPECT_EQ(aqtest::literal_get_repetitions(kPaperActions, 0.4), 2);
  EXPECT_EQ(get_repetitions(kPaperActions, 0.4), 2);
  const auto flags = repetition_flags(kPaperActions, 0.4);
  EXPECT_EQ(flags, (std::vector<bool>{false, true, true, false}));
}

TEST(Repetitions, DistinctActionsHaveNone) {
  EXPECT_EQ(get_repetitions(std::vector<std::string>{"0000", "1111", "2222"}, 1.0), 0);
  EXPECT_EQ(get_repetitions(std::vector<std::string>{}, 1.0), 0);
  EXPECT_THROW(get_repetitions(kPaperActions, 1.5), std::invalid_argument);
}

TEST(Repetitions, PropertiesOnRandomLists) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> th(0.0, 1.0);
  std::uniform_int_distribution<int> len(0, 25);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> actions;
    for (int n = len(gen); n > 0; --n) actions.push_back(aqtest::random_string(gen, 4, 3));
    const double theta = trial % 3 == 0 ? 1.0 : th(gen);

    EXPECT_EQ(get_repetitions(actions, theta), aqtest::literal_get_repetitions(actions, theta));
    const std::set<std::string> distinct(actions.begin(), actions.end());
    EXPECT_EQ(get_repetitions(actions, 1.0), static_cast<int>(actions.size() - distinct.size()));

    const auto cumulative = cumulative_repetitions(actions, theta);
    RepetitionTracker tracker(theta);
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const std::span<const std::string> prefix(actions.data(), i + 1);
      EXPECT_EQ(cumulative[i], get_repetitions(prefix, theta));
      tracker.add(actions[i]);
      EXPECT_EQ(tracker.count(), cumulative[i]);
      if (i > 0) {
        EXPECT_GE(cumulative[i], cumulative[i - 1]);
      }
      EXPECT_LE(cumulative[i], static_cast<int>(i));
    }
  }
}

TEST(Progress, MastermindExamples) {
  EXPECT_EQ(get_progress_mastermind("2318", "5618"), 2);
  EXPECT_EQ(get_progress_mastermind("5618", "5618"), 4);
  EXPECT_EQ(get_progress_mastermind("1234", "5618"), 0);
  EXPECT_EQ(get_progress_mastermind("", "5618"), 0);
  EXPECT_THROW(get_progress_mastermind("123", "5618"), ContractViolation);
  EXPECT_EQ(get_progress_mastermind("2318", "5618") / 4.0, 0.5);
}

TEST(Progress, SudokuCountsCorrectInsertions) {
  const auto inst = sudoku::generate(8, 30);
  sudoku::Driver d(inst);
  d.reset();
  EXPECT_EQ(get_progress_sudoku(std::get<SudokuGrid>(d.state()), inst), 0);

  int hole = 0;
  while (inst.is_given(hole)) ++hole;
  const int right = inst.solution[hole];
  const int wrong = right % 9 + 1;
  const auto where = std::to_string(hole / 9 + 1) + " " + std::to_string(hole % 9 + 1) + " ";
  d.step({where + std::to_string(right)});
  const int after_right = get_progress_sudoku(std::get<SudokuGrid>(d.state()), inst);
  d.step({where + std::to_string(wrong)});
  const int after_wrong = get_progress_sudoku(std::get<SudokuGrid>(d.state()), inst);
  EXPECT_EQ(after_right, 1);
  EXPECT_EQ(after_wrong, after_right - 1);
}

TEST(Curves, ProgressRate) {
  EXPECT_EQ(progress_rate_curve(std::vector<int>{0, 1, 2, 4}, 4), (std::vector<double>{0, 0.25, 0.5, 1.0}));
  EXPECT_EQ(progress_rate_curve(std::vector<int>{8}, 40), (std::vector<double>{0.2}));
  EXPECT_EQ(progress_rate_curve(std::vector<int>{0, 0}, 0), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(best_so_far(std::vector<double>{0.5, 0.25, 0.75}), (std::vector<double>{0.5, 0.5, 0.75}));
}

TEST(Curves, RepetitionRatePaperExample) {
  const auto rr = repetition_rate_curve(kPaperActions, 1.0, RrNormalization::final_T);
  ASSERT_EQ(rr.size(), 4u);
  EXPECT_NEAR(rr.back(), 0.33, 0.005);
  EXPECT_EQ(rr, (std::vector<double>{0, 0, 1.0 / 3, 1.0 / 3}));
}

TEST(Curves, RepetitionRateCurrentNormalization) {
  EXPECT_EQ(repetition_rate_curve(kPaperActions, 1.0, RrNormalization::current_t),
            (std::vector<double>{0, 0, 0.5, 1.0 / 3}));
}

TEST(Curves, DegenerateLengths) {
  EXPECT_EQ(repetition_rate_curve(std::vector<std::string>{"1234"}, 1.0), (std::vector<double>{0.0}));
  const std::vector<std::string> distinct = {"a", "b", "c"};
  for (auto norm : {RrNormalization::final_T, RrNormalization::current_t})
    EXPECT_EQ(repetition_rate_curve(distinct, 1.0, norm), (std::vector<double>{0, 0, 0}));
}

TEST(Curves, SingleMilestoneCoincidesWithSuccess) {
  // |M| = 1 with "full code matched" as the only milestone
  const auto t = scripted("5618", {"1234", "5611", "5618"}, 10);
  std::vector<int> single;
  for (const auto& r : t.records) single.push_back(r.progress_raw == 4 ? 1 : 0);
  const auto pr = progress_rate_curve(single, 1);
  for (std::size_t i = 0; i < pr.size(); ++i) EXPECT_EQ(pr[i], t.records[i].done ? 1.0 : 0.0);
}

TEST(Aggregate, SuccessRate) {
  std::vector<Trajectory> runs;
  for (int i = 0; i < 5; ++i) runs.push_back(scripted("5618", {i == 2 ? "5618" : "0000"}, 3, i));
  const auto rep = aggregate(runs);
  EXPECT_EQ(rep.success_rate, 0.2);
  EXPECT_EQ(rep.successes, 1);
  EXPECT_EQ(rep.mean_steps, (1 + 4 * 3) / 5.0);
  EXPECT_EQ(rep.mean_steps_to_success, 1.0);
}

TEST(Aggregate, SolvedAtLastStep) {
  const std::vector<Trajectory> runs = {scripted("5618", {"1234", "2143", "5618"}, 3)};
  const auto rep = aggregate(runs);
  EXPECT_EQ(rep.pr_at, 1.0);
  EXPECT_EQ(rep.success_rate, 1.0);
}

TEST(Aggregate, HandComputedThreeRuns) {
  // A: solved at 2; B: fails with repeats; C: solved at 2 from 3/4
  const std::vector<Trajectory> runs = {scripted("5618", {"1234", "5618"}, 4, 0),
                                        scripted("5618", {"1234", "1234", "2318", "2318"}, 4, 1),
                                        scripted("5618", {"5611", "5618"}, 4, 2)};
  const auto rep = aggregate(runs);
  EXPECT_DOUBLE_EQ(rep.success_rate, 2.0 / 3);
  EXPECT_DOUBLE_EQ(rep.mean_steps, 8.0 / 3);
  EXPECT_DOUBLE_EQ(*rep.mean_steps_to_success, 2.0);
  const std::vector<double> pr = {0.25, 2.0 / 3, 5.0 / 6, 5.0 / 6};
  const std::vector<double> rr = {0.0, 1.0 / 9, 1.0 / 9, 2.0 / 9};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(rep.mean_pr[i], pr[i], 1e-12);
    EXPECT_NEAR(rep.mean_rr[i], rr[i], 1e-12);
  }
  EXPECT_NEAR(rep.pr_at, 5.0 / 6, 1e-12);
  EXPECT_NEAR(rep.rr_at, 2.0 / 9, 1e-12);

  const auto at2 = aggregate(runs, {1.0, RrNormalization::final_T, 2});
  EXPECT_NEAR(at2.pr_at, 2.0 / 3, 1e-12);
  EXPECT_THROW(aggregate(runs, {1.0, RrNormalization::final_T, 5}), std::invalid_argument);
}

TEST(Aggregate, PermutationInvariant) {
  std::vector<Trajectory> runs;
  std::mt19937_64 gen(3);
  for (int i = 0; i < 8; ++i) {
    std::vector<std::string> acts;
    for (int k = 0; k < 6; ++k) acts.push_back(aqtest::random_string(gen, 4, 2));
    std::uniform_int_distribution<int> d(0, 9);
    for (auto& a : acts)
      for (auto& c : a) c = static_cast<char>('0' + d(gen));
    runs.push_back(scripted("5618", acts, 6, i));
  }
  const auto base = aggregate(runs);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(runs.begin(), runs.end(), gen);
    const auto again = aggregate(runs);
    EXPECT_EQ(again.mean_pr, base.mean_pr);
    EXPECT_EQ(again.mean_rr, base.mean_rr);
    EXPECT_EQ(again.success_rate, base.success_rate);
  }
}

TEST(Aggregate, RejectsMixedBenchmarks) {
  std::vector<Trajectory> runs = {scripted("5618", {"5618"}, 2)};
  Trajectory s;
  s.benchmark = Benchmark::sudoku;
  s.max_steps = 2;
  runs.push_back(s);
  EXPECT_THROW(aggregate(runs), std::invalid_argument);
  EXPECT_THROW(aggregate(std::vector<Trajectory>{}), std::invalid_argument);
}
