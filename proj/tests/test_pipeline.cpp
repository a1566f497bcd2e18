#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "wrcal/annotation_io.hpp"
#include "wrcal/errors.hpp"
#include "wrcal/pipeline.hpp"

using namespace wrcal;

namespace {

constexpr auto A = PreferenceLabel::kA;
constexpr auto B = PreferenceLabel::kB;

std::string record(const std::string& task, const std::string& evaluator, int label,
                   const std::string& human = "") {
  std::string out = R"({"task_id":")" + task + R"(","generator_a":"g0","generator_b":"g1",)" +
                    R"("evaluator_id":")" + evaluator + R"(","eval_label":)" +
                    std::to_string(label);
  if (!human.empty()) out += R"(,"human_label":)" + human;
  return out + "}\n";
}

std::vector<PreferenceInstance> instances(std::size_t n) {
  std::vector<PreferenceInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"i" + std::to_string(i), "out" + std::to_string(i), "alt" + std::to_string(i),
                   {{"judge", i % 4 != 0}}});
  }
  return out;
}

std::vector<LikertRecord> likert(const std::string& task, std::vector<double> a,
                                 std::vector<double> b) {
  std::vector<LikertRecord> out;
  for (double s : a) out.push_back({task, Side::kA, "h" + std::to_string(out.size()), s});
  for (double s : b) out.push_back({task, Side::kB, "h" + std::to_string(out.size()), s});
  return out;
}

}  // namespace

TEST(LoadAnnotations, AssemblesMatrix) {
  std::istringstream in(record("t1", "e1", 0, "0") + record("t1", "e2", 1, "0") +
                        "\n" + record("t2", "e1", 1) + record("t2", "e2", 1));
  const auto m = load_annotations(in);
  EXPECT_EQ(m.num_tasks(), 2u);
  EXPECT_EQ(m.num_evaluators(), 2u);
  EXPECT_EQ(m.generator_a, "g0");
  EXPECT_EQ(m.tasks[0].human_label, A);
  EXPECT_FALSE(m.tasks[1].human_label.has_value());
  EXPECT_EQ(m.tasks[0].eval_labels, (std::vector<PreferenceLabel>{A, B}));
}

TEST(LoadAnnotations, IgnoresUnknownFieldsAndNullHuman) {
  std::istringstream in(
      R"({"task_id":"t","generator_a":"x","generator_b":"y","evaluator_id":"e","eval_label":1,"human_label":null,"note":"hi"})"
      "\n");
  const auto m = load_annotations(in);
  EXPECT_FALSE(m.tasks[0].human_label.has_value());
}

TEST(LoadAnnotations, Errors) {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(load_annotations(in), DataError) << text;
  };
  fails(record("t1", "e1", 0) + record("t1", "e1", 1));                       // duplicate
  fails(record("t1", "e1", 0) + record("t1", "e2", 0) + record("t2", "e1", 0));  // incomplete
  fails(record("t1", "e1", 2));                                                // bad label
  fails(record("t1", "e1", 0, "3"));                                           // bad human
  fails(record("t1", "e1", 0, "0") + record("t1", "e2", 0, "1"));              // conflict
  fails(R"({"task_id":"t","generator_a":"x","generator_b":"y","evaluator_id":"e","eval_label":"0"})"
        "\n");
  fails(R"({"task_id":"t","generator_a":"x","generator_b":"y","evaluator_id":"e"})"
        "\n");
  fails("not json\n");
  fails("[1,2]\n");
  fails("");
  fails(record("t1", "e1", 0) +
        R"({"task_id":"t2","generator_a":"g0","generator_b":"zz","evaluator_id":"e1","eval_label":0})"
        "\n");
}

TEST(LoadAnnotations, ErrorsCarryLineNumbers) {
  std::istringstream in(record("t1", "e1", 0) + record("t1", "e1", 1));
  try {
    load_annotations(in);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(LoadAnnotations, RoundTrip) {
  const std::vector<AccuracyPair> acc{{0.8, 0.6}, {0.7, 0.7}, {0.9, 0.5}};
  auto m = synth_annotations(0.6, acc, 40, 2, "left", "right");
  m.tasks[3].human_label.reset();
  std::ostringstream out;
  write_annotations(out, m);
  std::istringstream in(out.str());
  const auto back = load_annotations(in);
  EXPECT_EQ(back.generator_a, "left");
  EXPECT_EQ(back.evaluators, m.evaluators);
  ASSERT_EQ(back.num_tasks(), m.num_tasks());
  for (std::size_t i = 0; i < m.num_tasks(); ++i) {
    EXPECT_EQ(back.tasks[i].task_id, m.tasks[i].task_id);
    EXPECT_EQ(back.tasks[i].human_label, m.tasks[i].human_label);
    EXPECT_EQ(back.tasks[i].eval_labels, m.tasks[i].eval_labels);
  }
  std::ostringstream again;
  write_annotations(again, back);
  EXPECT_EQ(again.str(), out.str());

  // Record order does not matter.
  std::vector<std::string> lines;
  std::istringstream split(out.str());
  for (std::string line; std::getline(split, line);) lines.push_back(line + "\n");
  std::reverse(lines.begin(), lines.end());
  std::string reversed;
  for (const auto& l : lines) reversed += l;
  std::istringstream rin(reversed);
  const auto shuffled = load_annotations(rin);
  EXPECT_DOUBLE_EQ(pooled_observed_win_rate(shuffled), pooled_observed_win_rate(m));
  EXPECT_EQ(shuffled.num_tasks(), m.num_tasks());
}

TEST(RawScores, SwapAndSumIngestion) {
  std::istringstream in(
      R"({"task_id":"t1","evaluator_id":"j","order":"original","score_first":4,"score_second":3})"
      "\n"
      R"({"task_id":"t1","evaluator_id":"j","order":"swapped","score_first":3,"score_second":3})"
      "\n"
      R"({"task_id":"t2","evaluator_id":"j","order":"original","score_first":2,"score_second":5})"
      "\n"
      R"({"task_id":"t2","evaluator_id":"j","order":"swapped","score_first":4,"score_second":1})"
      "\n");
  const auto records = load_raw_scores(in);
  ASSERT_EQ(records.size(), 4u);
  ObservedLabels human{{"t2", B}};
  const auto m = judgments_from_raw_scores(records, "g0", "g1", 1, human);
  EXPECT_EQ(m.tasks[0].eval_labels[0], A);
  EXPECT_EQ(m.tasks[1].eval_labels[0], B);
  EXPECT_FALSE(m.tasks[0].human_label.has_value());
  EXPECT_EQ(m.tasks[1].human_label, B);
}

TEST(RawScores, Errors) {
  std::istringstream bad_order(
      R"({"task_id":"t1","evaluator_id":"j","order":"sideways","score_first":4,"score_second":3})"
      "\n");
  EXPECT_THROW(load_raw_scores(bad_order), DataError);
  std::istringstream one_side(
      R"({"task_id":"t1","evaluator_id":"j","order":"original","score_first":4,"score_second":3})"
      "\n");
  const auto records = load_raw_scores(one_side);
  EXPECT_THROW(judgments_from_raw_scores(records, "a", "b", 0), DataError);
  std::vector<RawScoreRecord> twice{{"t", "j", Presentation::kOriginal, 1, 2},
                                    {"t", "j", Presentation::kOriginal, 1, 2}};
  EXPECT_THROW(judgments_from_raw_scores(twice, "a", "b", 0), DataError);
}

TEST(Likert, MeanComparison) {
  Rng rng(0);
  EXPECT_EQ(aggregate_human_scores(likert("t", {4.0}, {3.5}), rng), A);
  EXPECT_EQ(aggregate_human_scores(likert("t", {2, 3, 2}, {4, 3, 5}), rng), B);
  EXPECT_THROW(aggregate_human_scores(likert("t", {4.0}, {}), rng), DataError);
}

TEST(Likert, TiesAreSeededCoinFlips) {
  const auto tie = likert("t", {3, 4, 5}, {4, 4, 4});
  int b = 0;
  const int trials = 4000;
  for (int s = 0; s < trials; ++s) {
    Rng r1(static_cast<std::uint64_t>(s)), r2(static_cast<std::uint64_t>(s));
    const auto first = aggregate_human_scores(tie, r1);
    ASSERT_EQ(first, aggregate_human_scores(tie, r2));
    b += first == B;
  }
  EXPECT_NEAR(b / double(trials), 0.5, 4 * 0.5 / std::sqrt(trials));
}

TEST(Likert, AggregatesPerTask) {
  auto records = likert("t1", {5, 4}, {1, 2});
  const auto more = likert("t2", {1}, {2});
  records.insert(records.end(), more.begin(), more.end());
  const auto labels = aggregate_human_labels(records, 3);
  EXPECT_EQ(labels.at("t1"), A);
  EXPECT_EQ(labels.at("t2"), B);
  std::istringstream in(R"({"task_id":"t","generator":"C","annotator_id":"h","score":3})"
                        "\n");
  EXPECT_THROW(load_likert(in), DataError);
}

TEST(Attribution, ExactCountsAndDeterminism) {
  const auto inst = instances(100);
  const auto m = simulate_attribution(inst, 0.8, 4);
  const auto human = m.human_labels();
  EXPECT_EQ(std::count(human.begin(), human.end(), A), 80);
  EXPECT_DOUBLE_EQ(empirical_win_rate(human), 0.8);
  const auto again = simulate_attribution(inst, 0.8, 4);
  EXPECT_EQ(again.human_labels(), human);
  const auto other = simulate_attribution(inst, 0.8, 5);
  EXPECT_NE(other.human_labels(), human);

  // The judge picked the human-preferred output on 3 of every 4 instances.
  for (std::size_t i = 0; i < m.num_tasks(); ++i) {
    const bool agrees = i % 4 != 0;
    EXPECT_EQ(m.tasks[i].eval_labels[0] == human[i], agrees);
  }

  const auto all = simulate_attribution(inst, 1.0, 1);
  EXPECT_DOUBLE_EQ(empirical_win_rate(all.human_labels()), 1.0);
  EXPECT_THROW(simulate_attribution({}, 0.5, 1), DataError);
  EXPECT_THROW(simulate_attribution(inst, 0.0, 1), ConfigError);
}

TEST(Attribution, RoundsHalfUp) {
  for (std::size_t n : {7, 13, 50, 101}) {
    for (double ratio : {0.1, 0.15, 0.3, 0.5, 0.7}) {
      const auto m = simulate_attribution(instances(n), ratio, 9);
      const auto h = m.human_labels();
      const auto wins = static_cast<std::size_t>(std::count(h.begin(), h.end(), A));
      EXPECT_EQ(wins, rounded_count(ratio, n));
      EXPECT_DOUBLE_EQ(empirical_win_rate(h), double(rounded_count(ratio, n)) / double(n));
    }
  }
  EXPECT_EQ(rounded_count(0.15, 10), 2u);
  EXPECT_EQ(rounded_count(0.7, 10), 7u);
  EXPECT_EQ(rounded_count(0.25, 10), 3u);
  EXPECT_EQ(rounded_count(0.24, 10), 2u);
}

TEST(PriorSplit, SizesAndPartition) {
  const std::vector<AccuracyPair> acc{{0.8, 0.7}};
  const auto m = synth_annotations(0.6, acc, 200, 1);
  const auto split = split_prior_subset(m, 0.3, 2);
  EXPECT_EQ(split.labeled.num_tasks(), 60u);
  EXPECT_EQ(split.hidden.num_tasks(), 140u);
  std::set<std::string> ids;
  for (const auto& t : split.labeled.tasks) {
    EXPECT_TRUE(t.human_label.has_value());
    ids.insert(t.task_id);
  }
  for (const auto& t : split.hidden.tasks) {
    EXPECT_FALSE(t.human_label.has_value());
    ids.insert(t.task_id);
  }
  EXPECT_EQ(ids.size(), 200u);
  EXPECT_EQ(split.observed().size(), 60u);
  EXPECT_EQ(split.combined().num_tasks(), 200u);

  const auto full = split_prior_subset(m, 1.0, 2);
  EXPECT_EQ(full.hidden.num_tasks(), 0u);
  EXPECT_EQ(full.labeled.num_tasks(), 200u);

  auto unlabeled = m;
  unlabeled.tasks[0].human_label.reset();
  EXPECT_THROW(split_prior_subset(unlabeled, 0.5, 1), DataError);
  EXPECT_THROW(split_prior_subset(m, 1.5, 1), ConfigError);
}

TEST(PriorSplit, ClassBalanceIsHypergeometric) {
  const std::vector<AccuracyPair> acc{{0.8, 0.7}};
  const auto m = synth_annotations(0.7, acc, 200, 3);
  const auto h = m.human_labels();
  const double big_k = double(std::count(h.begin(), h.end(), A));
  const double N = 200, n = 60;
  const double mean = n * big_k / N;
  const double sd = std::sqrt(n * (big_k / N) * (1 - big_k / N) * (N - n) / (N - 1));
  double total = 0.0;
  int outside = 0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    const auto split = split_prior_subset(m, 0.3, static_cast<std::uint64_t>(s));
    const auto lh = split.labeled.human_labels();
    const double count = double(std::count(lh.begin(), lh.end(), A));
    total += count;
    outside += std::abs(count - mean) > 3 * sd;
  }
  EXPECT_NEAR(total / seeds, mean, 3 * sd / std::sqrt(double(seeds)));
  EXPECT_LE(outside, 10);  // about 0.3% expected
}

TEST(OodSelection, ClosestWinsAndTiesGoFirst) {
  const std::vector<AccuracyPair> acc{{0.8, 0.7}};
  std::vector<OodCandidate> c;
  for (double k : {0.55, 0.70, 0.90}) c.push_back({synth_annotations(0.5, acc, 5, 1), k});
  EXPECT_EQ(select_ood_reference(c, 0.66).pooled_k, 0.70);
  const std::vector<OodCandidate> single{c[2]};
  EXPECT_EQ(select_ood_reference(single, 0.1).pooled_k, 0.90);
  std::vector<OodCandidate> tie{{c[0].matrix, 0.6}, {c[1].matrix, 0.8}};
  tie[0].matrix.generator_b = "first";
  EXPECT_EQ(select_ood_reference(tie, 0.7).matrix.generator_b, "first");
  EXPECT_THROW(select_ood_reference(std::vector<OodCandidate>{}, 0.5), ConfigError);
}

TEST(Synth, PerfectEvaluatorsCopyHumans) {
  const std::vector<AccuracyPair> acc{{1, 1}, {1, 1}};
  const auto m = synth_annotations(0.3, acc, 500, 7);
  for (const auto& t : m.tasks) {
    EXPECT_EQ(t.eval_labels[0], *t.human_label);
    EXPECT_EQ(t.eval_labels[1], *t.human_label);
  }
}

TEST(Synth, MatchesConfiguredRates) {
  const std::vector<AccuracyPair> acc{{0.7, 0.65}};
  const auto m = synth_annotations(0.8, acc, 5000, 8);
  EXPECT_NEAR(empirical_win_rate(m.human_labels()), 0.8, 0.03);
  const auto q = empirical_accuracies(m.evaluator_column(0), m.human_labels());
  EXPECT_NEAR(q.q0, 0.7, 0.03);
  EXPECT_NEAR(q.q1, 0.65, 0.03);
  EXPECT_NEAR(pooled_observed_win_rate(m), 0.63, 0.03);
  const auto same = synth_annotations(0.8, acc, 5000, 8);
  EXPECT_EQ(same.tasks[1234].eval_labels, m.tasks[1234].eval_labels);
  EXPECT_EQ(same.human_labels(), m.human_labels());
}

TEST(Synth, ColumnsIndependentGivenHuman) {
  // Chi-square test of independence between two evaluators' correctness,
  // within each human class; df = 1 per table, critical 6.635 at 0.01.
  const std::vector<AccuracyPair> acc{{0.75, 0.7}, {0.8, 0.6}};
  int rejections = 0;
  int tables = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = synth_annotations(0.5, acc, 10000, 100 + seed);
    for (auto cls : {A, B}) {
      double table[2][2] = {{0, 0}, {0, 0}};
      for (const auto& t : m.tasks) {
        if (*t.human_label != cls) continue;
        table[t.eval_labels[0] == cls][t.eval_labels[1] == cls] += 1;
      }
      const double n = table[0][0] + table[0][1] + table[1][0] + table[1][1];
      double chi2 = 0.0;
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          const double expected =
              (table[r][0] + table[r][1]) * (table[0][c] + table[1][c]) / n;
          chi2 += (table[r][c] - expected) * (table[r][c] - expected) / expected;
        }
      }
      rejections += chi2 > 6.635;
      ++tables;
    }
  }
  // 10 tables at alpha = 0.01: more than one rejection is very unlikely.
  EXPECT_LE(rejections, 1) << "of " << tables;
}

TEST(Synth, Errors) {
  const std::vector<AccuracyPair> acc{{0.7, 0.7}};
  EXPECT_THROW(synth_annotations(0.5, acc, 0, 1), ConfigError);
  EXPECT_THROW(synth_annotations(0.5, std::vector<AccuracyPair>{}, 10, 1), ConfigError);
}
