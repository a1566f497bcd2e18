#include "wrcal/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "wrcal/errors.hpp"

namespace wrcal {
namespace {

// Membership mask of m indices drawn uniformly without replacement from [0, n).
std::vector<std::uint8_t> choose_subset(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i = 0; i < m; ++i) mask[order[i]] = 1;
  return mask;
}

void check_ratio(double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("ratio must lie in (0, 1]");
}

}  // namespace

std::size_t rounded_count(double ratio, std::size_t n) {
  // The epsilon absorbs representation error such as 0.7 * 10 = 7.000000000000001
  // or 0.15 * 10 = 1.4999999999999998.
  const double exact = ratio * static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(exact + 0.5 + 1e-9));
}

PreferenceLabel aggregate_human_scores(std::span<const LikertRecord> records, Rng& rng) {
  double sum_a = 0.0, sum_b = 0.0;
  std::size_t count_a = 0, count_b = 0;
  for (const auto& r : records) {
    if (r.generator == Side::kA) {
      sum_a += r.score;
      ++count_a;
    } else {
      sum_b += r.score;
      ++count_b;
    }
  }
  if (count_a == 0 || count_b == 0) {
    throw DataError("human scores are missing for one of the generators");
  }
  const double mean_a = sum_a / static_cast<double>(count_a);
  const double mean_b = sum_b / static_cast<double>(count_b);
  if (mean_a > mean_b) return PreferenceLabel::kA;
  if (mean_b > mean_a) return PreferenceLabel::kB;
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? PreferenceLabel::kB : PreferenceLabel::kA;
}

ObservedLabels aggregate_human_labels(std::span<const LikertRecord> records,
                                      std::uint64_t seed) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<LikertRecord>> by_task;
  for (const auto& r : records) {
    auto [it, inserted] = by_task.try_emplace(r.task_id);
    if (inserted) order.push_back(r.task_id);
    it->second.push_back(r);
  }
  Rng rng(seed);
  ObservedLabels labels;
  for (const auto& task : order) {
    try {
      labels[task] = aggregate_human_scores(by_task[task], rng);
    } catch (const DataError& e) {
      throw DataError("task '" + task + "': " + e.what());
    }
  }
  return labels;
}

AnnotationMatrix judgments_from_raw_scores(std::span<const RawScoreRecord> records,
                                           const std::string& generator_a,
                                           const std::string& generator_b,
                                           std::uint64_t seed,
                                           const ObservedLabels& human) {
  struct Pair {
    std::optional<ScorePair> original;
    std::optional<ScorePair> swapped;
  };
  std::vector<std::string> tasks, evaluators;
  std::unordered_map<std::string, std::size_t> task_index, evaluator_index;
  std::map<std::pair<std::size_t, std::size_t>, Pair> cells;
  for (const auto& r : records) {
    auto [t, new_task] = task_index.try_emplace(r.task_id, tasks.size());
    if (new_task) tasks.push_back(r.task_id);
    auto [e, new_eval] = evaluator_index.try_emplace(r.evaluator_id, evaluators.size());
    if (new_eval) evaluators.push_back(r.evaluator_id);
    auto& cell = cells[{t->second, e->second}];
    auto& slot = r.order == Presentation::kOriginal ? cell.original : cell.swapped;
    if (slot) {
      throw DataError("duplicate " +
                      std::string(r.order == Presentation::kOriginal ? "original" : "swapped") +
                      " record for task '" + r.task_id + "' and evaluator '" +
                      r.evaluator_id + "'");
    }
    slot = ScorePair{r.score_first, r.score_second};
  }
  if (tasks.empty()) throw DataError("no raw-score records");

  AnnotationMatrix matrix;
  matrix.generator_a = generator_a;
  matrix.generator_b = generator_b;
  matrix.evaluators = evaluators;
  Rng rng(seed);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    ComparisonTask task{tasks[t], std::nullopt, {}};
    if (const auto it = human.find(tasks[t]); it != human.end()) task.human_label = it->second;
    for (std::size_t e = 0; e < evaluators.size(); ++e) {
      const auto it = cells.find({t, e});
      if (it == cells.end() || !it->second.original || !it->second.swapped) {
        throw DataError("task '" + tasks[t] + "' lacks both presentation orders from evaluator '" +
                        evaluators[e] + "'");
      }
      task.eval_labels.push_back(swap_and_sum(*it->second.original, *it->second.swapped, rng));
    }
    matrix.tasks.push_back(std::move(task));
  }
  matrix.validate();
  return matrix;
}

AnnotationMatrix simulate_attribution(std::span<const PreferenceInstance> instances,
                                      double ratio, std::uint64_t seed,
                                      const std::string& generator_a,
                                      const std::string& generator_b) {
  if (instances.empty()) throw DataError("no instances");
  check_ratio(ratio);

  AnnotationMatrix matrix;
  matrix.generator_a = generator_a;
  matrix.generator_b = generator_b;
  for (const auto& inst : instances) {
    for (const auto& [evaluator, picked] : inst.judgments) {
      if (!matrix.evaluator_index(evaluator)) matrix.evaluators.push_back(evaluator);
    }
  }

  Rng rng(seed);
  const auto to_a = choose_subset(instances.size(), rounded_count(ratio, instances.size()), rng);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto human = to_a[i] ? PreferenceLabel::kA : PreferenceLabel::kB;
    ComparisonTask task{inst.instance_id, human, {}};
    for (const auto& evaluator : matrix.evaluators) {
      const auto it = inst.judgments.find(evaluator);
      if (it == inst.judgments.end()) {
        throw DataError("instance '" + inst.instance_id + "' has no judgment from '" +
                        evaluator + "'");
      }
      task.eval_labels.push_back(it->second ? human : flipped(human));
    }
    matrix.tasks.push_back(std::move(task));
  }
  return matrix;
}

ObservedLabels PriorSplit::observed() const {
  ObservedLabels out;
  for (const auto& task : labeled.tasks) out.emplace(task.task_id, *task.human_label);
  return out;
}

AnnotationMatrix PriorSplit::combined() const {
  AnnotationMatrix out = labeled;
  out.tasks.insert(out.tasks.end(), hidden.tasks.begin(), hidden.tasks.end());
  return out;
}

PriorSplit split_prior_subset(const AnnotationMatrix& matrix, double ratio,
                              std::uint64_t seed) {
  check_ratio(ratio);
  if (!matrix.fully_human_labeled()) {
    throw DataError("prior subsets need human labels on every task");
  }
  Rng rng(seed);
  const auto keep = choose_subset(matrix.num_tasks(), rounded_count(ratio, matrix.num_tasks()), rng);

  PriorSplit split;
  for (auto* part : {&split.labeled, &split.hidden}) {
    part->generator_a = matrix.generator_a;
    part->generator_b = matrix.generator_b;
    part->evaluators = matrix.evaluators;
  }
  for (std::size_t i = 0; i < matrix.num_tasks(); ++i) {
    if (keep[i]) {
      split.labeled.tasks.push_back(matrix.tasks[i]);
    } else {
      auto task = matrix.tasks[i];
      task.human_label.reset();
      split.hidden.tasks.push_back(std::move(task));
    }
  }
  return split;
}

const OodCandidate& select_ood_reference(std::span<const OodCandidate> candidates,
                                         double target_k) {
  if (candidates.empty()) throw ConfigError("no OOD reference candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (std::abs(candidates[i].pooled_k - target_k) <
        std::abs(candidates[best].pooled_k - target_k)) {
      best = i;
    }
  }
  return candidates[best];
}

AnnotationMatrix synth_annotations(double p, std::span<const AccuracyPair> accuracies,
                                   std::size_t n, std::uint64_t seed,
                                   const std::string& generator_a,
                                   const std::string& generator_b) {
  if (n < 1) throw ConfigError("need at least one task");
  if (accuracies.empty()) throw ConfigError("need at least one evaluator");
  AnnotationMatrix matrix;
  matrix.generator_a = generator_a;
  matrix.generator_b = generator_b;
  for (std::size_t e = 0; e < accuracies.size(); ++e) {
    matrix.evaluators.push_back("e" + std::to_string(e));
  }
  Rng rng(seed);
  matrix.tasks.reserve(n);
  char id[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(id, sizeof id, "t%05zu", i);
    const auto human = uniform_open(rng) < p ? PreferenceLabel::kA : PreferenceLabel::kB;
    ComparisonTask task{id, human, {}};
    task.eval_labels.reserve(accuracies.size());
    for (const auto& acc : accuracies) {
      const double agree = human == PreferenceLabel::kA ? acc.q0 : acc.q1;
      task.eval_labels.push_back(uniform_open(rng) < agree ? human : flipped(human));
    }
    matrix.tasks.push_back(std::move(task));
  }
  return matrix;
}

}  // namespace wrcal
