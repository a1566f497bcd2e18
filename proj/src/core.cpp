#include "wrcal/core.hpp"

#include <cmath>
#include <random>
#include <unordered_set>

#include "wrcal/errors.hpp"

namespace wrcal {

PreferenceLabel label_from_int(long long value) {
  if (value == 0) return PreferenceLabel::kA;
  if (value == 1) return PreferenceLabel::kB;
  throw DataError("label must be 0 or 1, got " + std::to_string(value));
}

std::optional<std::size_t> AnnotationMatrix::evaluator_index(
    const std::string& id) const {
  for (std::size_t e = 0; e < evaluators.size(); ++e) {
    if (evaluators[e] == id) return e;
  }
  return std::nullopt;
}

std::vector<PreferenceLabel> AnnotationMatrix::evaluator_column(
    std::size_t evaluator) const {
  std::vector<PreferenceLabel> column;
  column.reserve(tasks.size());
  for (const auto& task : tasks) column.push_back(task.eval_labels.at(evaluator));
  return column;
}

std::vector<PreferenceLabel> AnnotationMatrix::human_labels() const {
  std::vector<PreferenceLabel> labels;
  labels.reserve(tasks.size());
  for (const auto& task : tasks) {
    if (!task.human_label) {
      throw DataError("task '" + task.task_id + "' has no human label");
    }
    labels.push_back(*task.human_label);
  }
  return labels;
}

bool AnnotationMatrix::fully_human_labeled() const {
  for (const auto& task : tasks) {
    if (!task.human_label) return false;
  }
  return true;
}

void AnnotationMatrix::validate(bool allow_empty) const {
  if (tasks.empty() && !allow_empty) throw DataError("matrix has no tasks");
  if (evaluators.empty()) throw DataError("matrix has no evaluators");
  std::unordered_set<std::string> seen(evaluators.begin(), evaluators.end());
  if (seen.size() != evaluators.size()) {
    throw DataError("duplicate evaluator id in matrix");
  }
  seen.clear();
  for (const auto& task : tasks) {
    if (!seen.insert(task.task_id).second) {
      throw DataError("duplicate task id '" + task.task_id + "'");
    }
    if (task.eval_labels.size() != evaluators.size()) {
      throw DataError("task '" + task.task_id +
                      "' does not have a label from every evaluator");
    }
  }
}

AnnotationMatrix flip_orientation(const AnnotationMatrix& matrix) {
  AnnotationMatrix out = matrix;
  std::swap(out.generator_a, out.generator_b);
  for (auto& task : out.tasks) {
    if (task.human_label) task.human_label = flipped(*task.human_label);
    for (auto& label : task.eval_labels) label = flipped(label);
  }
  return out;
}

double empirical_win_rate(std::span<const PreferenceLabel> labels) {
  if (labels.empty()) throw DataError("no observations");
  std::size_t wins = 0;
  for (auto label : labels) wins += label == PreferenceLabel::kA;
  return static_cast<double>(wins) / static_cast<double>(labels.size());
}

double pooled_observed_win_rate(const AnnotationMatrix& matrix) {
  std::size_t wins = 0;
  std::size_t total = 0;
  for (const auto& task : matrix.tasks) {
    for (auto label : task.eval_labels) {
      wins += label == PreferenceLabel::kA;
      ++total;
    }
  }
  if (total == 0) throw DataError("no observations");
  return static_cast<double>(wins) / static_cast<double>(total);
}

AccuracyPair empirical_accuracies(std::span<const PreferenceLabel> eval_labels,
                                  std::span<const PreferenceLabel> human_labels) {
  if (eval_labels.size() != human_labels.size()) {
    throw DataError("evaluator and human label lists differ in length");
  }
  std::size_t n0 = 0, n1 = 0, s0 = 0, s1 = 0;
  for (std::size_t i = 0; i < human_labels.size(); ++i) {
    if (human_labels[i] == PreferenceLabel::kA) {
      ++n0;
      s0 += eval_labels[i] == PreferenceLabel::kA;
    } else {
      ++n1;
      s1 += eval_labels[i] == PreferenceLabel::kB;
    }
  }
  if (n0 == 0) throw DataError("q0 undefined: no tasks with human label 0");
  if (n1 == 0) throw DataError("q1 undefined: no tasks with human label 1");
  return {static_cast<double>(s0) / static_cast<double>(n0),
          static_cast<double>(s1) / static_cast<double>(n1)};
}

double forward_win_rate(double p, AccuracyPair acc) {
  return p * acc.q0 + (1.0 - p) * (1.0 - acc.q1);
}

double invert_win_rate(double k, AccuracyPair acc, double guard) {
  const double denominator = acc.q0 + acc.q1 - 1.0;
  if (std::abs(denominator) <= guard) {
    throw DegenerateDenominatorError(
        "q0 + q1 - 1 is within the degeneracy guard");
  }
  return (k + acc.q1 - 1.0) / denominator;
}

double estimation_bias(double estimate, double p) { return std::abs(estimate - p); }

FeasibilityReport feasibility_check(double k, AccuracyPair acc, double guard) {
  const double sum = acc.q0 + acc.q1;
  if (std::abs(sum - 1.0) <= guard) return {false, FeasibilityRegime::kDegenerate};
  if (sum > 1.0) {
    return {1.0 - acc.q1 < k && k < acc.q0, FeasibilityRegime::kAboveHalf};
  }
  return {acc.q0 < k && k < 1.0 - acc.q1, FeasibilityRegime::kBelowHalf};
}

PreferenceLabel swap_and_sum(ScorePair original, ScorePair swapped, Rng& rng) {
  const double total_a = original.first + swapped.second;
  const double total_b = original.second + swapped.first;
  if (total_a > total_b) return PreferenceLabel::kA;
  if (total_b > total_a) return PreferenceLabel::kB;
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? PreferenceLabel::kB : PreferenceLabel::kA;
}

}  // namespace wrcal
