#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wrcal/random.hpp"

namespace wrcal {

// Outcome of one pairwise comparison. kA (0) means generator A's output was
// preferred, kB (1) means generator B's. Ties never reach this layer.
enum class PreferenceLabel : std::uint8_t { kA = 0, kB = 1 };

PreferenceLabel label_from_int(long long value);
inline int to_int(PreferenceLabel label) { return static_cast<int>(label); }
inline PreferenceLabel flipped(PreferenceLabel label) {
  return label == PreferenceLabel::kA ? PreferenceLabel::kB : PreferenceLabel::kA;
}

struct ComparisonTask {
  std::string task_id;
  std::optional<PreferenceLabel> human_label;
  // Aligned with AnnotationMatrix::evaluators.
  std::vector<PreferenceLabel> eval_labels;
};

// Judge labels for one generator pair. Every evaluator has a label on every
// task; validate() enforces that along with id uniqueness.
struct AnnotationMatrix {
  std::string generator_a;
  std::string generator_b;
  std::vector<std::string> evaluators;
  std::vector<ComparisonTask> tasks;

  std::size_t num_tasks() const { return tasks.size(); }
  std::size_t num_evaluators() const { return evaluators.size(); }

  // Index of an evaluator id, or nullopt.
  std::optional<std::size_t> evaluator_index(const std::string& id) const;

  std::vector<PreferenceLabel> evaluator_column(std::size_t evaluator) const;
  // Human labels in task order; throws DataError if any task lacks one.
  std::vector<PreferenceLabel> human_labels() const;
  bool fully_human_labeled() const;
  std::string pair_name() const { return generator_a + " vs " + generator_b; }

  // Throws DataError when the structural invariants fail. Empty task lists
  // are allowed only when allow_empty is set (split remainders).
  void validate(bool allow_empty = false) const;
};

// Swaps the generator roles and flips every human and evaluator label.
AnnotationMatrix flip_orientation(const AnnotationMatrix& matrix);

struct AccuracyPair {
  double q0 = 1.0;  // P(evaluator says A | human says A)
  double q1 = 1.0;  // P(evaluator says B | human says B)
};

inline constexpr double kDefaultDegeneracyGuard = 1e-3;

// Fraction of labels equal to kA.
double empirical_win_rate(std::span<const PreferenceLabel> labels);

// Fraction of A-wins across every (task, evaluator) judgment.
double pooled_observed_win_rate(const AnnotationMatrix& matrix);

// Agreement rates with the human label, split by the human label's class.
AccuracyPair empirical_accuracies(std::span<const PreferenceLabel> eval_labels,
                                  std::span<const PreferenceLabel> human_labels);

// k = p q0 + (1 - p)(1 - q1)
double forward_win_rate(double p, AccuracyPair acc);

// p = (k + q1 - 1) / (q0 + q1 - 1), returned raw (may leave [0, 1]).
double invert_win_rate(double k, AccuracyPair acc,
                       double guard = kDefaultDegeneracyGuard);

double estimation_bias(double estimate, double p);

enum class FeasibilityRegime { kAboveHalf, kBelowHalf, kDegenerate };

struct FeasibilityReport {
  bool feasible = false;
  FeasibilityRegime regime = FeasibilityRegime::kDegenerate;
};

// Whether inverting k through acc lands strictly inside (0, 1).
FeasibilityReport feasibility_check(double k, AccuracyPair acc,
                                    double guard = kDefaultDegeneracyGuard);

// Scores for one judge query, in presentation order.
struct ScorePair {
  double first = 0.0;
  double second = 0.0;
};

// Position-bias mitigation: `original` shows A first, `swapped` shows B
// first. The generator with the larger total wins; equal totals are broken
// uniformly at random.
PreferenceLabel swap_and_sum(ScorePair original, ScorePair swapped, Rng& rng);

}  // namespace wrcal
