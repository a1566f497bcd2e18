#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wrcal/annotation_io.hpp"
#include "wrcal/core.hpp"
#include "wrcal/dawid_skene.hpp"
#include "wrcal/random.hpp"

namespace wrcal {

// round(ratio * n), halves rounding up.
std::size_t rounded_count(double ratio, std::size_t n);

// Winner by mean score for one task's Likert records; equal means are broken
// uniformly at random from rng.
PreferenceLabel aggregate_human_scores(std::span<const LikertRecord> records, Rng& rng);

// aggregate_human_scores per task, tasks taken in first-appearance order from
// a single generator seeded with `seed`.
ObservedLabels aggregate_human_labels(std::span<const LikertRecord> records,
                                      std::uint64_t seed);

// Turns paired original/swapped score records into a judged matrix via
// swap_and_sum. Human labels are attached where `human` has them.
AnnotationMatrix judgments_from_raw_scores(std::span<const RawScoreRecord> records,
                                           const std::string& generator_a,
                                           const std::string& generator_b,
                                           std::uint64_t seed,
                                           const ObservedLabels& human = {});

// Assigns the human-preferred output of exactly rounded_count(ratio, n)
// instances, chosen uniformly without replacement, to generator A; the rest
// go to generator B. Instance judgments become evaluator labels; instances
// without judgments yield a matrix with no evaluators.
AnnotationMatrix simulate_attribution(std::span<const PreferenceInstance> instances,
                                      double ratio, std::uint64_t seed,
                                      const std::string& generator_a = "A",
                                      const std::string& generator_b = "B");

struct PriorSplit {
  AnnotationMatrix labeled;  // human labels kept
  AnnotationMatrix hidden;   // human labels removed
  ObservedLabels observed() const;
  // All tasks with only the labeled part's human labels exposed.
  AnnotationMatrix combined() const;
};

// Uniformly samples rounded_count(ratio, n) tasks to keep their human labels.
// Both parts preserve the original task order.
PriorSplit split_prior_subset(const AnnotationMatrix& matrix, double ratio,
                              std::uint64_t seed);

struct OodCandidate {
  AnnotationMatrix matrix;
  double pooled_k = 0.0;
};

// Candidate whose pooled observed win rate is closest to target_k; the first
// one wins ties.
const OodCandidate& select_ood_reference(std::span<const OodCandidate> candidates,
                                         double target_k);

// Ground-truth simulator: human labels iid with P(label A) = p, each
// evaluator agreeing with the human label with probability q0 (human A) or
// q1 (human B). Evaluators are named e0, e1, ...; tasks t00000, t00001, ...
AnnotationMatrix synth_annotations(double p, std::span<const AccuracyPair> accuracies,
                                   std::size_t n, std::uint64_t seed,
                                   const std::string& generator_a = "A",
                                   const std::string& generator_b = "B");

}  // namespace wrcal
