#pragma once

// Bayesian Win Rate Sampling: per evaluator, draw (q0, q1, k) from their
// Beta posteriors under uniform priors, map each draw through
// p = (k + q1 - 1) / (q0 + q1 - 1), pool the draws of all evaluators and
// summarize the pooled sample list by its KDE mean and mode.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wrcal/core.hpp"
#include "wrcal/estimate.hpp"
#include "wrcal/kde.hpp"

namespace wrcal {

struct EvaluatorCounts {
  std::string evaluator;
  std::size_t s0 = 0;  // reference tasks with human 0 the evaluator got right
  std::size_t s1 = 0;  // reference tasks with human 1 the evaluator got right
  std::size_t nk = 0;  // target set size
  std::size_t sk = 0;  // A-wins by the evaluator on the target set
};

struct ReferenceCounts {
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::vector<EvaluatorCounts> evaluators;

  // Throws DataError when a count exceeds its bound.
  void validate() const;
};

struct BWRSConfig {
  std::size_t samples_per_evaluator = 10000;
  double degeneracy_guard = kDefaultDegeneracyGuard;
  bool clip_estimate = true;
  std::uint64_t seed = 0;
  // An evaluator is kept only when at least this share of its non-degenerate
  // draws agree on the sign of q0 + q1 - 1. Below that, its draws straddle
  // the pole of the inversion and all of them are rejected.
  double min_sign_confidence = 0.99;
  std::size_t mode_grid = kDefaultModeGrid;

  void validate() const;
};

struct BWRSResult {
  WinRateEstimate estimate;
  std::vector<std::string> dropped_evaluators;
};

// Counts for the target/reference pair. Evaluators are matched by id and
// reported in the target's order; the reference must be fully human-labeled.
ReferenceCounts collect_counts(const AnnotationMatrix& target,
                               const AnnotationMatrix& reference);

// Throws UnestimableError when every draw is rejected.
BWRSResult bwrs_run(const ReferenceCounts& counts, const BWRSConfig& config);

}  // namespace wrcal
