#pragma once

#include <cstddef>
#include <span>

#include "wrcal/beta.hpp"

namespace wrcal {

struct ChainDiagnostics {
  // Reported R-hat: the largest of the three variants below.
  double rhat = 1.0;
  double rhat_bulk = 1.0;     // rank-normalized split-R-hat
  double rhat_tail = 1.0;     // rank-normalized split-R-hat of |x - median|
  double rhat_classic = 1.0;  // split-R-hat on raw values
  double ess = 0.0;           // bulk effective sample size, capped at n_chains * n_samples
  std::size_t n_chains = 0;
  std::size_t n_samples = 0;  // per chain
};

// Convergence diagnostics over equally long chains of a scalar parameter.
// Needs at least 2 chains of at least 10 draws; throws std::invalid_argument
// otherwise.
ChainDiagnostics chain_diagnostics(std::span<const SampleBatch> chains);

}  // namespace wrcal
