#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wrcal {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  // Throws std::invalid_argument unless both shapes are positive and finite.
  void validate() const;
  double mean() const { return alpha / (alpha + beta); }

  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

// Draws plus the seed that produced them.
struct SampleBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
};

// Conjugate update of a Beta prior with Bernoulli counts.
BetaParams beta_posterior(std::size_t successes, std::size_t trials,
                          BetaParams prior);

SampleBatch sample_beta(BetaParams params, std::size_t n, std::uint64_t seed);

}  // namespace wrcal
