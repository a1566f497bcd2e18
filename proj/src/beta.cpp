#include "wrcal/beta.hpp"

#include <cmath>
#include <stdexcept>

#include "wrcal/random.hpp"

namespace wrcal {

void BetaParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw std::invalid_argument("Beta shape parameters must be positive");
  }
}

BetaParams beta_posterior(std::size_t successes, std::size_t trials,
                          BetaParams prior) {
  prior.validate();
  if (successes > trials) {
    throw std::invalid_argument("successes exceed trials");
  }
  return {prior.alpha + static_cast<double>(successes),
          prior.beta + static_cast<double>(trials - successes)};
}

SampleBatch sample_beta(BetaParams params, std::size_t n, std::uint64_t seed) {
  params.validate();
  if (n == 0) throw std::invalid_argument("sample_beta needs n >= 1");
  Rng rng(seed);
  SampleBatch batch{{}, seed};
  batch.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.values.push_back(beta_draw(params.alpha, params.beta, rng));
  }
  return batch;
}

}  // namespace wrcal
