#pragma once

#include <cstdint>
#include <random>

namespace wrcal {

using Rng = std::mt19937_64;

// Mixes a base seed with a stream index (splitmix64 finalizer) so that
// per-evaluator and per-chain generators are decorrelated but reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Uniform draw on the open interval (0, 1).
double uniform_open(Rng& rng);

// Log of a Gamma(shape, 1) draw. Shapes below 1 are boosted through
// Gamma(shape + 1) * U^(1/shape) so tiny shapes do not underflow to zero.
double log_gamma_draw(double shape, Rng& rng);

// Beta(alpha, beta) draw, always strictly inside (0, 1).
double beta_draw(double alpha, double beta, Rng& rng);

}  // namespace wrcal
