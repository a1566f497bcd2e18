#include "wrcal/random.hpp"

#include <cmath>
#include <limits>

namespace wrcal {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_open(Rng& rng) {
  // 53 random mantissa bits, offset by half a step to exclude both ends.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double log_gamma_draw(double shape, Rng& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(rng));
  }
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  const double g = gamma(rng);
  return std::log(g) + std::log(uniform_open(rng)) / shape;
}

double beta_draw(double alpha, double beta, Rng& rng) {
  const double log_x = log_gamma_draw(alpha, rng);
  const double log_y = log_gamma_draw(beta, rng);
  const double value = 1.0 / (1.0 + std::exp(log_y - log_x));
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  const double high = std::nextafter(1.0, 0.0);
  if (value < kLow) return kLow;
  if (value > high) return high;
  return value;
}

}  // namespace wrcal
