#include "wrcal/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wrcal {
namespace {

// Contributions beyond this many bandwidths are below exp(-32).
constexpr double kWindow = 8.0;
constexpr std::size_t kMaxCurvePoints = 200001;

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double sample_sd(std::span<const double> samples) {
  if (samples.size() < 2) return 0.0;
  const double mean = kde_mean(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  const double sd = sample_sd(samples);
  if (sd == 0.0) return 0.0;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityEstimate::DensityEstimate(std::vector<double> samples, double bandwidth,
                                 Kernel kernel)
    : sorted_(std::move(samples)), bandwidth_(bandwidth), kernel_(kernel) {
  if (sorted_.empty()) throw std::invalid_argument("no samples");
  if (!(bandwidth_ > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  std::sort(sorted_.begin(), sorted_.end());
}

DensityEstimate DensityEstimate::with_silverman(std::vector<double> samples) {
  const double h = silverman_bandwidth(samples);
  return DensityEstimate(std::move(samples), h);
}

double DensityEstimate::operator()(double x) const {
  const double reach = kWindow * bandwidth_;
  auto first = std::lower_bound(sorted_.begin(), sorted_.end(), x - reach);
  auto last = std::upper_bound(first, sorted_.end(), x + reach);
  double sum = 0.0;
  for (auto it = first; it != last; ++it) {
    const double u = (x - *it) / bandwidth_;
    sum += std::exp(-0.5 * u * u);
  }
  const double norm = static_cast<double>(sorted_.size()) * bandwidth_ *
                      std::sqrt(2.0 * std::numbers::pi);
  return sum / norm;
}

std::vector<double> DensityEstimate::on_grid(double lo, double hi,
                                             std::size_t points) const {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  std::vector<double> out(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = (*this)(lo + step * static_cast<double>(i));
  }
  return out;
}

double kde_mean(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  long double sum = 0.0L;
  for (double x : samples) sum += x;
  return static_cast<double>(sum / static_cast<long double>(samples.size()));
}

double kde_mode(std::span<const double> samples, std::size_t grid) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  if (grid < 2) throw std::invalid_argument("grid needs at least 2 points");
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  if (*min_it == *max_it) return *min_it;
  const double h = silverman_bandwidth(samples);
  if (h == 0.0) return *min_it;

  const DensityEstimate kde(std::vector<double>(samples.begin(), samples.end()), h);
  const double lo = std::min(*min_it, 0.0);
  const double hi = std::max(*max_it, 1.0);
  const auto density = kde.on_grid(lo, hi, grid);
  std::size_t best = 0;
  for (std::size_t i = 1; i < density.size(); ++i) {
    if (density[i] > density[best]) best = i;
  }
  return lo + (hi - lo) * static_cast<double>(best) / static_cast<double>(grid - 1);
}

DensityCurve density_curve(std::span<const double> samples,
                           std::size_t min_points) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  double h = silverman_bandwidth(samples);
  // Constant samples have no spread; give the export a nominal width.
  if (h == 0.0) h = 1e-3;
  const double lo = std::min(*min_it, 0.0) - 4.0 * h;
  const double hi = std::max(*max_it, 1.0) + 4.0 * h;
  const auto needed = static_cast<std::size_t>(std::ceil((hi - lo) / (0.25 * h))) + 1;
  const std::size_t points = std::clamp(needed, min_points, kMaxCurvePoints);

  const DensityEstimate kde(std::vector<double>(samples.begin(), samples.end()), h);
  DensityCurve curve;
  curve.grid.resize(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) curve.grid[i] = lo + step * static_cast<double>(i);
  curve.density = kde.on_grid(lo, hi, points);
  return curve;
}

double trapezoid(const DensityCurve& curve) {
  double total = 0.0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i) {
    total += 0.5 * (curve.density[i] + curve.density[i - 1]) *
             (curve.grid[i] - curve.grid[i - 1]);
  }
  return total;
}

}  // namespace wrcal
