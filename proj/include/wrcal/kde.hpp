#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wrcal {

inline constexpr std::size_t kDefaultModeGrid = 1001;

enum class Kernel { kGaussian };

// Silverman's rule of thumb: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling
// back to sd when the IQR collapses. Zero for constant samples.
double silverman_bandwidth(std::span<const double> samples);

// Univariate Gaussian KDE over a retained sample list.
class DensityEstimate {
 public:
  // Throws std::invalid_argument on empty samples or non-positive bandwidth.
  DensityEstimate(std::vector<double> samples, double bandwidth,
                  Kernel kernel = Kernel::kGaussian);
  // Bandwidth from silverman_bandwidth().
  static DensityEstimate with_silverman(std::vector<double> samples);

  double operator()(double x) const;
  // Density at `points` evenly spaced values covering [lo, hi].
  std::vector<double> on_grid(double lo, double hi, std::size_t points) const;

  double bandwidth() const { return bandwidth_; }
  Kernel kernel() const { return kernel_; }
  const std::vector<double>& samples() const { return sorted_; }

 private:
  std::vector<double> sorted_;
  double bandwidth_;
  Kernel kernel_;
};

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
};

// Exact for any symmetric kernel: the mean of a KDE is the sample mean.
double kde_mean(std::span<const double> samples);

// Argmax of the Silverman-bandwidth Gaussian KDE over `grid` evenly spaced
// points on [min(samples) ^ 0, max(samples) v 1]. Ties go to the lower point.
double kde_mode(std::span<const double> samples,
                std::size_t grid = kDefaultModeGrid);

// Density table for export. Covers the mode grid padded by four bandwidths
// on each side, with spacing no coarser than a quarter bandwidth.
DensityCurve density_curve(std::span<const double> samples,
                           std::size_t min_points = kDefaultModeGrid);

// Trapezoid-rule integral of a tabulated curve.
double trapezoid(const DensityCurve& curve);

}  // namespace wrcal
