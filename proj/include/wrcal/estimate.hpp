#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wrcal/beta.hpp"
#include "wrcal/diagnostics.hpp"

namespace wrcal {

// Point estimates of p with the samples they were taken from.
struct WinRateEstimate {
  double mean = 0.0;
  double mode = 0.0;
  SampleBatch samples;
  double rejected_fraction = 0.0;
  // Share of retained samples outside [0, 1].
  double out_of_range_fraction = 0.0;
  std::optional<ChainDiagnostics> diagnostics;
};

}  // namespace wrcal
