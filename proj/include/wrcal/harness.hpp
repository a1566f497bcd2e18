#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wrcal/bwrs.hpp"
#include "wrcal/core.hpp"
#include "wrcal/dawid_skene.hpp"
#include "wrcal/kde.hpp"

namespace wrcal {

enum class Method { kObserved, kBwrs, kBayesDS };

std::string to_string(Method method);
// "observed", "bwrs" or "bayds"; throws ConfigError otherwise.
Method parse_method(const std::string& name);

struct PriorSetting {
  enum class Kind { kNone, kInDistribution, kOod };

  Kind kind = Kind::kNone;
  double ratio = 1.0;  // in-distribution only
  // OOD candidates. Empty means "the other pairs of the same run".
  std::vector<AnnotationMatrix> ood_pool;

  // "none", "indist:<ratio>" or "ood"
  std::string label() const;
};

// Parses "none", "indist:<ratio>" or "ood" (the CLI resolves "ood:<path>"
// itself and fills ood_pool).
PriorSetting parse_prior_kind(const std::string& text);

struct RunSpec {
  std::vector<AnnotationMatrix> datasets;
  // Generator every dataset is compared against. Datasets listing it as
  // generator B are flipped so p is always the baseline's win rate.
  std::string baseline;
  std::vector<Method> methods{Method::kObserved, Method::kBwrs, Method::kBayesDS};
  PriorSetting prior;
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  BWRSConfig bwrs;
  GibbsConfig gibbs;

  // Throws ConfigError on an unusable combination, e.g. BWRS without an
  // informative prior.
  void validate() const;
};

struct ReportRow {
  std::string pair;
  std::string method;
  std::string prior;
  std::string rep;  // repetition index, or "mean" for summary rows
  std::optional<double> p;
  double k = 0.0;
  std::optional<double> p_mean;
  std::optional<double> p_mode;
  std::optional<double> err_mean;
  std::optional<double> err_mode;
  std::optional<double> rejected_frac;
  std::optional<double> oor_frac;
  std::optional<double> rhat;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct DensityExport {
  std::string pair;
  std::string method;
  DensityCurve curve;
};

struct RunResult {
  std::vector<ReportRow> rows;
  std::vector<ReportRow> summary;     // one per (pair, method)
  std::vector<DensityExport> densities;  // repetition 0 of each sampled method
  std::map<std::string, std::string> ood_references;  // pair -> chosen reference pair
};

// 1-vs-n comparison: every dataset x method x repetition, plus per
// (pair, method) averages. Repetition r uses seed + r.
RunResult run_one_vs_n(const RunSpec& spec);

// Averages summary rows over pairs (unweighted) per method.
std::vector<ReportRow> pair_average(std::span<const ReportRow> summary);

struct SweepCell {
  double ratio = 0.0;
  std::string method;
  std::size_t count = 0;  // estimable (pair, repetition) runs
  double err_mean_avg = 0.0;
  double err_mean_var = 0.0;
  double err_mode_avg = 0.0;
  double err_mode_var = 0.0;
  std::optional<double> rhat_max;  // worst chain set in the cell (bayds only)
};

// In-distribution prior sweep: a fresh split per ratio and repetition.
// Errors are pooled over pairs and repetitions; variances use n - 1.
std::vector<SweepCell> sweep_prior_ratio(const RunSpec& spec,
                                         std::span<const double> ratios,
                                         std::size_t repetitions);

}  // namespace wrcal
