#include "wrcal/harness.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>

#include "wrcal/errors.hpp"
#include "wrcal/pipeline.hpp"

namespace wrcal {
namespace {

struct PreparedPair {
  AnnotationMatrix matrix;
  std::optional<double> p;
  double k = 0.0;
  std::optional<AnnotationMatrix> ood_reference;
};

struct CellOutcome {
  ReportRow row;
  std::vector<double> samples;
};

// Seed streams within one (pair, repetition).
enum Stream : std::uint64_t { kSplitStream = 0, kBwrsStream = 1, kGibbsStream = 2, kStreams = 8 };

std::string format_ratio(double ratio) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, ratio);
  return std::string(buf, res.ptr);
}

std::vector<PreparedPair> prepare_pairs(const RunSpec& spec) {
  std::vector<PreparedPair> pairs;
  for (const auto& dataset : spec.datasets) {
    dataset.validate();
    PreparedPair pair;
    if (spec.baseline.empty() || dataset.generator_a == spec.baseline) {
      pair.matrix = dataset;
    } else if (dataset.generator_b == spec.baseline) {
      pair.matrix = flip_orientation(dataset);
    } else {
      throw ConfigError("dataset " + dataset.pair_name() + " does not involve baseline '" +
                        spec.baseline + "'");
    }
    pair.k = pooled_observed_win_rate(pair.matrix);
    if (pair.matrix.fully_human_labeled()) {
      pair.p = empirical_win_rate(pair.matrix.human_labels());
    }
    pairs.push_back(std::move(pair));
  }

  if (spec.prior.kind == PriorSetting::Kind::kOod) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::vector<OodCandidate> candidates;
      if (spec.prior.ood_pool.empty()) {
        for (std::size_t j = 0; j < pairs.size(); ++j) {
          if (j != i && pairs[j].p) candidates.push_back({pairs[j].matrix, pairs[j].k});
        }
      } else {
        for (const auto& m : spec.prior.ood_pool) {
          if (m.fully_human_labeled()) candidates.push_back({m, pooled_observed_win_rate(m)});
        }
      }
      if (candidates.empty()) {
        throw ConfigError("no human-labeled OOD reference available for " +
                          pairs[i].matrix.pair_name());
      }
      pairs[i].ood_reference = select_ood_reference(candidates, pairs[i].k).matrix;
    }
  }
  return pairs;
}

std::vector<CellOutcome> run_rep(const PreparedPair& pair, std::size_t pair_index,
                                 const RunSpec& spec, const PriorSetting& prior,
                                 std::uint64_t base_seed, const std::string& rep_label) {
  const auto stream_seed = [&](Stream s) {
    return derive_seed(base_seed, pair_index * kStreams + s);
  };

  std::optional<PriorSplit> split;
  if (prior.kind == PriorSetting::Kind::kInDistribution) {
    split = split_prior_subset(pair.matrix, prior.ratio, stream_seed(kSplitStream));
  }
  std::string prior_label = prior.label();
  if (pair.ood_reference) prior_label += ":" + pair.ood_reference->pair_name();

  std::vector<CellOutcome> out;
  for (const Method method : spec.methods) {
    CellOutcome cell;
    ReportRow& row = cell.row;
    row.pair = pair.matrix.pair_name();
    row.method = to_string(method);
    row.prior = prior_label;
    row.rep = rep_label;
    row.p = pair.p;
    row.k = pair.k;

    switch (method) {
      case Method::kObserved:
        row.p_mean = pair.k;
        row.p_mode = pair.k;
        break;
      case Method::kBwrs: {
        const AnnotationMatrix& reference = split ? split->labeled : *pair.ood_reference;
        BWRSConfig config = spec.bwrs;
        config.seed = stream_seed(kBwrsStream);
        try {
          auto result = bwrs_run(collect_counts(pair.matrix, reference), config);
          row.p_mean = result.estimate.mean;
          row.p_mode = result.estimate.mode;
          row.rejected_frac = result.estimate.rejected_fraction;
          row.oor_frac = result.estimate.out_of_range_fraction;
          cell.samples = std::move(result.estimate.samples.values);
        } catch (const UnestimableError& e) {
          row.rejected_frac = e.rejected_fraction();
        }
        break;
      }
      case Method::kBayesDS: {
        DSPriors priors;
        ObservedLabels observed;
        if (prior.kind == PriorSetting::Kind::kOod) {
          const auto counts = collect_counts(pair.matrix, *pair.ood_reference);
          std::vector<OodCounts> ood;
          for (const auto& ec : counts.evaluators) {
            ood.push_back({counts.n0, counts.n1, ec.s0, ec.s1});
          }
          priors = build_ood_prior(ood);
        } else {
          priors = build_no_prior(pair.matrix.evaluators);
          if (split) observed = split->observed();
        }
        GibbsConfig config = spec.gibbs;
        config.seed = stream_seed(kGibbsStream);
        const auto chains = gibbs_run(pair.matrix, priors, observed, config);
        auto summary = posterior_summary(chains, spec.bwrs.mode_grid);
        row.p_mean = summary.mean;
        row.p_mode = summary.mode;
        if (summary.diagnostics) row.rhat = summary.diagnostics->rhat;
        cell.samples = std::move(summary.samples.values);
        break;
      }
    }
    if (row.p && row.p_mean) {
      row.err_mean = estimation_bias(*row.p_mean, *row.p);
      row.err_mode = estimation_bias(*row.p_mode, *row.p);
    }
    out.push_back(std::move(cell));
  }
  return out;
}

// Mean of the present values, or nullopt when none are present.
class OptionalMean {
 public:
  void add(const std::optional<double>& v) {
    if (!v) return;
    sum_ += *v;
    ++count_;
  }
  std::optional<double> value() const {
    if (count_ == 0) return std::nullopt;
    return sum_ / static_cast<double>(count_);
  }

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

ReportRow average_rows(std::span<const ReportRow> rows, const std::string& pair,
                       const std::string& rep) {
  OptionalMean p, k, p_mean, p_mode, err_mean, err_mode, rejected, oor, rhat;
  for (const auto& r : rows) {
    p.add(r.p);
    k.add(r.k);
    p_mean.add(r.p_mean);
    p_mode.add(r.p_mode);
    err_mean.add(r.err_mean);
    err_mode.add(r.err_mode);
    rejected.add(r.rejected_frac);
    oor.add(r.oor_frac);
    rhat.add(r.rhat);
  }
  ReportRow out;
  out.pair = pair;
  out.method = rows.front().method;
  out.prior = rows.front().prior;
  out.rep = rep;
  out.p = p.value();
  out.k = k.value().value_or(0.0);
  out.p_mean = p_mean.value();
  out.p_mode = p_mode.value();
  out.err_mean = err_mean.value();
  out.err_mode = err_mode.value();
  out.rejected_frac = rejected.value();
  out.oor_frac = oor.value();
  out.rhat = rhat.value();
  return out;
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kObserved:
      return "observed";
    case Method::kBwrs:
      return "bwrs";
    case Method::kBayesDS:
      return "bayds";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "observed") return Method::kObserved;
  if (name == "bwrs") return Method::kBwrs;
  if (name == "bayds") return Method::kBayesDS;
  throw ConfigError("unknown method '" + name + "' (expected observed, bwrs or bayds)");
}

std::string PriorSetting::label() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kInDistribution:
      return "indist:" + format_ratio(ratio);
    case Kind::kOod:
      return "ood";
  }
  return "unknown";
}

PriorSetting parse_prior_kind(const std::string& text) {
  PriorSetting prior;
  if (text == "none") return prior;
  if (text == "ood") {
    prior.kind = PriorSetting::Kind::kOod;
    return prior;
  }
  constexpr std::string_view kIndist = "indist:";
  if (text.starts_with(kIndist)) {
    const auto value = text.substr(kIndist.size());
    double ratio = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), ratio);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() ||
        !(ratio > 0.0 && ratio <= 1.0)) {
      throw ConfigError("in-distribution ratio must be a number in (0, 1]: '" + text + "'");
    }
    prior.kind = PriorSetting::Kind::kInDistribution;
    prior.ratio = ratio;
    return prior;
  }
  throw ConfigError("unknown prior '" + text + "' (expected none, indist:<ratio> or ood[:<path>])");
}

void RunSpec::validate() const {
  if (datasets.empty()) throw ConfigError("no datasets");
  if (methods.empty()) throw ConfigError("no methods selected");
  if (repetitions < 1) throw ConfigError("need at least one repetition");
  for (const Method m : methods) {
    if (m == Method::kBwrs && prior.kind == PriorSetting::Kind::kNone) {
      throw ConfigError("bwrs needs an informative prior (indist:<ratio> or ood)");
    }
  }
  if (prior.kind == PriorSetting::Kind::kInDistribution &&
      !(prior.ratio > 0.0 && prior.ratio <= 1.0)) {
    throw ConfigError("in-distribution ratio must lie in (0, 1]");
  }
  bwrs.validate();
  gibbs.validate();
}

RunResult run_one_vs_n(const RunSpec& spec) {
  spec.validate();
  const auto pairs = prepare_pairs(spec);

  RunResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].ood_reference) {
      result.ood_references[pairs[i].matrix.pair_name()] = pairs[i].ood_reference->pair_name();
    }
    std::vector<std::vector<ReportRow>> by_method(spec.methods.size());
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
      auto cells = run_rep(pairs[i], i, spec, spec.prior, spec.seed + rep, std::to_string(rep));
      for (std::size_t m = 0; m < cells.size(); ++m) {
        if (rep == 0 && !cells[m].samples.empty()) {
          result.densities.push_back(
              {cells[m].row.pair, cells[m].row.method, density_curve(cells[m].samples)});
        }
        by_method[m].push_back(cells[m].row);
        result.rows.push_back(std::move(cells[m].row));
      }
    }
    for (const auto& rows : by_method) {
      result.summary.push_back(average_rows(rows, rows.front().pair, "mean"));
    }
  }
  return result;
}

std::vector<ReportRow> pair_average(std::span<const ReportRow> summary) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<ReportRow>> by_method;
  for (const auto& row : summary) {
    auto [it, inserted] = by_method.try_emplace(row.method);
    if (inserted) order.push_back(row.method);
    it->second.push_back(row);
  }
  std::vector<ReportRow> out;
  for (const auto& method : order) {
    auto row = average_rows(by_method[method], "all pairs", "mean");
    // The chosen OOD reference differs per pair; keep only the setting.
    if (row.prior.starts_with("ood:")) row.prior = "ood";
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<SweepCell> sweep_prior_ratio(const RunSpec& spec, std::span<const double> ratios,
                                         std::size_t repetitions) {
  if (ratios.empty()) throw ConfigError("no ratios to sweep");
  if (repetitions < 1) throw ConfigError("need at least one repetition");
  RunSpec base = spec;
  base.prior = PriorSetting{};
  base.prior.kind = PriorSetting::Kind::kInDistribution;
  base.repetitions = repetitions;
  base.validate();

  const auto pairs = prepare_pairs(base);
  for (const auto& pair : pairs) {
    if (!pair.p) {
      throw DataError("sweeps need human labels on every task of " + pair.matrix.pair_name());
    }
  }

  std::vector<SweepCell> cells;
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    PriorSetting prior = base.prior;
    prior.ratio = ratios[r];
    if (!(prior.ratio > 0.0 && prior.ratio <= 1.0)) {
      throw ConfigError("sweep ratios must lie in (0, 1]");
    }
    std::vector<std::vector<double>> err_mean(spec.methods.size());
    std::vector<std::vector<double>> err_mode(spec.methods.size());
    std::vector<std::optional<double>> rhat_max(spec.methods.size());
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      const auto base_seed = derive_seed(spec.seed + rep, 1000 + r);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto outcomes = run_rep(pairs[i], i, base, prior, base_seed, std::to_string(rep));
        for (std::size_t m = 0; m < outcomes.size(); ++m) {
          if (const auto& rhat = outcomes[m].row.rhat) {
            rhat_max[m] = std::max(rhat_max[m].value_or(*rhat), *rhat);
          }
          if (!outcomes[m].row.err_mean) continue;
          err_mean[m].push_back(*outcomes[m].row.err_mean);
          err_mode[m].push_back(*outcomes[m].row.err_mode);
        }
      }
    }
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      SweepCell cell;
      cell.ratio = ratios[r];
      cell.method = to_string(spec.methods[m]);
      cell.count = err_mean[m].size();
      cell.rhat_max = rhat_max[m];
      if (cell.count > 0) {
        double sum_mean = 0.0, sum_mode = 0.0;
        for (std::size_t j = 0; j < cell.count; ++j) {
          sum_mean += err_mean[m][j];
          sum_mode += err_mode[m][j];
        }
        cell.err_mean_avg = sum_mean / static_cast<double>(cell.count);
        cell.err_mode_avg = sum_mode / static_cast<double>(cell.count);
        cell.err_mean_var = sample_variance(err_mean[m]);
        cell.err_mode_var = sample_variance(err_mode[m]);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace wrcal
