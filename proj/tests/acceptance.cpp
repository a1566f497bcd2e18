// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// mandatory criterion fails. Sampler settings follow the library defaults
// (4 chains, 10000 tuning and 10000 kept scans) unless noted.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wrcal/bwrs.hpp"
#include "wrcal/dawid_skene.hpp"
#include "wrcal/errors.hpp"
#include "wrcal/harness.hpp"
#include "wrcal/pipeline.hpp"

using namespace wrcal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Worst R-hat seen by criteria 3 to 5, checked by criterion 7.
double g_worst_rhat = 0.0;
std::size_t g_chain_sets = 0;

void note_rhat(double rhat) {
  g_worst_rhat = std::max(g_worst_rhat, rhat);
  ++g_chain_sets;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const std::vector<AccuracyPair> kEvaluators{{0.75, 0.70}, {0.70, 0.65}, {0.80, 0.55}};

// Three synthetic pairs at p = 0.8, n = 2000 against one baseline.
std::vector<AnnotationMatrix> calibration_pairs() {
  std::vector<AnnotationMatrix> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back(synth_annotations(0.8, kEvaluators, 2000, 1000 + i, "base",
                                    "gen" + std::to_string(i)));
  }
  return out;
}

Outcome round_trip() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int n = 0;
  while (n < 1000) {
    const double p = u(rng);
    const AccuracyPair acc{u(rng), u(rng)};
    if (acc.q0 + acc.q1 < 1.05) continue;
    worst = std::max(worst, std::abs(invert_win_rate(forward_win_rate(p, acc), acc) - p));
    ++n;
  }
  return {worst < 1e-12, "max |error| " + fmt(worst) + " over 1000 draws"};
}

Outcome conjugacy() {
  std::mt19937_64 rng(2);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 10000)(rng);
    const std::size_t s = std::uniform_int_distribution<std::size_t>(0, n)(rng);
    const BetaParams prior{std::uniform_real_distribution<double>(0.1, 10.0)(rng),
                           std::uniform_real_distribution<double>(0.1, 10.0)(rng)};
    const auto post = beta_posterior(s, n, prior);
    const BetaParams hand{prior.alpha + double(s), prior.beta + double(n - s)};
    mismatches += !(post == hand);
  }
  int bad_sums = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n0 = std::uniform_int_distribution<std::size_t>(1, 10000)(rng);
    const std::size_t s0 = std::uniform_int_distribution<std::size_t>(0, n0)(rng);
    const std::vector<OodCounts> c{{n0, 1, s0, 0}};
    const auto q0 = build_ood_prior(c).evaluators[0].q0;
    bad_sums += q0.alpha + q0.beta != 2.0;
  }
  return {mismatches == 0 && bad_sums == 0,
          std::to_string(mismatches) + " posterior mismatches, " + std::to_string(bad_sums) +
              " OOD sums != 2"};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t e = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    AnnotationMatrix m;
    m.generator_a = "a";
    m.generator_b = "b";
    for (std::size_t j = 0; j < e; ++j) m.evaluators.push_back("e" + std::to_string(j));
    std::bernoulli_distribution vote_a(0.6);
    for (std::size_t i = 0; i < n; ++i) {
      ComparisonTask t{"t" + std::to_string(i), std::nullopt, {}};
      for (std::size_t j = 0; j < e; ++j) {
        t.eval_labels.push_back(vote_a(rng) ? PreferenceLabel::kA : PreferenceLabel::kB);
      }
      m.tasks.push_back(std::move(t));
    }

    // Cycle through the three prior regimes.
    DSPriors priors;
    ObservedLabels observed;
    switch (trial % 3) {
      case 0:
        priors = build_no_prior(m.evaluators);
        break;
      case 1: {
        std::vector<OodCounts> counts;
        for (std::size_t j = 0; j < e; ++j) {
          const std::size_t n0 = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
          const std::size_t n1 = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
          counts.push_back({n0, n1, std::uniform_int_distribution<std::size_t>(0, n0)(rng),
                            std::uniform_int_distribution<std::size_t>(0, n1)(rng)});
        }
        priors = build_ood_prior(counts);
        break;
      }
      default:
        priors = build_no_prior(m.evaluators);
        for (std::size_t i = 0; i < n; i += 2) {
          observed[m.tasks[i].task_id] = vote_a(rng) ? PreferenceLabel::kA : PreferenceLabel::kB;
        }
        break;
    }

    GibbsConfig config;  // 4 chains, 10000 + 10000
    config.seed = 300 + static_cast<std::uint64_t>(trial);
    const auto chains = gibbs_run(m, priors, observed, config);
    const auto summary = posterior_summary(chains);
    if (summary.diagnostics) note_rhat(summary.diagnostics->rhat);
    const double exact = brute_force_posterior(m, priors, observed);
    worst = std::max(worst, std::abs(summary.mean - exact));
  }
  return {worst < 0.01, "max |gibbs - exact| " + fmt(worst) + " over 20 matrices"};
}

RunSpec calibration_spec() {
  RunSpec spec;
  spec.datasets = calibration_pairs();
  spec.baseline = "base";
  spec.prior.kind = PriorSetting::Kind::kInDistribution;
  spec.prior.ratio = 0.3;
  spec.repetitions = 10;
  spec.seed = 4;
  return spec;
}

Outcome synthetic_calibration() {
  const auto result = run_one_vs_n(calibration_spec());
  for (const auto& r : result.rows) {
    if (r.rhat) note_rhat(*r.rhat);
  }
  const auto avg = pair_average(result.summary);
  double baseline = 0, bwrs_mode = 0, bwrs_mean = 0, ds_mode = 0, ds_mean = 0;
  for (const auto& r : avg) {
    if (r.method == "observed") baseline = *r.err_mean;
    if (r.method == "bwrs") {
      bwrs_mode = *r.err_mode;
      bwrs_mean = *r.err_mean;
    }
    if (r.method == "bayds") {
      ds_mode = *r.err_mode;
      ds_mean = *r.err_mean;
    }
  }
  const bool pass = baseline >= 0.12 && baseline <= 0.16 && bwrs_mode < 0.05 && ds_mode < 0.05 &&
                    bwrs_mode <= bwrs_mean + 0.01 && ds_mode <= ds_mean + 0.01;
  return {pass, "baseline " + fmt(baseline) + "; bwrs mode/mean " + fmt(bwrs_mode) + "/" +
                    fmt(bwrs_mean) + "; bayds mode/mean " + fmt(ds_mode) + "/" + fmt(ds_mean)};
}

Outcome prior_ratio_trend() {
  auto spec = calibration_spec();
  spec.methods = {Method::kBwrs, Method::kBayesDS};
  const std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const auto cells = sweep_prior_ratio(spec, ratios, 10);
  for (const auto& c : cells) {
    if (c.rhat_max) note_rhat(*c.rhat_max);
  }
  auto error_at = [&](double ratio, const std::string& method) {
    for (const auto& c : cells) {
      if (c.ratio == ratio && c.method == method) return c.err_mean_avg;
    }
    return std::nan("");
  };
  std::string detail;
  bool pass = true;
  for (const std::string method : {"bwrs", "bayds"}) {
    const double lo = error_at(0.1, method);
    const double hi = error_at(1.0, method);
    pass = pass && hi < lo;
    detail += method + " " + fmt(lo) + " -> " + fmt(hi) + "; ";
  }
  return {pass, "mean error at ratio 0.1 -> 1.0: " + detail};
}

Outcome degenerate_regimes() {
  std::string detail;
  bool pass = true;

  // Perfect evaluators.
  const std::vector<AccuracyPair> perfect(3, AccuracyPair{1.0, 1.0});
  const auto exact = synth_annotations(0.8, perfect, 2000, 61, "base", "perfect");
  const double p = empirical_win_rate(exact.human_labels());
  RunSpec spec;
  spec.datasets = {exact};
  spec.baseline = "base";
  spec.prior.kind = PriorSetting::Kind::kInDistribution;
  spec.prior.ratio = 0.3;
  spec.repetitions = 1;
  spec.seed = 6;
  double worst = 0.0;
  for (const auto& r : run_one_vs_n(spec).rows) {
    worst = std::max({worst, *r.err_mean, *r.err_mode});
  }
  spec.prior = PriorSetting{};
  spec.methods = {Method::kBayesDS};
  for (const auto& r : run_one_vs_n(spec).rows) {
    worst = std::max({worst, *r.err_mean, *r.err_mode});
  }
  pass = pass && worst <= 0.01;
  detail += "perfect: max error " + fmt(worst) + " (p=" + fmt(p) + "); ";

  // Chance-level evaluators.
  const std::vector<AccuracyPair> coins(3, AccuracyPair{0.5, 0.5});
  const auto noise = synth_annotations(0.8, coins, 2000, 62, "base", "coin");
  const auto split = split_prior_subset(noise, 0.3, 63);
  bool unestimable = false;
  try {
    bwrs_run(collect_counts(noise, split.labeled), BWRSConfig{});
  } catch (const UnestimableError& e) {
    unestimable = e.rejected_fraction() == 1.0;
  }
  pass = pass && unestimable;
  detail += std::string("bwrs unestimable: ") + (unestimable ? "yes" : "no") + "; ";

  GibbsConfig config;
  config.seed = 64;
  auto draws = posterior_summary(
                   gibbs_run(noise, build_no_prior(noise.evaluators), {}, config))
                   .samples.values;
  std::sort(draws.begin(), draws.end());
  const double lo = draws[static_cast<std::size_t>(0.05 * double(draws.size()))];
  const double hi = draws[static_cast<std::size_t>(0.95 * double(draws.size()))];
  pass = pass && lo <= 0.25 && hi >= 0.75;
  detail += "bayds 90% interval [" + fmt(lo) + ", " + fmt(hi) + "]";
  return {pass, detail};
}

void report(int id, const std::string& name, double limit_seconds,
            const std::function<Outcome()>& check, int& failures) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = check();
  } catch (const std::exception& e) {
    outcome = {false, std::string("threw: ") + e.what()};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = seconds < limit_seconds;
  const bool pass = outcome.pass && in_time;
  failures += !pass;
  std::printf("%s criterion %d (%s): %s [%.1fs, limit %.0fs%s]\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), outcome.detail.c_str(), seconds, limit_seconds,
              in_time ? "" : ", too slow");
  std::fflush(stdout);
}

}  // namespace

int main() {
  int failures = 0;
  report(1, "round trip", 1, round_trip, failures);
  report(2, "conjugacy", 1, conjugacy, failures);
  report(3, "oracle equivalence", 300, oracle_equivalence, failures);
  report(4, "synthetic calibration", 300, synthetic_calibration, failures);
  report(5, "prior-ratio trend", 900, prior_ratio_trend, failures);
  report(6, "degenerate regimes", 120, degenerate_regimes, failures);
  report(
      7, "diagnostics", 1,
      [] {
        return Outcome{g_chain_sets > 0 && g_worst_rhat < 1.01,
                       "worst R-hat " + fmt(g_worst_rhat) + " over " +
                           std::to_string(g_chain_sets) + " chain sets from criteria 3-5"};
      },
      failures);
  std::printf(
      "SKIP criterion 8 (published-number reproduction): needs the released human annotation "
      "data, which is not available here\n");
  return failures == 0 ? 0 : 1;
}
