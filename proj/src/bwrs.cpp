#include "wrcal/bwrs.hpp"

#include <algorithm>
#include <cmath>

#include "wrcal/errors.hpp"
#include "wrcal/random.hpp"

namespace wrcal {

void ReferenceCounts::validate() const {
  if (evaluators.empty()) throw DataError("no evaluators in counts");
  for (const auto& e : evaluators) {
    if (e.s0 > n0 || e.s1 > n1 || e.sk > e.nk) {
      throw DataError("counts for evaluator '" + e.evaluator + "' exceed their totals");
    }
  }
}

void BWRSConfig::validate() const {
  if (samples_per_evaluator < 1) throw ConfigError("BWRS needs at least one sample per evaluator");
  if (!(degeneracy_guard > 0.0)) throw ConfigError("degeneracy guard must be positive");
  if (!(min_sign_confidence >= 0.5 && min_sign_confidence <= 1.0)) {
    throw ConfigError("sign confidence must lie in [0.5, 1]");
  }
  if (mode_grid < 2) throw ConfigError("mode grid needs at least 2 points");
}

ReferenceCounts collect_counts(const AnnotationMatrix& target,
                               const AnnotationMatrix& reference) {
  if (target.num_evaluators() != reference.num_evaluators()) {
    throw DataError("target and reference have different evaluator sets");
  }
  const auto human = reference.human_labels();

  ReferenceCounts counts;
  for (auto label : human) {
    if (label == PreferenceLabel::kA) {
      ++counts.n0;
    } else {
      ++counts.n1;
    }
  }
  for (std::size_t e = 0; e < target.num_evaluators(); ++e) {
    const auto& id = target.evaluators[e];
    const auto ref_index = reference.evaluator_index(id);
    if (!ref_index) {
      throw DataError("evaluator '" + id + "' is missing from the reference set");
    }
    EvaluatorCounts ec{id, 0, 0, target.num_tasks(), 0};
    for (std::size_t i = 0; i < reference.num_tasks(); ++i) {
      const auto vote = reference.tasks[i].eval_labels[*ref_index];
      if (vote == human[i]) {
        if (vote == PreferenceLabel::kA) {
          ++ec.s0;
        } else {
          ++ec.s1;
        }
      }
    }
    for (const auto& task : target.tasks) ec.sk += task.eval_labels[e] == PreferenceLabel::kA;
    counts.evaluators.push_back(std::move(ec));
  }
  return counts;
}

BWRSResult bwrs_run(const ReferenceCounts& counts, const BWRSConfig& config) {
  counts.validate();
  config.validate();

  const std::size_t n = config.samples_per_evaluator;
  const auto n0 = static_cast<double>(counts.n0);
  const auto n1 = static_cast<double>(counts.n1);

  BWRSResult result;
  auto& samples = result.estimate.samples;
  samples.seed = config.seed;
  samples.values.reserve(n * counts.evaluators.size());
  std::size_t rejected = 0;

  std::vector<double> draws;
  draws.reserve(n);
  for (std::size_t e = 0; e < counts.evaluators.size(); ++e) {
    const auto& ec = counts.evaluators[e];
    Rng rng(derive_seed(config.seed, e));
    const double s0 = static_cast<double>(ec.s0);
    const double s1 = static_cast<double>(ec.s1);
    const double sk = static_cast<double>(ec.sk);
    const double nk = static_cast<double>(ec.nk);

    draws.clear();
    std::size_t positive = 0;
    std::size_t negative = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double q0 = beta_draw(s0 + 1.0, n0 - s0 + 1.0, rng);
      const double q1 = beta_draw(s1 + 1.0, n1 - s1 + 1.0, rng);
      const double k = beta_draw(sk + 1.0, nk - sk + 1.0, rng);
      const double denominator = q0 + q1 - 1.0;
      if (std::abs(denominator) <= config.degeneracy_guard) {
        ++rejected;
        continue;
      }
      (denominator > 0.0 ? positive : negative) += 1;
      draws.push_back((k + q1 - 1.0) / denominator);
    }

    const std::size_t kept = positive + negative;
    const double agreement =
        kept == 0 ? 0.0
                  : static_cast<double>(std::max(positive, negative)) /
                        static_cast<double>(kept);
    if (kept == 0 || agreement < config.min_sign_confidence) {
      rejected += kept;
      result.dropped_evaluators.push_back(ec.evaluator);
      continue;
    }
    samples.values.insert(samples.values.end(), draws.begin(), draws.end());
  }

  const double attempts = static_cast<double>(n * counts.evaluators.size());
  result.estimate.rejected_fraction = static_cast<double>(rejected) / attempts;
  if (samples.values.empty()) {
    throw UnestimableError("every BWRS draw was rejected",
                           result.estimate.rejected_fraction);
  }

  std::size_t outside = 0;
  for (double v : samples.values) outside += v < 0.0 || v > 1.0;
  result.estimate.out_of_range_fraction =
      static_cast<double>(outside) / static_cast<double>(samples.values.size());

  double mean = kde_mean(samples.values);
  double mode = kde_mode(samples.values, config.mode_grid);
  if (config.clip_estimate) {
    mean = std::clamp(mean, 0.0, 1.0);
    mode = std::clamp(mode, 0.0, 1.0);
  }
  result.estimate.mean = mean;
  result.estimate.mode = mode;
  return result;
}

}  // namespace wrcal
