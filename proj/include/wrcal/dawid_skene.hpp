#pragma once

// Two-class Bayesian Dawid-Skene model:
//
//   p ~ Beta(alpha_p, beta_p)
//   q0_e ~ Beta(alpha_q0, beta_q0),  q1_e ~ Beta(alpha_q1, beta_q1)
//   w_i ~ Bernoulli(p)                      w_i = 1 <=> human prefers A
//   t_ie | w_i = 1 ~ Bernoulli(q0_e)        t_ie = 1 <=> evaluator e votes A
//   t_ie | w_i = 0 ~ Bernoulli(1 - q1_e)
//
// Every conditional is conjugate, so the posterior is sampled with an exact
// systematic-scan Gibbs sampler. Observed human labels pin their w_i.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wrcal/beta.hpp"
#include "wrcal/core.hpp"
#include "wrcal/estimate.hpp"
#include "wrcal/kde.hpp"

namespace wrcal {

struct AccuracyPriors {
  BetaParams q0;
  BetaParams q1;
};

struct DSPriors {
  BetaParams p_prior;
  std::vector<AccuracyPriors> evaluators;  // aligned with the matrix evaluators

  void validate() const;
};

// Human-labeled judgment counts on a reference set, for one evaluator.
struct OodCounts {
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::size_t s0 = 0;
  std::size_t s1 = 0;
};

// Beta(1, 1) prevalence with Beta(2, 1) accuracies, leaning towards
// better-than-chance evaluators.
DSPriors build_no_prior(std::span<const std::string> evaluators);

// Accuracy priors from reference counts, rescaled so alpha + beta = 2:
// Beta((2 s + 2) / (n + 2), (2 n - 2 s + 2) / (n + 2)).
DSPriors build_ood_prior(std::span<const OodCounts> counts);

struct GibbsConfig {
  std::size_t n_chains = 4;
  std::size_t tune = 10000;  // discarded burn-in scans
  std::size_t keep = 10000;  // retained draws per chain
  std::size_t thin = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

using ObservedLabels = std::map<std::string, PreferenceLabel>;

struct LatentState {
  std::vector<std::uint8_t> w;  // 1 <=> label kA
  double p = 0.5;
  std::vector<AccuracyPair> accuracies;
};

// One Gibbs chain. Exposed step by step so the conditionals can be tested.
class GibbsChain {
 public:
  GibbsChain(const AnnotationMatrix& matrix, const DSPriors& priors,
             const ObservedLabels& observed, std::uint64_t seed);

  // (a) resample every unpinned w_i.
  void sweep_labels();
  // (b) resample p.
  void sweep_prevalence();
  // (c), (d) resample each evaluator's (q0, q1).
  void sweep_accuracies();
  void scan() {
    sweep_labels();
    sweep_prevalence();
    sweep_accuracies();
  }

  // Overrides the continuous parameters, e.g. to hold them fixed.
  void set_parameters(double p, std::vector<AccuracyPair> accuracies);

  // P(w_i = 1 | p, q, votes of task i).
  double win_probability(std::size_t task) const;
  BetaParams prevalence_conditional() const;
  std::vector<std::pair<BetaParams, BetaParams>> accuracy_conditionals() const;

  bool pinned(std::size_t task) const { return pinned_[task] != 0; }
  const LatentState& state() const { return state_; }

 private:
  double pattern_log_odds(std::size_t pattern) const;
  void recount();

  DSPriors priors_;
  std::size_t num_evaluators_;
  // Distinct vote patterns, num_patterns x num_evaluators, 1 <=> voted A.
  std::vector<std::uint8_t> patterns_;
  std::vector<std::size_t> task_pattern_;
  std::vector<std::uint8_t> pinned_;
  // Per pattern: tasks carrying it, and how many of them have w = 1.
  std::vector<std::size_t> pattern_total_;
  std::vector<std::size_t> pattern_wins_;
  std::vector<double> pattern_prob_;
  LatentState state_;
  Rng rng_;
};

// Posterior draws of p, one batch per chain. Chains run concurrently with
// seeds derived from config.seed.
std::vector<SampleBatch> gibbs_run(const AnnotationMatrix& matrix,
                                   const DSPriors& priors,
                                   const ObservedLabels& observed,
                                   const GibbsConfig& config);

inline constexpr std::size_t kMaxEnumerationTasks = 12;

// Exact posterior mean of p by enumerating every unpinned label
// configuration and integrating p and the accuracies analytically.
double brute_force_posterior(const AnnotationMatrix& matrix,
                             const DSPriors& priors,
                             const ObservedLabels& observed = {});

// Pools chains into mean/mode point estimates; attaches convergence
// diagnostics when at least two chains are given.
WinRateEstimate posterior_summary(std::span<const SampleBatch> chains,
                                  std::size_t mode_grid = kDefaultModeGrid);

}  // namespace wrcal
