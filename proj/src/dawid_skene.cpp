#include "wrcal/dawid_skene.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "wrcal/diagnostics.hpp"
#include "wrcal/errors.hpp"
#include "wrcal/random.hpp"

namespace wrcal {
namespace {

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

std::vector<std::uint8_t> pin_mask(const AnnotationMatrix& matrix,
                                   const ObservedLabels& observed,
                                   std::vector<std::uint8_t>& w) {
  std::vector<std::uint8_t> pinned(matrix.num_tasks(), 0);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < matrix.num_tasks(); ++i) {
    const auto it = observed.find(matrix.tasks[i].task_id);
    if (it == observed.end()) continue;
    pinned[i] = 1;
    w[i] = it->second == PreferenceLabel::kA ? 1 : 0;
    ++matched;
  }
  if (matched != observed.size()) {
    throw DataError("observed labels reference tasks outside the matrix");
  }
  return pinned;
}

}  // namespace

void DSPriors::validate() const {
  p_prior.validate();
  for (const auto& e : evaluators) {
    e.q0.validate();
    e.q1.validate();
  }
}

DSPriors build_no_prior(std::span<const std::string> evaluators) {
  if (evaluators.empty()) throw ConfigError("no evaluators");
  DSPriors priors;
  priors.p_prior = {1.0, 1.0};
  priors.evaluators.assign(evaluators.size(), AccuracyPriors{{2.0, 1.0}, {2.0, 1.0}});
  return priors;
}

DSPriors build_ood_prior(std::span<const OodCounts> counts) {
  if (counts.empty()) throw ConfigError("no evaluators");
  auto normalized = [](std::size_t s, std::size_t n) {
    const double sd = static_cast<double>(s);
    const double nd = static_cast<double>(n);
    // beta = (2n - 2s + 2) / (n + 2) written as 2 - alpha, which keeps
    // alpha + beta == 2 exact in floating point.
    const double alpha = (2.0 * sd + 2.0) / (nd + 2.0);
    return BetaParams{alpha, 2.0 - alpha};
  };
  DSPriors priors;
  priors.p_prior = {1.0, 1.0};
  for (const auto& c : counts) {
    if (c.n0 < 1 || c.n1 < 1) {
      throw DataError("OOD reference needs both human label classes");
    }
    if (c.s0 > c.n0 || c.s1 > c.n1) throw DataError("OOD counts exceed their totals");
    priors.evaluators.push_back({normalized(c.s0, c.n0), normalized(c.s1, c.n1)});
  }
  return priors;
}

void GibbsConfig::validate() const {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  if (keep < 1) throw ConfigError("need at least one retained draw");
  if (thin < 1) throw ConfigError("thinning must be at least 1");
}

GibbsChain::GibbsChain(const AnnotationMatrix& matrix, const DSPriors& priors,
                       const ObservedLabels& observed, std::uint64_t seed)
    : priors_(priors), num_evaluators_(matrix.num_evaluators()), rng_(seed) {
  matrix.validate(/*allow_empty=*/true);
  priors_.validate();
  if (priors_.evaluators.size() != num_evaluators_) {
    throw ConfigError("prior count does not match the evaluator count");
  }

  const std::size_t n = matrix.num_tasks();
  state_.w.assign(n, 0);
  task_pattern_.resize(n);
  std::map<std::vector<std::uint8_t>, std::size_t> index;
  std::vector<std::uint8_t> votes(num_evaluators_);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t for_a = 0;
    for (std::size_t e = 0; e < num_evaluators_; ++e) {
      votes[e] = matrix.tasks[i].eval_labels[e] == PreferenceLabel::kA ? 1 : 0;
      for_a += votes[e];
    }
    // Majority vote start, ties to A.
    state_.w[i] = 2 * for_a >= num_evaluators_ ? 1 : 0;
    auto [it, inserted] = index.try_emplace(votes, index.size());
    if (inserted) patterns_.insert(patterns_.end(), votes.begin(), votes.end());
    task_pattern_[i] = it->second;
  }
  pinned_ = pin_mask(matrix, observed, state_.w);

  pattern_total_.assign(index.size(), 0);
  pattern_wins_.assign(index.size(), 0);
  pattern_prob_.assign(index.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) ++pattern_total_[task_pattern_[i]];
  recount();

  state_.p = priors_.p_prior.mean();
  for (const auto& e : priors_.evaluators) {
    state_.accuracies.push_back({e.q0.mean(), e.q1.mean()});
  }
}

void GibbsChain::recount() {
  std::fill(pattern_wins_.begin(), pattern_wins_.end(), 0);
  for (std::size_t i = 0; i < state_.w.size(); ++i) {
    pattern_wins_[task_pattern_[i]] += state_.w[i];
  }
}

double GibbsChain::pattern_log_odds(std::size_t pattern) const {
  double log_odds = std::log(state_.p) - std::log1p(-state_.p);
  const std::uint8_t* votes = &patterns_[pattern * num_evaluators_];
  for (std::size_t e = 0; e < num_evaluators_; ++e) {
    const auto [q0, q1] = state_.accuracies[e];
    if (votes[e]) {
      log_odds += std::log(q0) - std::log1p(-q1);
    } else {
      log_odds += std::log1p(-q0) - std::log(q1);
    }
  }
  return log_odds;
}

double GibbsChain::win_probability(std::size_t task) const {
  return 1.0 / (1.0 + std::exp(-pattern_log_odds(task_pattern_[task])));
}

void GibbsChain::sweep_labels() {
  for (std::size_t k = 0; k < pattern_prob_.size(); ++k) {
    pattern_prob_[k] = 1.0 / (1.0 + std::exp(-pattern_log_odds(k)));
  }
  for (std::size_t i = 0; i < state_.w.size(); ++i) {
    if (pinned_[i]) continue;
    state_.w[i] = uniform_open(rng_) < pattern_prob_[task_pattern_[i]] ? 1 : 0;
  }
  recount();
}

BetaParams GibbsChain::prevalence_conditional() const {
  std::size_t wins = 0;
  for (auto v : pattern_wins_) wins += v;
  return beta_posterior(wins, state_.w.size(), priors_.p_prior);
}

std::vector<std::pair<BetaParams, BetaParams>> GibbsChain::accuracy_conditionals() const {
  std::vector<std::pair<BetaParams, BetaParams>> out;
  out.reserve(num_evaluators_);
  for (std::size_t e = 0; e < num_evaluators_; ++e) {
    // Among w = 1 tasks: correct means voted A. Among w = 0: voted B.
    std::size_t a_tasks = 0, a_correct = 0, b_tasks = 0, b_correct = 0;
    for (std::size_t k = 0; k < pattern_total_.size(); ++k) {
      const std::size_t wins = pattern_wins_[k];
      const std::size_t losses = pattern_total_[k] - wins;
      const bool voted_a = patterns_[k * num_evaluators_ + e] != 0;
      a_tasks += wins;
      b_tasks += losses;
      if (voted_a) {
        a_correct += wins;
      } else {
        b_correct += losses;
      }
    }
    out.emplace_back(beta_posterior(a_correct, a_tasks, priors_.evaluators[e].q0),
                     beta_posterior(b_correct, b_tasks, priors_.evaluators[e].q1));
  }
  return out;
}

void GibbsChain::sweep_prevalence() {
  const auto posterior = prevalence_conditional();
  state_.p = beta_draw(posterior.alpha, posterior.beta, rng_);
}

void GibbsChain::sweep_accuracies() {
  const auto conditionals = accuracy_conditionals();
  for (std::size_t e = 0; e < num_evaluators_; ++e) {
    const auto& [q0, q1] = conditionals[e];
    state_.accuracies[e].q0 = beta_draw(q0.alpha, q0.beta, rng_);
    state_.accuracies[e].q1 = beta_draw(q1.alpha, q1.beta, rng_);
  }
}

void GibbsChain::set_parameters(double p, std::vector<AccuracyPair> accuracies) {
  if (accuracies.size() != num_evaluators_) {
    throw std::invalid_argument("accuracy count does not match the evaluator count");
  }
  state_.p = p;
  state_.accuracies = std::move(accuracies);
}

std::vector<SampleBatch> gibbs_run(const AnnotationMatrix& matrix,
                                   const DSPriors& priors,
                                   const ObservedLabels& observed,
                                   const GibbsConfig& config) {
  config.validate();
  std::vector<SampleBatch> chains(config.n_chains);
  std::vector<std::exception_ptr> failures(config.n_chains);
  {
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < config.n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          const auto seed = derive_seed(config.seed, c);
          GibbsChain chain(matrix, priors, observed, seed);
          for (std::size_t s = 0; s < config.tune; ++s) chain.scan();
          auto& batch = chains[c];
          batch.seed = seed;
          batch.values.reserve(config.keep);
          for (std::size_t s = 0; s < config.keep; ++s) {
            for (std::size_t t = 0; t < config.thin; ++t) chain.scan();
            batch.values.push_back(chain.state().p);
          }
        } catch (...) {
          failures[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return chains;
}

double brute_force_posterior(const AnnotationMatrix& matrix,
                             const DSPriors& priors,
                             const ObservedLabels& observed) {
  if (matrix.num_tasks() > kMaxEnumerationTasks) {
    throw std::invalid_argument("too many tasks to enumerate");
  }
  priors.validate();
  const std::size_t n = matrix.num_tasks();
  const std::size_t num_eval = matrix.num_evaluators();
  if (priors.evaluators.size() != num_eval) {
    throw ConfigError("prior count does not match the evaluator count");
  }
  const auto [ap, bp] = priors.p_prior;
  if (n == 0) return ap / (ap + bp);

  std::vector<std::uint8_t> w(n, 0);
  const auto pinned = pin_mask(matrix, observed, w);
  std::vector<std::size_t> free_tasks;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pinned[i]) free_tasks.push_back(i);
  }

  double log_norm = -std::numeric_limits<double>::infinity();
  double log_weighted = -std::numeric_limits<double>::infinity();
  auto log_add = [](double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    const double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  };

  const std::size_t configurations = std::size_t{1} << free_tasks.size();
  for (std::size_t mask = 0; mask < configurations; ++mask) {
    for (std::size_t j = 0; j < free_tasks.size(); ++j) {
      w[free_tasks[j]] = (mask >> j) & 1U;
    }
    std::size_t wins = 0;
    for (auto v : w) wins += v;
    const double wd = static_cast<double>(wins);
    const double nd = static_cast<double>(n);
    double log_marginal = log_beta_fn(ap + wd, bp + nd - wd) - log_beta_fn(ap, bp);
    for (std::size_t e = 0; e < num_eval; ++e) {
      double a = 0, b = 0, c = 0, d = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool voted_a = matrix.tasks[i].eval_labels[e] == PreferenceLabel::kA;
        if (w[i]) {
          (voted_a ? a : b) += 1.0;
        } else {
          (voted_a ? d : c) += 1.0;
        }
      }
      const auto& pe = priors.evaluators[e];
      log_marginal += log_beta_fn(pe.q0.alpha + a, pe.q0.beta + b) -
                      log_beta_fn(pe.q0.alpha, pe.q0.beta);
      log_marginal += log_beta_fn(pe.q1.alpha + c, pe.q1.beta + d) -
                      log_beta_fn(pe.q1.alpha, pe.q1.beta);
    }
    log_norm = log_add(log_norm, log_marginal);
    log_weighted = log_add(log_weighted, log_marginal + std::log((ap + wd) / (ap + bp + nd)));
  }
  return std::exp(log_weighted - log_norm);
}

WinRateEstimate posterior_summary(std::span<const SampleBatch> chains,
                                  std::size_t mode_grid) {
  if (chains.empty()) throw std::invalid_argument("no chains");
  WinRateEstimate out;
  out.samples.seed = chains.front().seed;
  for (const auto& c : chains) {
    out.samples.values.insert(out.samples.values.end(), c.values.begin(), c.values.end());
  }
  if (out.samples.values.empty()) throw std::invalid_argument("no samples");
  out.mean = kde_mean(out.samples.values);
  out.mode = kde_mode(out.samples.values, mode_grid);
  std::size_t outside = 0;
  for (double v : out.samples.values) outside += v < 0.0 || v > 1.0;
  out.out_of_range_fraction =
      static_cast<double>(outside) / static_cast<double>(out.samples.values.size());

  bool diagnosable = chains.size() >= 2;
  for (const auto& c : chains) {
    diagnosable = diagnosable && c.values.size() >= 10 &&
                  c.values.size() == chains.front().values.size();
  }
  if (diagnosable) out.diagnostics = chain_diagnostics(chains);
  return out;
}

}  // namespace wrcal
