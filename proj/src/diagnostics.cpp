#include "wrcal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace wrcal {
namespace {

using Chains = std::vector<std::vector<double>>;

Chains split_chains(std::span<const SampleBatch> chains) {
  Chains out;
  for (const auto& chain : chains) {
    const auto& v = chain.values;
    const std::size_t half = v.size() / 2;
    out.emplace_back(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(v.end() - static_cast<std::ptrdiff_t>(half), v.end());
  }
  return out;
}

// Normal scores of pooled fractional ranks, (r - 3/8) / (S + 1/4).
Chains rank_normalize(const Chains& chains) {
  struct Entry {
    double value;
    std::size_t chain;
    std::size_t index;
  };
  std::vector<Entry> pooled;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t i = 0; i < chains[c].size(); ++i) {
      pooled.push_back({chains[c][i], c, i});
    }
  }
  std::sort(pooled.begin(), pooled.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });

  const boost::math::normal standard;
  const double total = static_cast<double>(pooled.size());
  Chains out = chains;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].value == pooled[i].value) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average of tied ranks
    const double z = boost::math::quantile(standard, (rank - 0.375) / (total + 0.25));
    for (std::size_t k = i; k <= j; ++k) out[pooled[k].chain][pooled[k].index] = z;
    i = j + 1;
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double basic_rhat(const Chains& chains) {
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(mean_of(c));
    vars.push_back(variance_of(c));
  }
  const double within = mean_of(vars);
  const double between_over_n = variance_of(means);
  if (within == 0.0) {
    return between_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  const double var_hat = (n - 1.0) / n * within + between_over_n;
  return std::sqrt(var_hat / within);
}

Chains folded(const Chains& chains) {
  std::vector<double> all;
  for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
  const std::size_t mid = all.size() / 2;
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid), all.end());
  double median = all[mid];
  if (all.size() % 2 == 0) {
    const double below = *std::max_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + below);
  }
  Chains out = chains;
  for (auto& c : out) {
    for (double& x : c) x = std::abs(x - median);
  }
  return out;
}

double autocovariance(const std::vector<double>& chain, double mean, std::size_t lag) {
  const std::size_t n = chain.size();
  double sum = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) {
    sum += (chain[i] - mean) * (chain[i + lag] - mean);
  }
  return sum / static_cast<double>(n);
}

// Multi-chain ESS with Geyer's initial monotone sequence.
double effective_sample_size(const Chains& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const double total = static_cast<double>(m * n);

  std::vector<double> means(m);
  for (std::size_t c = 0; c < m; ++c) means[c] = mean_of(chains[c]);
  auto mean_acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += autocovariance(chains[c], means[c], lag);
    return s / static_cast<double>(m);
  };

  const double nd = static_cast<double>(n);
  const double mean_var = mean_acov(0) * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += variance_of(means);
  if (var_plus == 0.0) return total;

  const auto len = static_cast<long>(n);
  std::vector<double> rho(n + 2, 0.0);
  long t = 0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[0] = rho_even;
  rho[1] = rho_odd;
  // Geyer's initial positive sequence.
  while (t < len - 3 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(static_cast<std::size_t>(t + 2))) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(static_cast<std::size_t>(t + 3))) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[static_cast<std::size_t>(t + 2)] = rho_even;
      rho[static_cast<std::size_t>(t + 3)] = rho_odd;
    }
    t += 2;
  }
  const long max_t = std::max(t - 2, 0L);
  if (rho_even > 0.0) rho[static_cast<std::size_t>(max_t + 2)] = rho_even;

  // Geyer's initial monotone sequence.
  for (long s = 0; s <= max_t - 4; s += 2) {
    const auto i = static_cast<std::size_t>(s);
    if (rho[i + 2] + rho[i + 3] > rho[i] + rho[i + 1]) {
      rho[i + 2] = 0.5 * (rho[i] + rho[i + 1]);
      rho[i + 3] = rho[i + 2];
    }
  }

  double tau = -1.0;
  for (long s = 0; s <= max_t; ++s) tau += 2.0 * rho[static_cast<std::size_t>(s)];
  tau += rho[static_cast<std::size_t>(max_t + 1)];
  tau = std::max(tau, 1.0 / std::log10(total));
  return std::min(total / tau, total);
}

}  // namespace

ChainDiagnostics chain_diagnostics(std::span<const SampleBatch> chains) {
  if (chains.size() < 2) throw std::invalid_argument("need at least 2 chains");
  const std::size_t n = chains.front().values.size();
  for (const auto& c : chains) {
    if (c.values.size() < 10) throw std::invalid_argument("chains need at least 10 draws");
    if (c.values.size() != n) throw std::invalid_argument("chains differ in length");
  }

  ChainDiagnostics out;
  out.n_chains = chains.size();
  out.n_samples = n;

  const Chains split = split_chains(chains);
  bool constant = true;
  for (const auto& c : split) {
    for (double x : c) constant = constant && x == split.front().front();
  }
  if (constant) {
    out.ess = static_cast<double>(chains.size() * n);
    return out;
  }

  const Chains ranked = rank_normalize(split);
  out.rhat_classic = basic_rhat(split);
  out.rhat_bulk = basic_rhat(ranked);
  out.rhat_tail = basic_rhat(rank_normalize(folded(split)));
  out.rhat = std::max({out.rhat_classic, out.rhat_bulk, out.rhat_tail});
  out.ess = std::min(effective_sample_size(ranked),
                     static_cast<double>(chains.size() * n));
  return out;
}

}  // namespace wrcal
