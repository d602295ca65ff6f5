#include "vrft/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "vrft/kernels.hpp"

namespace vrft {

namespace {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

BootstrapCi bootstrap_ci(
    std::size_t n,
    const std::function<double(std::span<const std::size_t>)>& statistic,
    int resamples, std::uint64_t seed, double level) {
  if (n == 0) throw std::invalid_argument("bootstrap over zero records");
  if (resamples < 1) throw std::invalid_argument("need at least one resample");
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  BootstrapCi ci;
  ci.point = statistic(indices);

  std::mt19937_64 rng(seed);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  std::vector<std::size_t> resample(n);
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      resample[i] = static_cast<std::size_t>(rng() % n);
    }
    stats[static_cast<std::size_t>(b)] = statistic(resample);
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  ci.lo = quantile_sorted(stats, alpha);
  ci.hi = quantile_sorted(stats, 1.0 - alpha);
  return ci;
}

BootstrapCi bootstrap_mean_ci(std::span<const double> values, int resamples,
                              std::uint64_t seed, double level) {
  std::vector<double> scratch(values.size());
  return bootstrap_ci(
      values.size(),
      [&](std::span<const std::size_t> idx) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
          scratch[i] = values[idx[i]];
        }
        return kernels::sum(scratch) / static_cast<double>(idx.size());
      },
      resamples, seed, level);
}

namespace {

struct SignedRanks {
  std::vector<double> ranks;  // average ranks of |d|, aligned with signs
  std::vector<int> signs;     // +1 / -1
  double w_plus = 0.0;
  double tie_correction = 0.0;  // sum of t^3 - t over tie groups
};

SignedRanks rank_differences(std::span<const double> a,
                             std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("wilcoxon: length mismatch");
  }
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.size() < 5) {
    throw std::invalid_argument(
        "wilcoxon: fewer than five non-zero differences");
  }
  std::vector<std::size_t> order(diffs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });

  SignedRanks out;
  out.ranks.resize(diffs.size());
  out.signs.resize(diffs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) {
      ++j;
    }
    const double average_rank =
        (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    const double group = static_cast<double>(j - i + 1);
    out.tie_correction += group * group * group - group;
    for (std::size_t k = i; k <= j; ++k) {
      out.ranks[order[k]] = average_rank;
      out.signs[order[k]] = diffs[order[k]] > 0.0 ? 1 : -1;
    }
    i = j + 1;
  }
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    if (out.signs[k] > 0) out.w_plus += out.ranks[k];
  }
  return out;
}

// Exact two-sided p by enumerating the 2^n sign assignments through a
// subset-sum table over doubled ranks (average ranks are half-integers).
double wilcoxon_exact_p(const SignedRanks& sr) {
  const std::size_t n = sr.ranks.size();
  std::vector<std::int64_t> doubled(n);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    doubled[i] = std::llround(2.0 * sr.ranks[i]);
    total += doubled[i];
  }
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
  counts[0] = 1;
  std::int64_t reached = 0;
  for (std::size_t i = 0; i < n; ++i) {
    reached += doubled[i];
    for (std::int64_t s = reached; s >= doubled[i]; --s) {
      counts[static_cast<std::size_t>(s)] +=
          counts[static_cast<std::size_t>(s - doubled[i])];
    }
  }
  const double mu = static_cast<double>(total) / 2.0;
  const double observed = 2.0 * sr.w_plus;
  const double deviation = std::abs(observed - mu);
  std::uint64_t extreme = 0;
  for (std::int64_t s = 0; s <= total; ++s) {
    if (std::abs(static_cast<double>(s) - mu) >= deviation - 1e-9) {
      extreme += counts[static_cast<std::size_t>(s)];
    }
  }
  const double p = static_cast<double>(extreme) /
                   std::pow(2.0, static_cast<double>(n));
  return std::min(1.0, p);
}

double wilcoxon_normal_p(const SignedRanks& sr) {
  const double n = static_cast<double>(sr.ranks.size());
  const double mu = n * (n + 1.0) / 4.0;
  const double variance =
      n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - sr.tie_correction / 48.0;
  if (variance <= 0.0) return 1.0;  // all differences tied at one value
  const double sigma = std::sqrt(variance);
  const double w_minus = n * (n + 1.0) / 2.0 - sr.w_plus;
  const double w = std::min(sr.w_plus, w_minus);
  // Continuity correction: W is discrete on a half-integer lattice.
  const double z = (w - mu + 0.5) / sigma;
  return std::min(1.0, 2.0 * normal_cdf(z));
}

}  // namespace

double wilcoxon_signed_rank(std::span<const double> a,
                            std::span<const double> b, WilcoxonMethod method) {
  const SignedRanks sr = rank_differences(a, b);
  const std::size_t n = sr.ranks.size();
  switch (method) {
    case WilcoxonMethod::Exact:
      if (n > 50) {
        throw std::invalid_argument("exact wilcoxon limited to n <= 50");
      }
      return wilcoxon_exact_p(sr);
    case WilcoxonMethod::Normal:
      return wilcoxon_normal_p(sr);
    case WilcoxonMethod::Auto:
    default:
      return n <= 25 ? wilcoxon_exact_p(sr) : wilcoxon_normal_p(sr);
  }
}

RankTable rank_models(
    const std::map<std::string, std::map<std::string, double>>& values_by_task,
    RankMode mode) {
  RankTable table;
  std::set<std::string> model_set;
  for (const auto& [task, values] : values_by_task) {
    for (const auto& [model, value] : values) model_set.insert(model);
  }
  table.models.assign(model_set.begin(), model_set.end());

  for (const auto& [task, values] : values_by_task) {
    const bool complete =
        std::all_of(table.models.begin(), table.models.end(),
                    [&](const std::string& m) { return values.count(m) > 0; });
    if (!complete) {
      table.skipped_tasks.push_back(task);
      continue;
    }
    table.tasks.push_back(task);
    std::vector<int> ranks(table.models.size(), 0);
    std::vector<double> metric(table.models.size());
    for (std::size_t m = 0; m < table.models.size(); ++m) {
      metric[m] = values.at(table.models[m]);
    }
    if (mode == RankMode::Competition) {
      for (std::size_t m = 0; m < metric.size(); ++m) {
        int better = 0;
        for (double other : metric) {
          if (other > metric[m]) ++better;
        }
        ranks[m] = better + 1;
      }
    } else {
      std::vector<double> distinct(metric);
      std::sort(distinct.begin(), distinct.end(), std::greater<>());
      distinct.erase(std::unique(distinct.begin(), distinct.end()),
                     distinct.end());
      for (std::size_t m = 0; m < metric.size(); ++m) {
        const auto it =
            std::find(distinct.begin(), distinct.end(), metric[m]);
        ranks[m] = static_cast<int>(it - distinct.begin()) + 1;
      }
    }
    table.ranks.push_back(std::move(ranks));
  }

  table.average_rank.assign(table.models.size(), 0.0);
  if (!table.tasks.empty()) {
    for (const std::vector<int>& ranks : table.ranks) {
      for (std::size_t m = 0; m < ranks.size(); ++m) {
        table.average_rank[m] += static_cast<double>(ranks[m]);
      }
    }
    for (double& avg : table.average_rank) {
      avg /= static_cast<double>(table.tasks.size());
    }
  }
  return table;
}

}  // namespace vrft
