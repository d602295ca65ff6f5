#ifndef VRFT_STATS_HPP_
#define VRFT_STATS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vrft {

struct BootstrapCi {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap over record-level resampling. `statistic` receives a
// multiset of record indices (the original 0..n-1 for the point estimate,
// then B resamples drawn with replacement). Quantiles use linear
// interpolation between order statistics. Deterministic under `seed`.
BootstrapCi bootstrap_ci(
    std::size_t n,
    const std::function<double(std::span<const std::size_t>)>& statistic,
    int resamples, std::uint64_t seed, double level = 0.95);

// Convenience wrapper: bootstrap CI of the mean of `values`.
BootstrapCi bootstrap_mean_ci(std::span<const double> values, int resamples,
                              std::uint64_t seed, double level = 0.95);

enum class WilcoxonMethod {
  Auto,    // exact for n <= 25, normal approximation beyond
  Exact,   // sign-flip distribution by subset-sum counting (n <= 50)
  Normal,  // approximation with tie and continuity corrections
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; tied absolute differences receive average ranks. Throws
// std::invalid_argument when fewer than five non-zero pairs remain.
double wilcoxon_signed_rank(std::span<const double> a,
                            std::span<const double> b,
                            WilcoxonMethod method = WilcoxonMethod::Auto);

enum class RankMode {
  Competition,  // ties share the best rank; the next value skips (1,2,2,4)
  Dense,        // ties share the rank; the next value follows (1,2,2,3)
};

struct RankTable {
  std::vector<std::string> models;
  std::vector<std::string> tasks;              // ranked tasks, sorted
  std::vector<std::vector<int>> ranks;         // [task][model]
  std::vector<double> average_rank;            // per model over ranked tasks
  std::vector<std::string> skipped_tasks;      // missing some model's value
};

// Ranks models within each task (higher metric = better = rank closer to 1).
// Tasks lacking a value for any model are skipped, never imputed.
RankTable rank_models(
    const std::map<std::string, std::map<std::string, double>>& values_by_task,
    RankMode mode = RankMode::Competition);

}  // namespace vrft

#endif  // VRFT_STATS_HPP_
