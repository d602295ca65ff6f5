// Independent brute-force oracles used only by tests. These must stay
// decoupled from the library's implementation paths: pixel counting instead
// of rectangle algebra, per-prefix rematching plus O(n^2) envelope scans
// instead of the incremental PR pass, map-of-token-vectors n-gram counting,
// explicit 2^n sign enumeration, and exhaustive resize search.

#ifndef VRFT_TESTS_ORACLES_HPP_
#define VRFT_TESTS_ORACLES_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vrft/mask.hpp"
#include "vrft/response_parser.hpp"

namespace vrft::oracles {

// IoU by counting unit cells on the integer grid; boxes must have integer
// coordinates.
double iou_rasterized(const BoundingBox& a, const BoundingBox& b);

// Dice by per-cell iteration.
double dice_pixels(const BinaryMask& x, const BinaryMask& y);

// AP by re-running greedy matching from scratch for every rank prefix and
// integrating the envelope with an O(n^2) scan.
double ap_exhaustive(std::span<const BoundingBox> preds,
                     std::span<const BoundingBox> gts, double iou_threshold);

// Envelope AP over an explicit TP/FP flag sequence (for pooled curves).
double ap_from_flags(const std::vector<bool>& is_tp, std::size_t num_gt);

struct BleuOracleResult {
  double p[4];
  double bp;
  double score;
};
BleuOracleResult bleu_counted(std::span<const std::string> candidate,
                              std::span<const std::string> reference);

// Group advantages in extended precision.
std::vector<double> advantages_arithmetic(std::span<const double> rewards,
                                          double std_floor);

// Exhaustive search over all patch-multiple pairs within the budget that fit
// under the isotropic scale, maximizing retained area (ties prefer the
// taller output, matching the planner's trim rule).
struct ResizeOracleResult {
  std::int64_t height = 0;
  std::int64_t width = 0;
};
ResizeOracleResult resize_exhaustive(std::int64_t h, std::int64_t w,
                                     std::int64_t max_tokens,
                                     std::int64_t patch);

// Two-sided signed-rank p by literal enumeration of all 2^n sign
// assignments (n <= 20).
double wilcoxon_enumerated(std::span<const double> a,
                           std::span<const double> b);

}  // namespace vrft::oracles

#endif  // VRFT_TESTS_ORACLES_HPP_
