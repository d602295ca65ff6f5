#ifndef VRFT_METRICS_HPP_
#define VRFT_METRICS_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrft/mask.hpp"
#include "vrft/response_parser.hpp"

namespace vrft {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

// Precision/recall after each rank prefix of a prediction list. Recall is
// non-decreasing along the points.
struct PrCurve {
  std::vector<PrPoint> points;
};

struct BleuBreakdown {
  std::array<double, 4> precisions{};  // modified n-gram precisions p1..p4
  double brevity_penalty = 1.0;
  double score = 0.0;
};

// Intersection-over-union of two valid boxes, with areas taken as real
// rectangle areas.
double iou(const BoundingBox& a, const BoundingBox& b);

// Per-prediction greedy matching in list order: each prediction claims the
// unmatched ground truth with the highest IoU when that IoU reaches the
// threshold (TP), otherwise it is a FP. Generative models emit no
// confidences, so emission order is the ranking.
struct DetectionMatch {
  std::vector<bool> is_tp;  // one flag per prediction, in rank order
  std::size_t num_gt = 0;
};
DetectionMatch match_detections(std::span<const BoundingBox> ranked_preds,
                                std::span<const BoundingBox> gts,
                                double iou_threshold);

PrCurve pr_curve(const DetectionMatch& match);
// Area under the all-point PR step curve with the right-to-left precision
// envelope. Requires num_gt > 0.
double ap_from_curve(const PrCurve& curve);

// Conventions for empty sets: no ground truths and no predictions scores
// 1.0; no ground truths with spurious predictions scores 0.0.
double average_precision(std::span<const BoundingBox> ranked_preds,
                         std::span<const BoundingBox> gts,
                         double iou_threshold);

// 2|X∩Y| / (|X|+|Y|); two empty masks score 1.0. Throws on shape mismatch.
double dice(const BinaryMask& x, const BinaryMask& y);

double accuracy(const ConfusionCounts& counts);
// Fraction of true entries; throws on an empty vector.
double accuracy(const std::vector<bool>& correct);

enum class F1Averaging { Macro, Weighted };

// Binary F1 = 2TP / (2TP + FP + FN); all-zero counts score 0.0.
double f1(const ConfusionCounts& counts);

// One-vs-rest F1 averaged over classes 0..num_classes-1. Predictions of -1
// mean "no prediction" and count against the ground-truth class. A class
// with neither support nor predictions contributes 0 to the macro mean.
double f1_multiclass(std::span<const int> gt, std::span<const int> pred,
                     int num_classes,
                     F1Averaging averaging = F1Averaging::Macro);

// BLEU tokenization: lowercase, detach punctuation into its own tokens,
// split on whitespace.
std::vector<std::string> bleu_tokenize(std::string_view text);

// Uniform weights 1/4, no smoothing: the score is 0 whenever any clipped
// n-gram precision is 0. BP = 1 if c > r else exp(1 - r/c).
BleuBreakdown bleu4(std::span<const std::string> candidate,
                    std::span<const std::string> reference);
BleuBreakdown bleu4(std::string_view candidate, std::string_view reference);

}  // namespace vrft

#endif  // VRFT_METRICS_HPP_
