#include "vrft/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace vrft {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

DetectionMatch match_detections(std::span<const BoundingBox> ranked_preds,
                                std::span<const BoundingBox> gts,
                                double iou_threshold) {
  DetectionMatch match;
  match.num_gt = gts.size();
  match.is_tp.reserve(ranked_preds.size());
  std::vector<bool> claimed(gts.size(), false);
  for (const BoundingBox& pred : ranked_preds) {
    double best = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (claimed[j]) continue;
      const double overlap = iou(pred, gts[j]);
      if (overlap > best) {
        best = overlap;
        best_gt = j;
      }
    }
    if (best_gt < gts.size() && best >= iou_threshold) {
      claimed[best_gt] = true;
      match.is_tp.push_back(true);
    } else {
      match.is_tp.push_back(false);
    }
  }
  return match;
}

PrCurve pr_curve(const DetectionMatch& match) {
  PrCurve curve;
  curve.points.reserve(match.is_tp.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < match.is_tp.size(); ++k) {
    if (match.is_tp[k]) ++tp;
    curve.points.push_back(
        PrPoint{static_cast<double>(tp) / static_cast<double>(match.num_gt),
                static_cast<double>(tp) / static_cast<double>(k + 1)});
  }
  return curve;
}

double ap_from_curve(const PrCurve& curve) {
  double ap = 0.0;
  double envelope = 0.0;
  for (std::size_t k = curve.points.size(); k-- > 0;) {
    envelope = std::max(envelope, curve.points[k].precision);
    const double prev_recall = k > 0 ? curve.points[k - 1].recall : 0.0;
    ap += (curve.points[k].recall - prev_recall) * envelope;
  }
  return ap;
}

double average_precision(std::span<const BoundingBox> ranked_preds,
                         std::span<const BoundingBox> gts,
                         double iou_threshold) {
  if (gts.empty()) {
    return ranked_preds.empty() ? 1.0 : 0.0;
  }
  if (ranked_preds.empty()) return 0.0;
  return ap_from_curve(pr_curve(match_detections(ranked_preds, gts,
                                                 iou_threshold)));
}

double dice(const BinaryMask& x, const BinaryMask& y) {
  if (!x.same_shape(y)) {
    throw std::invalid_argument("dice: mask shape mismatch");
  }
  const std::uint64_t total = x.count() + y.count();
  if (total == 0) return 1.0;  // both empty
  return 2.0 * static_cast<double>(x.intersection_count(y)) /
         static_cast<double>(total);
}

double accuracy(const ConfusionCounts& counts) {
  const std::uint64_t n = counts.tp + counts.tn + counts.fp + counts.fn;
  if (n == 0) throw std::invalid_argument("accuracy: no samples");
  return static_cast<double>(counts.tp + counts.tn) / static_cast<double>(n);
}

double accuracy(const std::vector<bool>& correct) {
  if (correct.empty()) throw std::invalid_argument("accuracy: no samples");
  std::size_t hits = 0;
  for (bool c : correct) hits += c ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(correct.size());
}

double f1(const ConfusionCounts& counts) {
  const std::uint64_t denom = 2 * counts.tp + counts.fp + counts.fn;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double f1_multiclass(std::span<const int> gt, std::span<const int> pred,
                     int num_classes, F1Averaging averaging) {
  if (gt.size() != pred.size()) {
    throw std::invalid_argument("f1_multiclass: length mismatch");
  }
  if (num_classes <= 0) {
    throw std::invalid_argument("f1_multiclass: no classes");
  }
  double weighted_sum = 0.0;
  double weight_total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    ConfusionCounts counts;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const bool is_gt = gt[i] == c;
      const bool is_pred = pred[i] == c;
      if (is_gt && is_pred) ++counts.tp;
      else if (is_pred) ++counts.fp;
      else if (is_gt) ++counts.fn;
    }
    const double score = f1(counts);
    const double weight =
        averaging == F1Averaging::Macro
            ? 1.0
            : static_cast<double>(counts.tp + counts.fn);  // class support
    weighted_sum += weight * score;
    weight_total += weight;
  }
  if (weight_total == 0.0) return 0.0;
  return weighted_sum / weight_total;
}

std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, raw);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

namespace {

// N-grams keyed by joining tokens with an unlikely separator byte.
std::unordered_map<std::string, int> ngram_counts(
    std::span<const std::string> tokens, std::size_t n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t j = 0; j < n; ++j) {
      if (j > 0) key.push_back('\x1f');
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

BleuBreakdown bleu4(std::span<const std::string> candidate,
                    std::span<const std::string> reference) {
  BleuBreakdown out;
  const std::size_t c = candidate.size();
  const std::size_t r = reference.size();
  if (c == 0) {
    out.brevity_penalty = 1.0;  // neutral; the zero precisions zero the score
    out.score = 0.0;
    return out;
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    const std::size_t total = c >= n ? c - n + 1 : 0;
    if (total == 0) {
      out.precisions[n - 1] = 0.0;
      continue;
    }
    const auto cand_counts = ngram_counts(candidate, n);
    const auto ref_counts = ngram_counts(reference, n);
    std::int64_t clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) {
        clipped += std::min(count, it->second);
      }
    }
    out.precisions[n - 1] =
        static_cast<double>(clipped) / static_cast<double>(total);
  }
  out.brevity_penalty =
      c > r ? 1.0
            : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  bool all_positive = true;
  double log_sum = 0.0;
  for (double p : out.precisions) {
    if (p <= 0.0) {
      all_positive = false;
      break;
    }
    log_sum += 0.25 * std::log(p);
  }
  out.score = all_positive ? out.brevity_penalty * std::exp(log_sum) : 0.0;
  return out;
}

BleuBreakdown bleu4(std::string_view candidate, std::string_view reference) {
  const std::vector<std::string> cand = bleu_tokenize(candidate);
  const std::vector<std::string> ref = bleu_tokenize(reference);
  return bleu4(std::span<const std::string>(cand),
               std::span<const std::string>(ref));
}

}  // namespace vrft
