#include "vrft/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace vrft {

namespace {

char upper(char c) {
  return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(),
                    [](char x, char y) { return upper(x) == upper(y); });
}

RewardBreakdown compose(double r_task, int r_format,
                        const RewardConfig& cfg) {
  RewardBreakdown out;
  out.r_task = r_task;
  out.r_format = static_cast<double>(r_format);
  out.lambda = cfg.lambda;
  out.total = out.r_task + out.lambda * out.r_format;
  return out;
}

std::string_view answer_of(const ParsedResponse& parsed) {
  return parsed.answer ? std::string_view(*parsed.answer)
                       : std::string_view{};
}

}  // namespace

TaskKind ground_truth_task(const GroundTruth& gt) {
  switch (gt.index()) {
    case 0: return TaskKind::Classification;
    case 1: return TaskKind::Detection;
    case 2: return TaskKind::Segmentation;
    case 3: return TaskKind::VqaClosed;
    default: return TaskKind::VqaOpen;
  }
}

BinaryMask rasterize_boxes(const ImageDims& image,
                           std::span<const BoundingBox> boxes) {
  BinaryMask mask(image.height, image.width);
  for (const BoundingBox& box : boxes) {
    // Cell (r, c) has center (c + 0.5, r + 0.5); half-open membership keeps
    // integer-coordinate boxes exactly their nominal area in cells.
    const int r0 = std::max(0, static_cast<int>(std::ceil(box.y_min - 0.5)));
    const int r1 = std::min(image.height,
                            static_cast<int>(std::ceil(box.y_max - 0.5)));
    const int c0 = std::max(0, static_cast<int>(std::ceil(box.x_min - 0.5)));
    const int c1 = std::min(image.width,
                            static_cast<int>(std::ceil(box.x_max - 0.5)));
    for (int r = r0; r < r1; ++r) {
      mask.set_row_run(r, c0, c1);
    }
  }
  return mask;
}

BinaryMask BoxFillSegmenter::segment(const ImageDims& image,
                                     std::span<const BoundingBox> boxes) const {
  return rasterize_boxes(image, boxes);
}

int format_reward(const ParsedResponse& parsed) {
  return parsed.format_ok ? 1 : 0;
}

RewardBreakdown reward_classification(const ParsedResponse& parsed,
                                      const ClsLabel& gt,
                                      std::span<const Option> options,
                                      const RewardConfig& cfg) {
  if (!options.empty()) {
    const bool gt_listed =
        std::any_of(options.begin(), options.end(),
                    [&](const Option& o) { return o.letter == gt.letter; });
    if (!gt_listed) {
      throw std::invalid_argument(
          "classification ground truth is not among the options");
    }
  }
  const std::optional<char> extracted =
      extract_option(answer_of(parsed), options);
  const double r_task = (extracted && *extracted == gt.letter) ? 1.0 : 0.0;
  return compose(r_task, format_reward(parsed), cfg);
}

RewardBreakdown reward_detection(const ParsedResponse& parsed,
                                 const DetBoxes& gt, const RewardConfig& cfg) {
  const std::vector<BoundingBox> preds = parse_boxes(answer_of(parsed));
  const double r_task =
      average_precision(preds, gt.boxes, cfg.det_iou_threshold);
  return compose(r_task, format_reward(parsed), cfg);
}

RewardBreakdown reward_segmentation(const ParsedResponse& parsed,
                                    const SegMask& gt,
                                    const PromptableSegmenter& segmenter,
                                    const ImageDims& image,
                                    const RewardConfig& cfg) {
  const std::vector<BoundingBox> boxes = parse_boxes(answer_of(parsed));
  const BinaryMask predicted = segmenter.segment(image, boxes);
  const double r_task = dice(predicted, gt.mask);
  return compose(r_task, format_reward(parsed), cfg);
}

RewardBreakdown reward_vqa_closed(const ParsedResponse& parsed,
                                  const ClosedAnswer& gt,
                                  std::span<const Option> options,
                                  const RewardConfig& cfg) {
  const std::string_view truth = trim(gt.value);
  double r_task = 0.0;
  if (truth.size() == 1 &&
      std::isalpha(static_cast<unsigned char>(truth[0]))) {
    const std::optional<char> extracted =
        extract_option(answer_of(parsed), options);
    r_task = (extracted && *extracted == upper(truth[0])) ? 1.0 : 0.0;
  } else {
    // Canonical-text answers (e.g. yes/no) compare directly.
    r_task = iequals(trim(answer_of(parsed)), truth) ? 1.0 : 0.0;
  }
  return compose(r_task, format_reward(parsed), cfg);
}

RewardBreakdown reward_vqa_open(const ParsedResponse& parsed,
                                const OpenAnswer& gt,
                                const RewardConfig& cfg) {
  const double r_task = bleu4(answer_of(parsed), gt.reference).score;
  return compose(r_task, format_reward(parsed), cfg);
}

RewardBreakdown score(TaskKind task, std::string_view raw_response,
                      const GroundTruth& gt, const RewardConfig& cfg,
                      const ScoreContext& ctx) {
  if (ground_truth_task(gt) != task) {
    throw std::invalid_argument("ground-truth variant does not match task");
  }
  const ParsedResponse parsed = parse_response(raw_response);
  static const BoxFillSegmenter default_segmenter;
  static const std::vector<Option> alphabet = alphabet_options();
  const std::span<const Option> options =
      ctx.options.empty() ? std::span<const Option>(alphabet)
                          : std::span<const Option>(ctx.options);
  switch (task) {
    case TaskKind::Classification:
      return reward_classification(parsed, std::get<ClsLabel>(gt), options,
                                   cfg);
    case TaskKind::Detection:
      return reward_detection(parsed, std::get<DetBoxes>(gt), cfg);
    case TaskKind::Segmentation: {
      const SegMask& mask_gt = std::get<SegMask>(gt);
      ImageDims dims{mask_gt.mask.height(), mask_gt.mask.width()};
      if (ctx.image) {
        if (ctx.image->height != dims.height ||
            ctx.image->width != dims.width) {
          throw std::invalid_argument(
              "image dimensions disagree with ground-truth mask");
        }
        dims = *ctx.image;
      }
      const PromptableSegmenter& segmenter =
          ctx.segmenter ? *ctx.segmenter : default_segmenter;
      return reward_segmentation(parsed, mask_gt, segmenter, dims, cfg);
    }
    case TaskKind::VqaClosed:
      return reward_vqa_closed(parsed, std::get<ClosedAnswer>(gt), options,
                               cfg);
    case TaskKind::VqaOpen:
      return reward_vqa_open(parsed, std::get<OpenAnswer>(gt), cfg);
  }
  throw std::invalid_argument("unknown task kind");
}

}  // namespace vrft
