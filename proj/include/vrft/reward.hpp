#ifndef VRFT_REWARD_HPP_
#define VRFT_REWARD_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vrft/mask.hpp"
#include "vrft/metrics.hpp"
#include "vrft/response_parser.hpp"

namespace vrft {

struct RewardConfig {
  double lambda = 1.0;             // weight of the format reward
  double det_iou_threshold = 0.5;  // AP match threshold inside the reward
};

struct ClsLabel {
  char letter = '\0';
};
struct DetBoxes {
  std::vector<BoundingBox> boxes;
};
struct SegMask {
  BinaryMask mask;
};
struct ClosedAnswer {
  std::string value;  // option letter or canonical short answer
};
struct OpenAnswer {
  std::string reference;
};

using GroundTruth =
    std::variant<ClsLabel, DetBoxes, SegMask, ClosedAnswer, OpenAnswer>;

// Which task a ground-truth variant belongs to.
TaskKind ground_truth_task(const GroundTruth& gt);

struct RewardBreakdown {
  double r_task = 0.0;
  double r_format = 0.0;  // 0 or 1
  double lambda = 1.0;
  double total = 0.0;  // r_task + lambda * r_format, exact
};

struct ImageDims {
  int height = 0;
  int width = 0;
};

// Maps (image, box prompts) to a binary mask. Stands in for an off-the-shelf
// promptable segmentation model; implementations must return a mask of the
// image dimensions and be safe for concurrent calls.
class PromptableSegmenter {
 public:
  virtual ~PromptableSegmenter() = default;
  virtual BinaryMask segment(const ImageDims& image,
                             std::span<const BoundingBox> boxes) const = 0;
};

// Deterministic default: the union of the rasterized boxes, clipped to the
// image. A cell is set when its center lies inside any box. Zero boxes
// produce an all-clear mask.
class BoxFillSegmenter final : public PromptableSegmenter {
 public:
  BinaryMask segment(const ImageDims& image,
                     std::span<const BoundingBox> boxes) const override;
};

BinaryMask rasterize_boxes(const ImageDims& image,
                           std::span<const BoundingBox> boxes);

int format_reward(const ParsedResponse& parsed);

RewardBreakdown reward_classification(const ParsedResponse& parsed,
                                      const ClsLabel& gt,
                                      std::span<const Option> options,
                                      const RewardConfig& cfg);
RewardBreakdown reward_detection(const ParsedResponse& parsed,
                                 const DetBoxes& gt, const RewardConfig& cfg);
RewardBreakdown reward_segmentation(const ParsedResponse& parsed,
                                    const SegMask& gt,
                                    const PromptableSegmenter& segmenter,
                                    const ImageDims& image,
                                    const RewardConfig& cfg);
RewardBreakdown reward_vqa_closed(const ParsedResponse& parsed,
                                  const ClosedAnswer& gt,
                                  std::span<const Option> options,
                                  const RewardConfig& cfg);
RewardBreakdown reward_vqa_open(const ParsedResponse& parsed,
                                const OpenAnswer& gt, const RewardConfig& cfg);

// Optional context for score(): an explicit option set (otherwise letter
// extraction falls back to the full alphabet), a segmenter (otherwise the
// box-fill default), and image dimensions for segmentation (otherwise the
// ground-truth mask dimensions).
struct ScoreContext {
  std::vector<Option> options;
  const PromptableSegmenter* segmenter = nullptr;
  std::optional<ImageDims> image;
};

// Parses the raw response and dispatches to the task reward. Throws
// std::invalid_argument when the ground-truth variant does not match `task`
// or the image dimensions contradict the ground-truth mask.
RewardBreakdown score(TaskKind task, std::string_view raw_response,
                      const GroundTruth& gt, const RewardConfig& cfg = {},
                      const ScoreContext& ctx = {});

}  // namespace vrft

#endif  // VRFT_REWARD_HPP_
