#ifndef VRFT_IMAGE_SCALING_HPP_
#define VRFT_IMAGE_SCALING_HPP_

#include <cstdint>

namespace vrft {

// Patch-aligned resize plan under a visual-token budget. Output dimensions
// are multiples of the patch, at least one patch on each side, and the
// token count (output area / patch^2) never exceeds the budget.
struct ResizePlan {
  std::int64_t input_height = 0;
  std::int64_t input_width = 0;
  std::int64_t output_height = 0;
  std::int64_t output_width = 0;
  std::int64_t patch = 0;
  std::int64_t max_tokens = 0;
  std::int64_t tokens = 0;
};

inline constexpr std::int64_t kRoiTokenBudget = 256;
inline constexpr std::int64_t kWsiTokenBudget = 1024;
inline constexpr std::int64_t kDefaultPatch = 28;

// Isotropic scale s = min(1, sqrt(max_tokens * patch^2 / (h * w))), then
// floor each scaled dimension to a patch multiple (never below one patch);
// any residual budget overshoot is trimmed one patch at a time off the
// larger output dimension (ties trim height). Computed in exact integer
// arithmetic. Throws std::invalid_argument on non-positive inputs.
ResizePlan plan_resize(std::int64_t height, std::int64_t width,
                       std::int64_t max_tokens, std::int64_t patch);

// (h / patch) * (w / patch); throws unless both dimensions are positive
// patch multiples.
std::int64_t token_count(std::int64_t height, std::int64_t width,
                         std::int64_t patch);

}  // namespace vrft

#endif  // VRFT_IMAGE_SCALING_HPP_
