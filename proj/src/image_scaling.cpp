#include "vrft/image_scaling.hpp"

#include <cmath>
#include <stdexcept>

namespace vrft {

namespace {

using Wide = unsigned __int128;

// floor(sqrt(q)) with correction of the floating-point estimate.
std::int64_t isqrt(std::int64_t q) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(q)));
  while (r > 0 && static_cast<Wide>(r) * static_cast<Wide>(r) >
                      static_cast<Wide>(q)) {
    --r;
  }
  while (static_cast<Wide>(r + 1) * static_cast<Wide>(r + 1) <=
         static_cast<Wide>(q)) {
    ++r;
  }
  return r;
}

}  // namespace

std::int64_t token_count(std::int64_t height, std::int64_t width,
                         std::int64_t patch) {
  if (patch <= 0 || height <= 0 || width <= 0 || height % patch != 0 ||
      width % patch != 0) {
    throw std::invalid_argument("dimensions must be positive patch multiples");
  }
  return (height / patch) * (width / patch);
}

ResizePlan plan_resize(std::int64_t height, std::int64_t width,
                       std::int64_t max_tokens, std::int64_t patch) {
  if (height < 1 || width < 1 || max_tokens < 1 || patch < 1) {
    throw std::invalid_argument("plan_resize arguments must be positive");
  }
  // At scale 1 the floor is h/patch; below 1, k = floor(h*s/patch) is the
  // largest k with k^2 * w <= h * max_tokens (squaring removes the sqrt in
  // s, keeping everything in integers).
  const Wide area = static_cast<Wide>(height) * static_cast<Wide>(width);
  const Wide budget_area = static_cast<Wide>(max_tokens) *
                           static_cast<Wide>(patch) *
                           static_cast<Wide>(patch);
  std::int64_t rows;
  std::int64_t cols;
  if (area <= budget_area) {
    rows = height / patch;
    cols = width / patch;
  } else {
    rows = isqrt(static_cast<std::int64_t>(
        static_cast<Wide>(height) * static_cast<Wide>(max_tokens) /
        static_cast<Wide>(width)));
    cols = isqrt(static_cast<std::int64_t>(
        static_cast<Wide>(width) * static_cast<Wide>(max_tokens) /
        static_cast<Wide>(height)));
  }
  std::int64_t out_h = std::max<std::int64_t>(1, rows) * patch;
  std::int64_t out_w = std::max<std::int64_t>(1, cols) * patch;
  // The patch-floor bump for tiny inputs can overshoot the budget; trim the
  // larger dimension (height on ties) until the plan fits.
  while ((out_h / patch) * (out_w / patch) > max_tokens) {
    if (out_h >= out_w) {
      out_h -= patch;
    } else {
      out_w -= patch;
    }
  }
  ResizePlan plan;
  plan.input_height = height;
  plan.input_width = width;
  plan.output_height = out_h;
  plan.output_width = out_w;
  plan.patch = patch;
  plan.max_tokens = max_tokens;
  plan.tokens = token_count(out_h, out_w, patch);
  return plan;
}

}  // namespace vrft
