#include "vrft/mask.hpp"

#include <stdexcept>
#include <string>

#include "vrft/kernels.hpp"

namespace vrft {

namespace {

constexpr std::uint64_t kAllOnes = ~std::uint64_t{0};

}  // namespace

BinaryMask::BinaryMask(int height, int width)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  const std::uint64_t bits =
      static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
  words_.assign((bits + 63) / 64, 0);
}

bool BinaryMask::test(int row, int col) const {
  const std::uint64_t bit =
      static_cast<std::uint64_t>(row) * width_ + static_cast<std::uint64_t>(col);
  return (words_[bit >> 6] >> (bit & 63)) & 1u;
}

void BinaryMask::set(int row, int col, bool value) {
  const std::uint64_t bit =
      static_cast<std::uint64_t>(row) * width_ + static_cast<std::uint64_t>(col);
  if (value) {
    words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  } else {
    words_[bit >> 6] &= ~(std::uint64_t{1} << (bit & 63));
  }
}

void BinaryMask::set_bit_run(std::uint64_t begin, std::uint64_t end) {
  if (begin >= end) return;
  std::uint64_t first_word = begin >> 6;
  const std::uint64_t last_word = (end - 1) >> 6;
  const std::uint64_t head_mask = kAllOnes << (begin & 63);
  const std::uint64_t tail_mask = kAllOnes >> (63 - ((end - 1) & 63));
  if (first_word == last_word) {
    words_[first_word] |= head_mask & tail_mask;
    return;
  }
  words_[first_word] |= head_mask;
  for (std::uint64_t w = first_word + 1; w < last_word; ++w) {
    words_[w] = kAllOnes;
  }
  words_[last_word] |= tail_mask;
}

void BinaryMask::set_row_run(int row, int col_begin, int col_end) {
  if (row < 0 || row >= height_) return;
  if (col_begin < 0) col_begin = 0;
  if (col_end > width_) col_end = width_;
  if (col_begin >= col_end) return;
  const std::uint64_t base = static_cast<std::uint64_t>(row) * width_;
  set_bit_run(base + col_begin, base + col_end);
}

std::uint64_t BinaryMask::count() const { return kernels::popcount(words_); }

std::uint64_t BinaryMask::intersection_count(const BinaryMask& other) const {
  if (!same_shape(other)) {
    throw std::invalid_argument("mask shape mismatch");
  }
  return kernels::and_popcount(words_, other.words_);
}

BinaryMask BinaryMask::from_rle(int height, int width,
                                std::span<const std::uint64_t> runs) {
  BinaryMask mask(height, width);
  const std::uint64_t total = mask.size();
  std::uint64_t pos = 0;
  bool value = false;  // first run counts clear cells
  for (std::uint64_t run : runs) {
    if (run > total - pos) {
      throw std::invalid_argument("rle runs exceed mask size");
    }
    if (value) {
      mask.set_bit_run(pos, pos + run);
    }
    pos += run;
    value = !value;
  }
  if (pos != total) {
    throw std::invalid_argument("rle runs sum to " + std::to_string(pos) +
                                ", expected " + std::to_string(total));
  }
  return mask;
}

std::vector<std::uint64_t> BinaryMask::to_rle() const {
  std::vector<std::uint64_t> runs;
  const std::uint64_t total = size();
  bool value = false;
  std::uint64_t run = 0;
  for (std::uint64_t bit = 0; bit < total; ++bit) {
    const bool cur = (words_[bit >> 6] >> (bit & 63)) & 1u;
    if (cur == value) {
      ++run;
    } else {
      runs.push_back(run);
      value = cur;
      run = 1;
    }
  }
  runs.push_back(run);
  return runs;
}

}  // namespace vrft
