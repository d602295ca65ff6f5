#ifndef VRFT_MASK_HPP_
#define VRFT_MASK_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace vrft {

// Row-major binary mask packed 64 cells per word. Bit index of cell (r, c)
// is r * width + c; bits past height * width stay zero so popcounts over the
// raw words are exact.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);  // all cells clear; dims must be positive

  // Run-length decode, row-major, runs alternating clear/set and starting
  // with the clear count (which may be zero). Throws std::invalid_argument
  // when the runs do not sum to height * width.
  static BinaryMask from_rle(int height, int width,
                             std::span<const std::uint64_t> runs);
  std::vector<std::uint64_t> to_rle() const;

  int height() const { return height_; }
  int width() const { return width_; }
  std::uint64_t size() const {
    return static_cast<std::uint64_t>(height_) * width_;
  }
  bool same_shape(const BinaryMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool test(int row, int col) const;
  void set(int row, int col, bool value = true);
  // Sets cells [col_begin, col_end) of one row.
  void set_row_run(int row, int col_begin, int col_end);

  std::uint64_t count() const;
  // Number of set cells shared with `other`; shapes must match.
  std::uint64_t intersection_count(const BinaryMask& other) const;

  std::span<const std::uint64_t> words() const { return words_; }

 private:
  void set_bit_run(std::uint64_t begin, std::uint64_t end);

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace vrft

#endif  // VRFT_MASK_HPP_
