#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace closmcast {

// Fixed-width bit vector. Bit 0 is the first (leftmost) character in the
// printed form, matching the port-bitmap convention used throughout: bit p
// corresponds to port/pod/leaf index p.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(uint32_t width) : width_(width), words_((width + 63) / 64, 0) {}

  static BitVec from_string(std::string_view s);
  std::string to_string() const;

  uint32_t width() const { return width_; }
  bool empty_width() const { return width_ == 0; }

  bool test(uint32_t i) const;
  void set(uint32_t i, bool value = true);

  uint32_t popcount() const;
  bool any() const;
  bool none() const { return !any(); }

  BitVec& operator|=(const BitVec& other);
  friend BitVec operator|(BitVec a, const BitVec& b) {
    a |= b;
    return a;
  }

  bool operator==(const BitVec& other) const {
    return width_ == other.width_ && words_ == other.words_;
  }
  bool operator!=(const BitVec& other) const { return !(*this == other); }

  // True iff every set bit of other is also set here.
  bool contains(const BitVec& other) const;

  // Concatenates other after this vector (widths add).
  void append(const BitVec& other);

  // Copies [begin, begin+len) into a fresh vector.
  BitVec slice(uint32_t begin, uint32_t len) const;

  void for_each_set(const std::function<void(uint32_t)>& fn) const;

  const std::vector<uint64_t>& words() const { return words_; }

 private:
  uint32_t width_ = 0;
  std::vector<uint64_t> words_;

  friend uint32_t hamming(const BitVec& a, const BitVec& b);
};

// Number of differing bit positions; throws std::invalid_argument on width
// mismatch.
uint32_t hamming(const BitVec& a, const BitVec& b);

}  // namespace closmcast
