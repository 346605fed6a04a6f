#include "closmcast/bitvec.hpp"

#include <bit>
#include <stdexcept>

namespace closmcast {

namespace {

void check_index(uint32_t i, uint32_t width) {
  if (i >= width) {
    throw std::out_of_range("BitVec index " + std::to_string(i) + " out of range (width " +
                            std::to_string(width) + ")");
  }
}

}  // namespace

BitVec BitVec::from_string(std::string_view s) {
  BitVec v(static_cast<uint32_t>(s.size()));
  for (uint32_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      v.set(i);
    } else if (s[i] != '0') {
      throw std::invalid_argument("BitVec::from_string: invalid character");
    }
  }
  return v;
}

std::string BitVec::to_string() const {
  std::string s(width_, '0');
  for (uint32_t i = 0; i < width_; ++i) {
    if (test(i)) s[i] = '1';
  }
  return s;
}

bool BitVec::test(uint32_t i) const {
  check_index(i, width_);
  return (words_[i / 64] >> (i % 64)) & 1u;
}

void BitVec::set(uint32_t i, bool value) {
  check_index(i, width_);
  const uint64_t mask = 1ULL << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

uint32_t BitVec::popcount() const {
  uint32_t total = 0;
  for (uint64_t w : words_) total += static_cast<uint32_t>(std::popcount(w));
  return total;
}

bool BitVec::any() const {
  for (uint64_t w : words_) {
    if (w != 0) return true;
  }
  return false;
}

BitVec& BitVec::operator|=(const BitVec& other) {
  if (width_ != other.width_) {
    throw std::invalid_argument("BitVec::operator|=: width mismatch");
  }
  for (size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

bool BitVec::contains(const BitVec& other) const {
  if (width_ != other.width_) {
    throw std::invalid_argument("BitVec::contains: width mismatch");
  }
  for (size_t i = 0; i < words_.size(); ++i) {
    if ((other.words_[i] & ~words_[i]) != 0) return false;
  }
  return true;
}

void BitVec::append(const BitVec& other) {
  const uint32_t old_width = width_;
  width_ += other.width_;
  words_.resize((width_ + 63) / 64, 0);
  for (uint32_t i = 0; i < other.width_; ++i) {
    if (other.test(i)) set(old_width + i);
  }
}

BitVec BitVec::slice(uint32_t begin, uint32_t len) const {
  if (begin + len > width_) {
    throw std::out_of_range("BitVec::slice out of range");
  }
  BitVec v(len);
  for (uint32_t i = 0; i < len; ++i) {
    if (test(begin + i)) v.set(i);
  }
  return v;
}

void BitVec::for_each_set(const std::function<void(uint32_t)>& fn) const {
  for (size_t wi = 0; wi < words_.size(); ++wi) {
    uint64_t w = words_[wi];
    while (w != 0) {
      const int b = std::countr_zero(w);
      fn(static_cast<uint32_t>(wi * 64 + b));
      w &= w - 1;
    }
  }
}

uint32_t hamming(const BitVec& a, const BitVec& b) {
  if (a.width_ != b.width_) {
    throw std::invalid_argument("hamming: width mismatch");
  }
  uint32_t total = 0;
  for (size_t i = 0; i < a.words_.size(); ++i) {
    total += static_cast<uint32_t>(std::popcount(a.words_[i] ^ b.words_[i]));
  }
  return total;
}

}  // namespace closmcast
