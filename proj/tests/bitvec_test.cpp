#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "closmcast/bitvec.hpp"

using closmcast::BitVec;
using closmcast::hamming;

TEST_CASE("fresh vector is all zeros") {
  BitVec v(10);
  CHECK(v.width() == 10);
  CHECK(v.none());
  CHECK(v.popcount() == 0);
  for (uint32_t i = 0; i < 10; ++i) CHECK_FALSE(v.test(i));
}

TEST_CASE("string round trip keeps bit 0 leftmost") {
  const BitVec v = BitVec::from_string("10110");
  CHECK(v.width() == 5);
  CHECK(v.test(0));
  CHECK_FALSE(v.test(1));
  CHECK(v.test(2));
  CHECK(v.test(3));
  CHECK_FALSE(v.test(4));
  CHECK(v.to_string() == "10110");
  CHECK(v.popcount() == 3);
  CHECK(BitVec::from_string("").width() == 0);
}

TEST_CASE("from_string rejects anything but 0 and 1") {
  CHECK_THROWS_AS(BitVec::from_string("10x1"), std::invalid_argument);
  CHECK_THROWS_AS(BitVec::from_string(" 1"), std::invalid_argument);
}

TEST_CASE("set and test enforce the width") {
  BitVec v(4);
  v.set(3);
  CHECK(v.test(3));
  v.set(3, false);
  CHECK_FALSE(v.test(3));
  CHECK_THROWS_AS(v.set(4), std::out_of_range);
  CHECK_THROWS_AS(v.test(4), std::out_of_range);
  CHECK_THROWS_AS(BitVec(0).test(0), std::out_of_range);
}

TEST_CASE("or merges bits and insists on equal widths") {
  BitVec a = BitVec::from_string("1010");
  const BitVec b = BitVec::from_string("0110");
  CHECK((a | b).to_string() == "1110");
  a |= b;
  CHECK(a.to_string() == "1110");
  CHECK_THROWS_AS(a |= BitVec(3), std::invalid_argument);
}

TEST_CASE("contains is superset-of-set-bits") {
  const BitVec big = BitVec::from_string("1110");
  CHECK(big.contains(BitVec::from_string("0110")));
  CHECK(big.contains(big));
  CHECK(big.contains(BitVec(4)));
  CHECK_FALSE(big.contains(BitVec::from_string("0001")));
  CHECK_THROWS_AS(big.contains(BitVec(5)), std::invalid_argument);
}

TEST_CASE("append concatenates") {
  BitVec v = BitVec::from_string("101");
  v.append(BitVec::from_string("01"));
  CHECK(v.width() == 5);
  CHECK(v.to_string() == "10101");
  v.append(BitVec(0));
  CHECK(v.to_string() == "10101");
}

TEST_CASE("slice copies a window") {
  const BitVec v = BitVec::from_string("110010");
  CHECK(v.slice(1, 4).to_string() == "1001");
  CHECK(v.slice(0, 6).to_string() == "110010");
  CHECK(v.slice(6, 0).width() == 0);
  CHECK_THROWS_AS(v.slice(3, 4), std::out_of_range);
}

TEST_CASE("for_each_set visits set bits in ascending order") {
  const BitVec v = BitVec::from_string("0101001");
  std::vector<uint32_t> seen;
  v.for_each_set([&](uint32_t i) { seen.push_back(i); });
  CHECK(seen == std::vector<uint32_t>{1, 3, 6});
}

TEST_CASE("hamming counts differing positions") {
  CHECK(hamming(BitVec::from_string("1010"), BitVec::from_string("0110")) == 2);
  CHECK(hamming(BitVec(7), BitVec(7)) == 0);
  CHECK_THROWS_AS(hamming(BitVec(4), BitVec(5)), std::invalid_argument);
}

TEST_CASE("multi-word vectors behave at the 64-bit seams") {
  BitVec v(130);
  v.set(0);
  v.set(63);
  v.set(64);
  v.set(129);
  CHECK(v.popcount() == 4);
  CHECK(v.test(63));
  CHECK(v.test(64));
  CHECK(BitVec::from_string(v.to_string()) == v);
  CHECK(v.slice(60, 10).to_string() == "0001100000");

  std::vector<uint32_t> seen;
  v.for_each_set([&](uint32_t i) { seen.push_back(i); });
  CHECK(seen == std::vector<uint32_t>{0, 63, 64, 129});

  BitVec w(130);
  w.set(64);
  CHECK(hamming(v, w) == 3);
  CHECK(v.contains(w));
  CHECK_FALSE(w.contains(v));
}
