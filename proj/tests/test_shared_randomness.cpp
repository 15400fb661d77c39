#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "infocomp/shared_randomness.hpp"

using namespace infocomp;

TEST_CASE("seed hex round trip") {
  const SharedSeed s = SharedSeed::from_hex("00112233445566778899aabbccddeeff");
  CHECK(s.hi == 0x0011223344556677ULL);
  CHECK(s.lo == 0x8899aabbccddeeffULL);
  CHECK(s.to_hex() == "00112233445566778899aabbccddeeff");
  CHECK_THROWS(SharedSeed::from_hex("123"));
  CHECK_THROWS(SharedSeed::from_hex("zz112233445566778899aabbccddeeff"));
}

TEST_CASE("tape elements are deterministic") {
  const SharedSeed s = SharedSeed::from_hex("0123456789abcdef0123456789abcdef");
  const Universe u{7};
  for (std::uint64_t i = 1; i <= 100; ++i) {
    const TapeElement a = element_at(s, u, i);
    const TapeElement b = element_at(s, u, i);
    CHECK(a.x == b.x);
    CHECK(a.p == b.p);
    CHECK(a.x < u.size);
    CHECK(a.p >= 0.0);
    CHECK(a.p < 1.0);
  }
}

TEST_CASE("tape symbols are uniform over the universe") {
  const SharedSeed s{42, 4242};
  const Universe u{4};
  std::vector<std::uint64_t> counts(u.size, 0);
  const std::uint64_t n = 100'000;
  for (std::uint64_t i = 1; i <= n; ++i) ++counts[tape_symbol(s, u, i)];
  for (std::uint64_t c : counts)
    CHECK(std::abs(double(c) / double(n) - 0.25) < 0.01);
}

TEST_CASE("tape thresholds are uniform on [0,1)") {
  const SharedSeed s{7, 77};
  const std::uint64_t n = 100'000;
  double sum = 0.0;
  std::uint64_t low = 0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double p = tape_threshold(s, i);
    sum += p;
    if (p < 0.5) ++low;
  }
  CHECK(std::abs(sum / double(n) - 0.5) < 0.005);
  CHECK(std::abs(double(low) / double(n) - 0.5) < 0.005);
}

TEST_CASE("distinct seeds diverge quickly") {
  const Universe u{16};
  const SharedSeed s1{1, 0}, s2{2, 0};
  bool differ = false;
  for (std::uint64_t i = 1; i <= 100 && !differ; ++i) {
    const TapeElement a = element_at(s1, u, i);
    const TapeElement b = element_at(s2, u, i);
    differ = a.x != b.x || a.p != b.p;
  }
  CHECK(differ);
}

TEST_CASE("hash bits are deterministic and split by index") {
  const SharedSeed s{11, 13};
  CHECK(hash_bit(s, 1, 0) == hash_bit(s, 1, 0));
  CHECK(hash_bit(s, 65, 3) == hash_bit(s, 65, 3));
  // Word packing boundary: bits 64 and 65 come from different words.
  int diff = 0;
  for (std::size_t x = 0; x < 64; ++x)
    if (hash_bit(s, 64, x) != hash_bit(s, 65, x)) ++diff;
  CHECK(diff > 0);
}

TEST_CASE("hash collision frequency is one half across seeds") {
  // P[h_j(x) = h_j(y)] for x != y, over 100k seeds.
  const std::uint64_t n = 100'000;
  std::uint64_t agree = 0;
  for (std::uint64_t seed = 0; seed < n; ++seed) {
    const SharedSeed s{seed, seed ^ 0x5ca1ab1e};
    if (hash_bit(s, 3, 5) == hash_bit(s, 3, 9)) ++agree;
  }
  const double rate = double(agree) / double(n);
  CHECK(rate >= 0.49);
  CHECK(rate <= 0.51);
}

TEST_CASE("distinct hash indices agree at chance level") {
  const std::uint64_t n = 100'000;
  std::uint64_t agree = 0;
  for (std::uint64_t seed = 0; seed < n; ++seed) {
    const SharedSeed s{seed * 2654435761ULL, seed};
    if (hash_bit(s, 2, 7) == hash_bit(s, 9, 7)) ++agree;
  }
  const double rate = double(agree) / double(n);
  CHECK(rate >= 0.49);
  CHECK(rate <= 0.51);
}

TEST_CASE("tape and hash domains are separated") {
  // Same indices through different tags never track each other.
  const std::uint64_t n = 10'000;
  std::uint64_t agree = 0;
  for (std::uint64_t seed = 0; seed < n; ++seed) {
    const SharedSeed s{seed, 1};
    const std::uint64_t tape_word = prf::block(s, prf::kTagTapeX, 5, 0);
    const std::uint64_t hash_word_v = prf::block(s, prf::kTagHash, 5, 0);
    if ((tape_word & 1) == (hash_word_v & 1)) ++agree;
  }
  const double rate = double(agree) / double(n);
  CHECK(rate > 0.45);
  CHECK(rate < 0.55);
}

TEST_CASE("subseed derivation changes the stream") {
  const SharedSeed s{99, 100};
  const SharedSeed c0 = derive_subseed(s, 0);
  const SharedSeed c1 = derive_subseed(s, 1);
  CHECK(c0 != c1);
  CHECK(c0 == derive_subseed(s, 0));
  CHECK(tape_symbol(c0, Universe{64}, 1) != tape_symbol(c1, Universe{64}, 1));
}

TEST_CASE("deterministic stream sampling matches distribution") {
  DetStream stream(SharedSeed{5, 55});
  const Dist d(Universe{3}, {0.5, 0.3, 0.2});
  std::vector<std::uint64_t> counts(3, 0);
  const std::uint64_t n = 100'000;
  for (std::uint64_t i = 0; i < n; ++i) ++counts[stream.sample(d)];
  CHECK(std::abs(double(counts[0]) / double(n) - 0.5) < 0.01);
  CHECK(std::abs(double(counts[1]) / double(n) - 0.3) < 0.01);
  CHECK(std::abs(double(counts[2]) / double(n) - 0.2) < 0.01);
}
