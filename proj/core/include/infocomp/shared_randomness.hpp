#pragma once

// Deterministic shared randomness. Both endpoints derive the same
// infinite tape of (symbol, threshold) elements and the same hash-bit
// family from a single 128-bit seed, with no communication and no
// materialized prefix: every value is a keyed counter-mode PRF output.
//
// Derivation contract (stable; independent implementations must match
// it to interoperate over the wire):
//   block(seed, tag, a, b)  = mix64(mix64(seed.lo ^ GAMMA*tag) + a
//                                   ^ mix64(seed.hi + GAMMA*b + tag))
//     where mix64 is the splitmix64 finalizer and GAMMA = 0x9e3779b97f4a7c15.
//   tape x-lane:   block(seed, 1, i, 0), mapped to 0..|U|-1 by the
//                  widening-multiply reduction (x = hi64(u * |U|)).
//   tape p-lane:   block(seed, 2, i, 0) >> 11, scaled by 2^-53
//                  (a 53-bit dyadic rational, uniform on [0,1)).
//   hash words:    block(seed, 3, x, w) packs bits for j = 64w+1..64w+64;
//                  hash_bit(seed, j, x) is bit (j-1) mod 64 of word (j-1)/64.
//   substreams:    block(seed, 4, index, lane) derives child seeds
//                  (lane 0 -> hi, lane 1 -> lo); distinct tag spaces keep
//                  tape, hash, and substream domains disjoint.
// Not a cryptographic PRF; the protocols only need statistically
// uniform, replayable bits.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "infocomp/dist.hpp"

namespace infocomp {

/// 128-bit seed shared by both endpoints of a protocol run.
struct SharedSeed {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  bool operator==(const SharedSeed&) const = default;

  /// Parses exactly 32 hex characters. Throws std::invalid_argument otherwise.
  static SharedSeed from_hex(std::string_view hex);
  std::string to_hex() const;
};

/// One shared-tape element: a symbol index and a threshold in [0,1).
struct TapeElement {
  std::size_t x = 0;
  double p = 0.0;
};

namespace prf {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t v) {
  v ^= v >> 30;
  v *= 0xbf58476d1ce4e5b9ULL;
  v ^= v >> 27;
  v *= 0x94d049bb133111ebULL;
  v ^= v >> 31;
  return v;
}

inline std::uint64_t block(const SharedSeed& seed, std::uint64_t tag, std::uint64_t a,
                           std::uint64_t b) {
  const std::uint64_t k = mix64(seed.lo ^ (kGamma * tag));
  return mix64((k + a) ^ mix64(seed.hi + kGamma * b + tag));
}

inline constexpr std::uint64_t kTagTapeX = 1;
inline constexpr std::uint64_t kTagTapeP = 2;
inline constexpr std::uint64_t kTagHash = 3;
inline constexpr std::uint64_t kTagSubseed = 4;
inline constexpr std::uint64_t kTagStream = 5;

}  // namespace prf

/// Uniform symbol lane of tape element i (i >= 1).
inline std::size_t tape_symbol(const SharedSeed& seed, const Universe& u, std::uint64_t i) {
  const std::uint64_t r = prf::block(seed, prf::kTagTapeX, i, 0);
  return static_cast<std::size_t>((static_cast<unsigned __int128>(r) * u.size) >> 64);
}

/// Uniform threshold lane of tape element i: a 53-bit dyadic in [0,1).
inline double tape_threshold(const SharedSeed& seed, std::uint64_t i) {
  const std::uint64_t r = prf::block(seed, prf::kTagTapeP, i, 0);
  return static_cast<double>(r >> 11) * 0x1.0p-53;
}

/// Tape element a_i = (x_i, p_i), i >= 1. Lazily computable at any index.
inline TapeElement element_at(const SharedSeed& seed, const Universe& u, std::uint64_t i) {
  return TapeElement{tape_symbol(seed, u, i), tape_threshold(seed, i)};
}

/// 64 packed hash bits h_j(x) for j in [64w+1, 64w+64].
inline std::uint64_t hash_word(const SharedSeed& seed, std::size_t x, std::uint64_t w) {
  return prf::block(seed, prf::kTagHash, static_cast<std::uint64_t>(x), w);
}

/// h_j(x) for j >= 1: one bit, uniform over seeds, P[h_j(x)=h_j(y)] ~ 1/2.
inline int hash_bit(const SharedSeed& seed, std::uint64_t j, std::size_t x) {
  const std::uint64_t w = (j - 1) / 64;
  const std::uint64_t b = (j - 1) % 64;
  return static_cast<int>((hash_word(seed, x, w) >> b) & 1u);
}

/// Deterministic child seed; index spaces for distinct purposes must not
/// overlap (callers use disjoint index ranges per concern).
inline SharedSeed derive_subseed(const SharedSeed& seed, std::uint64_t index) {
  return SharedSeed{prf::block(seed, prf::kTagSubseed, index, 0),
                    prf::block(seed, prf::kTagSubseed, index, 1)};
}

/// Sequential deterministic value stream for harness-side sampling
/// (inputs, instance generation). Not part of the two-party protocols.
class DetStream {
 public:
  explicit DetStream(SharedSeed seed) : seed_(seed) {}

  std::uint64_t next_u64() { return prf::block(seed_, prf::kTagStream, counter_++, 0); }

  /// Uniform on [0,1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on {0,...,n-1}.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Samples a symbol from d by inverse-CDF scan.
  std::size_t sample(const Dist& d) {
    const double r = next_double();
    double acc = 0.0;
    for (std::size_t x = 0; x + 1 < d.size(); ++x) {
      acc += d(x);
      if (r < acc) return x;
    }
    return d.size() - 1;
  }

 private:
  SharedSeed seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace infocomp
