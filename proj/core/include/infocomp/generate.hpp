#pragma once

// Deterministic instance generators. Every generator is a pure function
// of (parameters, seed). Random distributions keep a floor of
// min_weight/n on each outcome, so conditionals always exist and
// per-edge divergences stay within the slack of the per-round
// communication bounds.

#include <cstdint>

#include "infocomp/cpj.hpp"
#include "infocomp/dist.hpp"
#include "infocomp/protocol.hpp"
#include "infocomp/shared_randomness.hpp"

namespace infocomp {

inline constexpr double kDefaultMinWeight = 0.35;

/// Dirichlet-ish draw mixed toward uniform: each entry >= min_weight/n.
Dist random_dist(DetStream& stream, std::size_t n, double min_weight = kDefaultMinWeight);

/// Full-support random joint over x_size * y_size outcomes.
JointDist random_joint(DetStream& stream, std::size_t x_size, std::size_t y_size,
                       double min_weight = kDefaultMinWeight);

/// Prefix-free binary labels for n children ("0"/"1", {"0","10","11"}, ...).
std::vector<std::string> prefix_free_labels(std::size_t n);

/// P uniform on the first sp symbols, Q uniform on the first sq, over a
/// universe of the given size; D(P||Q) = log2(sq/sp) exactly.
struct UniformSubsetPair {
  Dist p;
  Dist q;
};
UniformSubsetPair gen_uniform_subset(std::size_t universe, std::size_t sq, std::size_t sp);

/// Uniform-depth random instance with alternating ownership and 0/1
/// leaf outputs.
CpjInstance gen_random_cpj(std::uint32_t depth, std::size_t branching, const SharedSeed& seed,
                           double min_weight = kDefaultMinWeight);

/// Random binary instance whose correct distribution gives one leaf
/// label at least `margin` of the mass (checked at generation).
CpjInstance gen_promise_cpj(std::uint32_t depth, double margin, const SharedSeed& seed);

/// Uniform-depth random protocol: binary rounds, alternating owners,
/// random per-input distributions, r_size public-randomness variants.
ProtocolTree gen_random_protocol(std::uint32_t depth, std::size_t x_size, std::size_t y_size,
                                 std::size_t r_size, const SharedSeed& seed,
                                 double min_weight = kDefaultMinWeight);

/// Fixed six-round reference protocol: four noisy input-revealing
/// rounds (about half a bit each) plus two constant rounds, inputs two
/// bits per side, uniform product prior. Internal information cost is
/// close to 2 bits while the communication is 6 bits.
struct ReferenceProtocol {
  ProtocolTree pi;
  JointDist mu;
};
ReferenceProtocol gen_reference_protocol();

/// Tiny two-round noisy-XOR protocol for exact product/extraction
/// checks: one bit revealed per side at flip probability 0.1, output
/// the XOR of the two sent bits.
struct TinyXorProtocol {
  ProtocolTree pi;
  JointDist mu;
  std::vector<std::vector<std::int64_t>> f;  // f(x, y) = x XOR y on first bits
};
TinyXorProtocol gen_tiny_xor_protocol();

}  // namespace infocomp
