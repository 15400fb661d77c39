#pragma once

// Exact information measures over finite distributions, all in bits
// (base-2 logs throughout). Divergence against a zero of the second
// argument yields the distinguished infinite value rather than an
// exception, so callers can branch on representability.

#include <limits>

#include "infocomp/dist.hpp"

namespace infocomp {

inline constexpr double kInfiniteBits = std::numeric_limits<double>::infinity();

/// H(X) = sum_x p(x) log2(1/p(x)); zero-probability terms contribute 0.
double entropy(const Dist& d);

/// D(P||Q) = sum_x p(x) log2(p(x)/q(x)); +infinity when support(P) is not
/// contained in support(Q). Throws on universe mismatch.
double kl_divergence(const Dist& p, const Dist& q);

/// (1/2) sum_x |p(x) - q(x)|, in [0,1]. Throws on universe mismatch.
double statistical_distance(const Dist& p, const Dist& q);

/// I(X;Y) = H(X) + H(Y) - H(X,Y).
double mutual_information(const JointDist& j);

/// Which pair of a 3-way joint is measured, conditioned on the third axis.
enum class CmiTarget {
  xy_given_z,
  xz_given_y,
  yz_given_x,
};

/// Conditional mutual information of a 3-way joint, e.g. I(X;Y|Z).
double conditional_mutual_information(const Joint3& j,
                                      CmiTarget target = CmiTarget::xy_given_z);

namespace detail {
// Entropy of an unnormalized nonnegative weight vector interpreted as
// probabilities (weights must already sum to ~1).
double entropy_terms(std::span<const double> probs);
}  // namespace detail

}  // namespace infocomp
