#include "infocomp/info.hpp"

#include <cmath>

namespace infocomp {

namespace detail {

double entropy_terms(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace detail

double entropy(const Dist& d) { return detail::entropy_terms(d.probs()); }

double kl_divergence(const Dist& p, const Dist& q) {
  if (!p.same_universe(q)) throw std::invalid_argument("kl_divergence: universe mismatch");
  double d = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    const double px = p(x);
    if (px == 0.0) continue;
    const double qx = q(x);
    if (qx == 0.0) return kInfiniteBits;
    d += px * std::log2(px / qx);
  }
  return d;
}

double statistical_distance(const Dist& p, const Dist& q) {
  if (!p.same_universe(q)) throw std::invalid_argument("statistical_distance: universe mismatch");
  double s = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) s += std::abs(p(x) - q(x));
  return 0.5 * s;
}

double mutual_information(const JointDist& j) {
  return entropy(j.marginal_x()) + entropy(j.marginal_y()) -
         detail::entropy_terms(j.probs());
}

namespace {

// Remaps (x,y,z) so that the measured pair is always (X,Y) given Z.
struct AxisView {
  const Joint3& j;
  CmiTarget target;

  std::size_t nx() const {
    switch (target) {
      case CmiTarget::xy_given_z: return j.nx();
      case CmiTarget::xz_given_y: return j.nx();
      case CmiTarget::yz_given_x: return j.ny();
    }
    return 0;
  }
  std::size_t ny() const {
    switch (target) {
      case CmiTarget::xy_given_z: return j.ny();
      case CmiTarget::xz_given_y: return j.nz();
      case CmiTarget::yz_given_x: return j.nz();
    }
    return 0;
  }
  std::size_t nz() const {
    switch (target) {
      case CmiTarget::xy_given_z: return j.nz();
      case CmiTarget::xz_given_y: return j.ny();
      case CmiTarget::yz_given_x: return j.nx();
    }
    return 0;
  }
  double prob(std::size_t a, std::size_t b, std::size_t c) const {
    switch (target) {
      case CmiTarget::xy_given_z: return j(a, b, c);
      case CmiTarget::xz_given_y: return j(a, c, b);
      case CmiTarget::yz_given_x: return j(c, a, b);
    }
    return 0.0;
  }
};

}  // namespace

double conditional_mutual_information(const Joint3& j, CmiTarget target) {
  // I(A;B|C) = H(A,C) + H(B,C) - H(C) - H(A,B,C), all exact finite sums.
  const AxisView v{j, target};
  const std::size_t na = v.nx(), nb = v.ny(), nc = v.nz();
  std::vector<double> p_ac(na * nc, 0.0), p_bc(nb * nc, 0.0), p_c(nc, 0.0);
  double h_abc = 0.0;
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t c = 0; c < nc; ++c) {
        const double p = v.prob(a, b, c);
        if (p == 0.0) continue;
        p_ac[a * nc + c] += p;
        p_bc[b * nc + c] += p;
        p_c[c] += p;
        h_abc -= p * std::log2(p);
      }
    }
  }
  return detail::entropy_terms(p_ac) + detail::entropy_terms(p_bc) -
         detail::entropy_terms(p_c) - h_abc;
}

}  // namespace infocomp
