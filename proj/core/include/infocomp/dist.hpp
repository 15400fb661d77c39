#pragma once

// Finite probability spaces: universes, distributions, joints.
// All probabilities are 64-bit doubles; constructors validate and
// renormalize so downstream identity checks can assert to 1e-9.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace infocomp {

inline constexpr double kProbSumTolerance = 1e-9;

/// Ordered finite universe; symbols are the indices 0..size-1.
struct Universe {
  std::size_t size = 0;

  constexpr bool operator==(const Universe&) const = default;
};

/// Probability mass function over a Universe.
class Dist {
 public:
  Dist() = default;

  Dist(Universe universe, std::vector<double> probs)
      : universe_(universe), probs_(std::move(probs)) {
    if (universe_.size == 0) throw std::invalid_argument("Dist: empty universe");
    if (probs_.size() != universe_.size)
      throw std::invalid_argument("Dist: probs size does not match universe");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw std::invalid_argument("Dist: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance)
      throw std::invalid_argument("Dist: probabilities do not sum to 1");
    if (sum != 1.0) {
      for (double& p : probs_) p /= sum;
    }
  }

  static Dist uniform(Universe u) {
    return Dist(u, std::vector<double>(u.size, 1.0 / static_cast<double>(u.size)));
  }

  static Dist point_mass(Universe u, std::size_t x) {
    std::vector<double> p(u.size, 0.0);
    p.at(x) = 1.0;
    return Dist(u, std::move(p));
  }

  const Universe& universe() const { return universe_; }
  std::size_t size() const { return universe_.size; }
  double operator()(std::size_t x) const { return probs_[x]; }
  std::span<const double> probs() const { return probs_; }

  bool same_universe(const Dist& other) const { return universe_ == other.universe_; }

 private:
  Universe universe_;
  std::vector<double> probs_;
};

/// Joint distribution over X x Y, row-major in X.
class JointDist {
 public:
  JointDist() = default;

  JointDist(std::size_t x_size, std::size_t y_size, std::vector<double> probs)
      : x_size_(x_size), y_size_(y_size), probs_(std::move(probs)) {
    if (x_size_ == 0 || y_size_ == 0)
      throw std::invalid_argument("JointDist: empty axis");
    if (probs_.size() != x_size_ * y_size_)
      throw std::invalid_argument("JointDist: probs size does not match axes");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw std::invalid_argument("JointDist: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance)
      throw std::invalid_argument("JointDist: probabilities do not sum to 1");
    if (sum != 1.0) {
      for (double& p : probs_) p /= sum;
    }
  }

  static JointDist product(const Dist& px, const Dist& py) {
    std::vector<double> probs(px.size() * py.size());
    for (std::size_t x = 0; x < px.size(); ++x)
      for (std::size_t y = 0; y < py.size(); ++y) probs[x * py.size() + y] = px(x) * py(y);
    return JointDist(px.size(), py.size(), std::move(probs));
  }

  std::size_t x_size() const { return x_size_; }
  std::size_t y_size() const { return y_size_; }
  double operator()(std::size_t x, std::size_t y) const { return probs_[x * y_size_ + y]; }
  std::span<const double> probs() const { return probs_; }

  Dist marginal_x() const {
    std::vector<double> m(x_size_, 0.0);
    for (std::size_t x = 0; x < x_size_; ++x)
      for (std::size_t y = 0; y < y_size_; ++y) m[x] += (*this)(x, y);
    return Dist(Universe{x_size_}, std::move(m));
  }

  Dist marginal_y() const {
    std::vector<double> m(y_size_, 0.0);
    for (std::size_t x = 0; x < x_size_; ++x)
      for (std::size_t y = 0; y < y_size_; ++y) m[y] += (*this)(x, y);
    return Dist(Universe{y_size_}, std::move(m));
  }

  /// P(Y | X=x). Throws if the row has zero mass.
  Dist conditional_y_given_x(std::size_t x) const {
    double row = 0.0;
    for (std::size_t y = 0; y < y_size_; ++y) row += (*this)(x, y);
    if (row <= 0.0) throw std::invalid_argument("JointDist: conditioning on zero-probability x");
    std::vector<double> c(y_size_);
    for (std::size_t y = 0; y < y_size_; ++y) c[y] = (*this)(x, y) / row;
    return Dist(Universe{y_size_}, std::move(c));
  }

  Dist conditional_x_given_y(std::size_t y) const {
    double col = 0.0;
    for (std::size_t x = 0; x < x_size_; ++x) col += (*this)(x, y);
    if (col <= 0.0) throw std::invalid_argument("JointDist: conditioning on zero-probability y");
    std::vector<double> c(x_size_);
    for (std::size_t x = 0; x < x_size_; ++x) c[x] = (*this)(x, y) / col;
    return Dist(Universe{x_size_}, std::move(c));
  }

 private:
  std::size_t x_size_ = 0, y_size_ = 0;
  std::vector<double> probs_;
};

/// Three-way joint over X x Y x Z (x-major, then y, then z).
class Joint3 {
 public:
  Joint3() = default;

  Joint3(std::size_t nx, std::size_t ny, std::size_t nz, std::vector<double> probs)
      : nx_(nx), ny_(ny), nz_(nz), probs_(std::move(probs)) {
    if (nx_ == 0 || ny_ == 0 || nz_ == 0)
      throw std::invalid_argument("Joint3: empty axis");
    if (probs_.size() != nx_ * ny_ * nz_)
      throw std::invalid_argument("Joint3: probs size does not match axes");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw std::invalid_argument("Joint3: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance)
      throw std::invalid_argument("Joint3: probabilities do not sum to 1");
    if (sum != 1.0) {
      for (double& p : probs_) p /= sum;
    }
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t nz() const { return nz_; }
  double operator()(std::size_t x, std::size_t y, std::size_t z) const {
    return probs_[(x * ny_ + y) * nz_ + z];
  }
  std::span<const double> probs() const { return probs_; }

 private:
  std::size_t nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<double> probs_;
};

}  // namespace infocomp
