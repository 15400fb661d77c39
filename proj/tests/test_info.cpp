#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "infocomp/generate.hpp"
#include "infocomp/info.hpp"

using namespace infocomp;

namespace {

Dist d2(double p0, double p1) { return Dist(Universe{2}, {p0, p1}); }

// Random full-support probability vector for property checks.
std::vector<double> random_probs(DetStream& stream, std::size_t n) {
  const Dist d = random_dist(stream, n, 0.2);
  return {d.probs().begin(), d.probs().end()};
}

}  // namespace

TEST_CASE("dist construction validates and renormalizes") {
  CHECK_THROWS(Dist(Universe{2}, {0.5, 0.6}));
  CHECK_THROWS(Dist(Universe{2}, {-0.1, 1.1}));
  CHECK_THROWS(Dist(Universe{3}, {0.5, 0.5}));
  const Dist d(Universe{2}, {0.5 + 4e-10, 0.5});
  double sum = 0.0;
  for (double p : d.probs()) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("entropy") {
  CHECK(entropy(Dist::uniform(Universe{2})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(entropy(Dist::point_mass(Universe{5}, 2)) == doctest::Approx(0.0));
  // Direct evaluation of sum p log2(1/p) for (0.25, 0.75).
  CHECK(entropy(d2(0.25, 0.75)) == doctest::Approx(0.8112781244591328).epsilon(1e-12));
}

TEST_CASE("entropy stays within [0, log2 |U|]") {
  DetStream stream(SharedSeed{1, 2});
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + stream.next_index(14);
    const Dist d = random_dist(stream, n, 0.1);
    const double h = entropy(d);
    CHECK(h >= -1e-12);
    CHECK(h <= std::log2(double(n)) + 1e-12);
  }
}

TEST_CASE("kl divergence basics") {
  const Dist u = Dist::uniform(Universe{4});
  CHECK(kl_divergence(u, u) == doctest::Approx(0.0));
  // Direct evaluation for (1/2,1/2) vs (1/4,3/4).
  CHECK(kl_divergence(d2(0.5, 0.5), d2(0.25, 0.75)) ==
        doctest::Approx(0.20751874963942185).epsilon(1e-12));
  // Infinite when P's support escapes Q's.
  CHECK(std::isinf(kl_divergence(d2(0.5, 0.5), d2(1.0, 0.0))));
  CHECK_THROWS(kl_divergence(u, d2(0.5, 0.5)));
}

TEST_CASE("divergence against uniform is n - H") {
  // D(A || uniform on 2^n) = n - H(A).
  DetStream stream(SharedSeed{3, 4});
  for (int n = 1; n <= 4; ++n) {
    const std::size_t size = std::size_t{1} << n;
    const Dist p = random_dist(stream, size, 0.2);
    const Dist q = Dist::uniform(Universe{size});
    CHECK(kl_divergence(p, q) == doctest::Approx(double(n) - entropy(p)).epsilon(1e-11));
  }
}

TEST_CASE("divergence of nested uniform supports is the log ratio") {
  const auto pair = gen_uniform_subset(32, 16, 2);
  CHECK(kl_divergence(pair.p, pair.q) == doctest::Approx(3.0).epsilon(1e-12));
  const auto pair2 = gen_uniform_subset(16, 16, 1);
  CHECK(kl_divergence(pair2.p, pair2.q) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("kl divergence is nonnegative, zero only at equality") {
  DetStream stream(SharedSeed{5, 6});
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + stream.next_index(6);
    const Dist p = random_dist(stream, n, 0.1);
    const Dist q = random_dist(stream, n, 0.1);
    const double d = kl_divergence(p, q);
    CHECK(d >= -1e-12);
    CHECK(kl_divergence(p, p) == doctest::Approx(0.0));
    if (statistical_distance(p, q) > 1e-6) CHECK(d > 0.0);
  }
}

TEST_CASE("product distributions add their divergences") {
  DetStream stream(SharedSeed{7, 8});
  for (int i = 0; i < 50; ++i) {
    const std::size_t n1 = 2 + stream.next_index(4);
    const std::size_t n2 = 2 + stream.next_index(4);
    const Dist p1 = random_dist(stream, n1, 0.1), q1 = random_dist(stream, n1, 0.1);
    const Dist p2 = random_dist(stream, n2, 0.1), q2 = random_dist(stream, n2, 0.1);
    std::vector<double> pp(n1 * n2), qq(n1 * n2);
    for (std::size_t a = 0; a < n1; ++a)
      for (std::size_t b = 0; b < n2; ++b) {
        pp[a * n2 + b] = p1(a) * p2(b);
        qq[a * n2 + b] = q1(a) * q2(b);
      }
    const double lhs = kl_divergence(Dist(Universe{n1 * n2}, pp), Dist(Universe{n1 * n2}, qq));
    CHECK(lhs == doctest::Approx(kl_divergence(p1, q1) + kl_divergence(p2, q2)).epsilon(1e-10));
  }
}

TEST_CASE("statistical distance") {
  CHECK(statistical_distance(d2(0.5, 0.5), d2(0.5, 0.5)) == doctest::Approx(0.0));
  CHECK(statistical_distance(d2(1.0, 0.0), d2(0.0, 1.0)) == doctest::Approx(1.0));
  CHECK(statistical_distance(d2(1.0, 0.0), d2(0.5, 0.5)) == doctest::Approx(0.5));
  CHECK_THROWS(statistical_distance(d2(1, 0), Dist::uniform(Universe{3})));
}

TEST_CASE("mutual information") {
  CHECK(mutual_information(JointDist::product(d2(0.3, 0.7), d2(0.6, 0.4))) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Perfectly correlated uniform pair on n values.
  for (std::size_t n : {2, 4, 8}) {
    std::vector<double> probs(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) probs[i * n + i] = 1.0 / double(n);
    CHECK(mutual_information(JointDist(n, n, probs)) ==
          doctest::Approx(std::log2(double(n))).epsilon(1e-12));
  }

  // Binary symmetric channel with flip 0.25, uniform input.
  const JointDist bsc(2, 2, {0.375, 0.125, 0.125, 0.375});
  CHECK(mutual_information(bsc) == doctest::Approx(1.0 - 0.8112781244591328).epsilon(1e-12));
}

TEST_CASE("conditional mutual information reduces correctly") {
  // Z independent of (X, Y): I(X;Y|Z) = I(X;Y).
  DetStream stream(SharedSeed{9, 10});
  for (int i = 0; i < 20; ++i) {
    const std::size_t nx = 2 + stream.next_index(3);
    const std::size_t ny = 2 + stream.next_index(3);
    const std::size_t nz = 2 + stream.next_index(3);
    const JointDist xy = random_joint(stream, nx, ny);
    const Dist z = random_dist(stream, nz, 0.2);
    std::vector<double> p3(nx * ny * nz);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t zz = 0; zz < nz; ++zz) p3[(x * ny + y) * nz + zz] = xy(x, y) * z(zz);
    CHECK(conditional_mutual_information(Joint3(nx, ny, nz, p3)) ==
          doctest::Approx(mutual_information(xy)).epsilon(1e-10));
  }

  // X = Y = Z uniform bit: conditioning removes everything.
  std::vector<double> diag(8, 0.0);
  diag[0] = 0.5;
  diag[7] = 0.5;
  CHECK(conditional_mutual_information(Joint3(2, 2, 2, diag)) == doctest::Approx(0.0));
}

TEST_CASE("chain rule on random four-way joints") {
  DetStream stream(SharedSeed{11, 12});
  const std::size_t m = 3;
  for (int i = 0; i < 40; ++i) {
    const std::vector<double> w = random_probs(stream, m * m * m * m);
    auto p4 = [&](std::size_t c1, std::size_t c2, std::size_t b, std::size_t d) {
      return w[((c1 * m + c2) * m + b) * m + d];
    };
    std::vector<double> merged(w), first(m * m * m, 0.0), second(m * m * m * m);
    for (std::size_t c1 = 0; c1 < m; ++c1)
      for (std::size_t c2 = 0; c2 < m; ++c2)
        for (std::size_t b = 0; b < m; ++b)
          for (std::size_t d = 0; d < m; ++d) {
            first[(c1 * m + b) * m + d] += p4(c1, c2, b, d);
            second[(c2 * m + b) * (m * m) + c1 * m + d] = p4(c1, c2, b, d);
          }
    const double lhs = conditional_mutual_information(Joint3(m * m, m, m, merged));
    const double rhs = conditional_mutual_information(Joint3(m, m, m, first)) +
                       conditional_mutual_information(Joint3(m, m, m * m, second));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("conditional mutual information matches expected divergence form") {
  // I(A;B|C) = E_{a,c} D(B|ac || B|c).
  DetStream stream(SharedSeed{13, 14});
  const std::size_t m = 3;
  for (int i = 0; i < 40; ++i) {
    const std::vector<double> w = random_probs(stream, m * m * m);
    auto p3 = [&](std::size_t a, std::size_t b, std::size_t c) { return w[(a * m + b) * m + c]; };
    const double lhs = conditional_mutual_information(Joint3(m, m, m, w));
    double rhs = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t c = 0; c < m; ++c) {
        double p_ac = 0.0, p_c = 0.0;
        std::vector<double> b_ac(m), b_c(m, 0.0);
        for (std::size_t b = 0; b < m; ++b) {
          p_ac += p3(a, b, c);
          for (std::size_t aa = 0; aa < m; ++aa) {
            p_c += p3(aa, b, c);
            b_c[b] += p3(aa, b, c);
          }
        }
        if (p_ac == 0.0) continue;
        for (std::size_t b = 0; b < m; ++b) b_ac[b] = p3(a, b, c) / p_ac;
        for (double& v : b_c) v /= p_c;
        rhs += p_ac *
               kl_divergence(Dist(Universe{m}, b_ac), Dist(Universe{m}, b_c));
      }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("joint marginals and conditionals") {
  const JointDist j(2, 3, {0.1, 0.2, 0.1, 0.25, 0.15, 0.2});
  CHECK(j.marginal_x()(0) == doctest::Approx(0.4));
  CHECK(j.marginal_y()(1) == doctest::Approx(0.35));
  const Dist c = j.conditional_y_given_x(0);
  CHECK(c(0) == doctest::Approx(0.25));
  CHECK(c(1) == doctest::Approx(0.5));
}
