#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "infocomp/cpj.hpp"
#include "infocomp/generate.hpp"
#include "test_support.hpp"

using namespace infocomp;

namespace {

SharedSeed nth_seed(std::uint64_t i) { return derive_subseed(SharedSeed{0x10, 0x24}, i); }

CpjNode leaf(std::int64_t out) {
  CpjNode n;
  n.output = out;
  return n;
}

// Depth-1 instance: one owner node over `labels.size()` leaves.
CpjInstance depth1(Owner owner, Dist da, Dist db) {
  CpjInstance f;
  f.rounds = 1;
  f.root.owner = owner;
  const std::size_t deg = da.size();
  f.root.labels = prefix_free_labels(deg);
  for (std::size_t i = 0; i < deg; ++i) f.root.children.push_back(leaf(std::int64_t(i) & 1));
  f.root.dist_a = std::move(da);
  f.root.dist_b = std::move(db);
  f.validate();
  return f;
}

}  // namespace

TEST_CASE("instance validation") {
  CpjInstance f = gen_random_cpj(3, 2, nth_seed(0));
  CHECK_NOTHROW(f.validate());
  CHECK(f.uniform_depth());

  // Ownership must alternate.
  CpjInstance bad = f;
  bad.root.children[0].owner = bad.root.owner;
  CHECK_THROWS(bad.validate());

  // Labels must be prefix-free.
  CpjInstance bad2 = f;
  bad2.root.labels = {"0", "01"};
  CHECK_THROWS(bad2.validate());
}

TEST_CASE("edge divergence definition") {
  const Dist da(Universe{2}, {0.5, 0.5});
  const Dist db(Universe{2}, {0.25, 0.75});
  CpjInstance fa = depth1(Owner::a, da, db);
  CHECK(edge_divergence(fa.root, 0) == doctest::Approx(1.0));  // log2(0.5/0.25)
  // Equal distributions cost nothing.
  CpjInstance fe = depth1(Owner::a, da, da);
  CHECK(edge_divergence(fe.root, 0) == doctest::Approx(0.0));
  CHECK(edge_divergence(fe.root, 1) == doctest::Approx(0.0));
  // The case split follows the owner.
  CpjInstance fb = depth1(Owner::b, db, da);
  CHECK(edge_divergence(fb.root, 0) == doctest::Approx(1.0));  // log2(0.5/0.25) again
  // Infinite when the other side assigns zero.
  CpjInstance fi = depth1(Owner::a, da, Dist::point_mass(Universe{2}, 1));
  CHECK(std::isinf(edge_divergence(fi.root, 0)));
}

TEST_CASE("correct distribution") {
  // Depth 1: the owner's distribution itself.
  const Dist da(Universe{4}, {0.1, 0.2, 0.3, 0.4});
  const Dist db = Dist::uniform(Universe{4});
  const CpjInstance f1 = depth1(Owner::a, da, db);
  const Dist c1 = correct_distribution(f1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c1(i) == doctest::Approx(da(i)));

  // Point-mass owners force a single leaf.
  CpjInstance forced = gen_random_cpj(3, 2, nth_seed(1));
  auto force = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) return;
    n.dist_a = Dist::point_mass(Universe{2}, 1);
    n.dist_b = Dist::point_mass(Universe{2}, 1);
    for (CpjNode& c : n.children) self(self, c);
  };
  force(force, forced.root);
  const Dist cf = correct_distribution(forced);
  CHECK(cf(cf.size() - 1) == doctest::Approx(1.0));

  // Random depth-3 instance vs brute-force enumeration.
  for (int i = 0; i < 10; ++i) {
    const CpjInstance f = gen_random_cpj(3, 2, nth_seed(10 + i));
    const Dist c = correct_distribution(f);
    const std::vector<double> brute = testsupport::enumerate_leaf_probs(f.root);
    REQUIRE(brute.size() == c.size());
    for (std::size_t l = 0; l < c.size(); ++l)
      CHECK(c(l) == doctest::Approx(brute[l]).epsilon(1e-12));
    double sum = 0.0;
    for (std::size_t l = 0; l < c.size(); ++l) sum += c(l);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("instance divergence") {
  // Equal distributions everywhere cost zero.
  CpjInstance zero = gen_random_cpj(3, 2, nth_seed(2));
  auto equalize = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) return;
    n.dist_b = n.dist_a;
    for (CpjNode& c : n.children) self(self, c);
  };
  equalize(equalize, zero.root);
  CHECK(instance_divergence(zero) == doctest::Approx(0.0).epsilon(1e-12));

  // Depth 1 reduces to the KL divergence between the sides.
  const Dist da(Universe{3}, {0.5, 0.3, 0.2});
  const Dist db(Universe{3}, {0.2, 0.5, 0.3});
  const CpjInstance f1 = depth1(Owner::a, da, db);
  CHECK(instance_divergence(f1) == doctest::Approx(kl_divergence(da, db)).epsilon(1e-12));
  const CpjInstance f1b = depth1(Owner::b, db, da);
  CHECK(instance_divergence(f1b) == doctest::Approx(kl_divergence(da, db)).epsilon(1e-12));

  // Against the brute-force path enumeration.
  for (int i = 0; i < 10; ++i) {
    const CpjInstance f = gen_random_cpj(3, 3, nth_seed(30 + i));
    CHECK(instance_divergence(f) ==
          doctest::Approx(testsupport::enumerate_divergence(f.root)).epsilon(1e-10));
  }
}

TEST_CASE("product instances") {
  // m = 1 is isomorphic to the input.
  const CpjInstance f = gen_random_cpj(2, 2, nth_seed(3));
  const CpjInstance p1 = product_instance({f});
  CHECK(instance_divergence(p1) == doctest::Approx(instance_divergence(f)).epsilon(1e-12));
  const Dist c = correct_distribution(f), cp = correct_distribution(p1);
  for (std::size_t l = 0; l < c.size(); ++l) CHECK(cp(l) == doctest::Approx(c(l)));

  // Products of zero-divergence instances stay at zero.
  CpjInstance zero = gen_random_cpj(2, 2, nth_seed(4));
  auto equalize = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) return;
    n.dist_b = n.dist_a;
    for (CpjNode& cc : n.children) self(self, cc);
  };
  equalize(equalize, zero.root);
  CHECK(instance_divergence(product_instance({zero, zero})) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Additivity on random pairs, both sides enumerated exactly. Mirror
  // the second instance when its per-level ownership disagrees.
  for (int i = 0; i < 8; ++i) {
    CpjInstance f1 = gen_random_cpj(2, 2, nth_seed(40));
    CpjInstance f2 = gen_random_cpj(2, 2, nth_seed(41 + i));
    auto align = [&](auto&& self, CpjNode& n, Owner expect) -> void {
      if (n.is_leaf()) return;
      if (n.owner != expect) {
        std::swap(n.dist_a, n.dist_b);
        n.owner = expect;
      }
      for (CpjNode& cc : n.children) self(self, cc, other(expect));
    };
    align(align, f2.root, f1.root.owner);
    const CpjInstance prod = product_instance({f1, f2});
    CHECK(instance_divergence(prod) ==
          doctest::Approx(instance_divergence(f1) + instance_divergence(f2)).epsilon(1e-9));
  }

  // Depth mismatch is rejected.
  CHECK_THROWS(product_instance({gen_random_cpj(2, 2, nth_seed(50)),
                                 gen_random_cpj(3, 2, nth_seed(50))}));
}

TEST_CASE("sampling a degenerate instance never exceeds the union bound") {
  CpjInstance f = gen_random_cpj(3, 2, nth_seed(5));
  auto equalize = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) return;
    n.dist_b = n.dist_a;
    for (CpjNode& c : n.children) self(self, c);
  };
  equalize(equalize, f.root);
  const double eps = 0.01;
  const std::uint64_t n = 10'000;
  std::uint64_t mismatches = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const PathSampleRun run = sample_path(f, nth_seed(2'000'000 + i), eps);
    if (!run.match) ++mismatches;
    CHECK(run.path_a.divergence_cost == doctest::Approx(0.0));
  }
  CHECK(double(mismatches) / double(n) <= 2.0 * 3 * eps);
}

TEST_CASE("depth-1 sampling behaves like the one-shot sampler") {
  const Dist da(Universe{4}, {0.4, 0.3, 0.2, 0.1});
  const Dist db = Dist::uniform(Universe{4});
  const CpjInstance f = depth1(Owner::a, da, db);
  SamplerConfig cfg;
  cfg.eps = 0.05;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const PathSampleRun pr = sample_path(f, nth_seed(3'000'000 + i), cfg.eps, &cfg);
    // The walk draws its level seed from the per-depth subseed.
    const SampleRun sr = run_sampler(da, db, round_seed(nth_seed(3'000'000 + i), 0), cfg.resolved());
    REQUIRE(pr.path_a.child_indices.size() == 1);
    CHECK(pr.path_a.child_indices[0] == sr.a);
    CHECK(pr.stats.total_bits() == sr.stats.total_bits());
    if (sr.b) {
      REQUIRE(pr.path_b.child_indices.size() == 1);
      CHECK(pr.path_b.child_indices[0] == *sr.b);
    }
  }
}

TEST_CASE("matched-run leaf distribution follows the correct distribution") {
  const CpjInstance f = gen_random_cpj(3, 2, nth_seed(6));
  const Dist exact = correct_distribution(f);
  std::vector<std::uint64_t> counts(exact.size(), 0);
  const double eps = 0.01;
  const std::uint64_t n = 30'000;
  std::uint64_t matched = 0, mismatched = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const PathSampleRun run = sample_path(f, nth_seed(4'000'000 + i), eps);
    if (run.match) {
      ++counts[run.path_a.leaf_index];
      ++matched;
    } else {
      ++mismatched;
    }
    // Hard per-run bound on matched runs.
    if (run.match) {
      const double clamped = path_divergence_clamped(f.root, run.path_a.child_indices);
      CHECK(double(run.stats.total_bits()) <=
            path_comm_bound(run.path_a.divergence_cost, clamped, f.rounds, eps) + 1e-9);
    }
  }
  CHECK(testsupport::empirical_distance(counts, exact) <= 0.03);
  CHECK(double(mismatched) / double(n) <= 1.5 * 3 * eps);
}

TEST_CASE("promise instances are solved with the promised confidence") {
  const double margin = 0.95;
  const CpjInstance f = gen_promise_cpj(3, margin, nth_seed(7));
  // Recover the majority label from the enumerated correct distribution.
  const Dist correct = correct_distribution(f);
  const auto leaves = collect_leaves(f.root);
  double mass1 = 0.0;
  for (std::size_t l = 0; l < leaves.size(); ++l)
    if (*leaves[l].node->output == 1) mass1 += correct(l);
  REQUIRE(mass1 >= margin);

  const double eps = 0.05;
  const std::uint64_t n = 10'000;
  std::uint64_t good = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const SolveResult r = solve_cpj(f, nth_seed(5'000'000 + i), eps);
    if (r.match && r.label_a == 1) ++good;
  }
  CHECK(double(good) / double(n) >= 0.88);
}

TEST_CASE("all-ones labels always answer one on matched runs") {
  CpjInstance f = gen_random_cpj(2, 2, nth_seed(8));
  auto relabel = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) {
      n.output = 1;
      return;
    }
    for (CpjNode& c : n.children) self(self, c);
  };
  relabel(relabel, f.root);
  for (std::uint64_t i = 0; i < 300; ++i) {
    const SolveResult r = solve_cpj(f, nth_seed(6'000'000 + i), 0.1);
    if (r.match) {
      CHECK(r.label_a == 1);
      CHECK(r.label_b == 1);
    }
  }
}

TEST_CASE("solve_cpj_n reduces to solve_cpj for n = 1") {
  const CpjInstance f = gen_promise_cpj(2, 0.9, nth_seed(9));
  for (std::uint64_t i = 0; i < 200; ++i) {
    const SolveManyResult many = solve_cpj_n({f}, nth_seed(7'000'000 + i), 0.1);
    const SolveResult one = solve_cpj(f, nth_seed(7'000'000 + i), 0.1);
    REQUIRE(many.labels_a.size() == 1);
    CHECK(many.match == one.match);
    if (many.match) CHECK(many.labels_a[0] == one.label_a);
  }
}

TEST_CASE("solve_cpj_n answers four zero-divergence instances at once") {
  // Zero-divergence promise instances: both sides know the same
  // distributions, labels carry a 0.91 majority.
  CpjInstance base = gen_random_cpj(2, 2, nth_seed(11));
  auto equalize = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) return;
    n.dist_b = n.dist_a;
    for (CpjNode& c : n.children) self(self, c);
  };
  equalize(equalize, base.root);
  const Dist correct = correct_distribution(base);
  std::vector<std::size_t> order(correct.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return correct(a) > correct(b); });
  std::size_t next = 0;
  std::vector<std::int64_t> labels(correct.size(), 0);
  double cum = 0.0;
  for (std::size_t l : order) {
    if (cum >= 0.9) break;
    labels[l] = 1;
    cum += correct(l);
  }
  auto assign = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) {
      n.output = labels[next++];
      return;
    }
    for (CpjNode& c : n.children) self(self, c);
  };
  assign(assign, base.root);

  const std::vector<CpjInstance> instances(4, base);
  const double eps = 0.05;
  const std::uint64_t n = 1'000;
  std::vector<std::uint64_t> good(4, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const SolveManyResult r = solve_cpj_n(instances, nth_seed(8'000'000 + i), eps);
    for (std::size_t j = 0; j < 4; ++j)
      if (r.match && r.labels_a[j] == 1) ++good[j];
  }
  for (std::size_t j = 0; j < 4; ++j) CHECK(double(good[j]) / double(n) >= 1.0 - 2.0 * 0.1);
}

TEST_CASE("solve_cpj_n communication stays within the product budget") {
  // Four random promise instances of depth 4 with per-instance
  // divergence <= 1; measured mean bits within 3x of C log2(4nC/eps).
  std::vector<CpjInstance> instances;
  for (std::uint64_t i = 0; instances.size() < 4 && i < 200; ++i) {
    CpjInstance f = gen_promise_cpj(4, 0.9, nth_seed(12 + i));
    if (instances.empty() || f.root.owner == instances[0].root.owner) {
      if (instance_divergence(f) <= 1.0) instances.push_back(std::move(f));
    }
  }
  REQUIRE(instances.size() == 4);
  const double eps = 0.1;
  const std::uint64_t n = 300;
  double bits = 0.0;
  for (std::uint64_t i = 0; i < n; ++i)
    bits += double(solve_cpj_n(instances, nth_seed(9'000'000 + i), eps).stats.total_bits());
  const double formula = 4.0 * std::log2(4.0 * 4.0 * 4.0 / eps);
  CHECK(bits / double(n) <= 3.0 * formula);
}

TEST_CASE("leaf indexing is consistent") {
  const CpjInstance f = gen_random_cpj(3, 3, nth_seed(13));
  const auto leaves = collect_leaves(f.root);
  for (std::size_t l = 0; l < leaves.size(); ++l)
    CHECK(leaf_index_for_path(f.root, leaves[l].path) == l);
}
