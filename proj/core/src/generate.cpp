#include "infocomp/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace infocomp {

Dist random_dist(DetStream& stream, std::size_t n, double min_weight) {
  std::vector<double> e(n);
  double sum = 0.0;
  for (double& v : e) {
    v = -std::log(1.0 - stream.next_double());
    sum += v;
  }
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i)
    p[i] = min_weight / static_cast<double>(n) + (1.0 - min_weight) * e[i] / sum;
  return Dist(Universe{n}, std::move(p));
}

JointDist random_joint(DetStream& stream, std::size_t x_size, std::size_t y_size,
                       double min_weight) {
  const std::size_t n = x_size * y_size;
  std::vector<double> e(n);
  double sum = 0.0;
  for (double& v : e) {
    v = -std::log(1.0 - stream.next_double());
    sum += v;
  }
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i)
    p[i] = min_weight / static_cast<double>(n) + (1.0 - min_weight) * e[i] / sum;
  return JointDist(x_size, y_size, std::move(p));
}

std::vector<std::string> prefix_free_labels(std::size_t n) {
  if (n < 2) throw std::invalid_argument("prefix_free_labels: need at least 2 children");
  std::vector<std::string> out;
  auto split = [&](auto&& self, std::size_t count, const std::string& prefix) -> void {
    if (count == 1) {
      out.push_back(prefix);
      return;
    }
    const std::size_t left = (count + 1) / 2;
    self(self, left, prefix + "0");
    self(self, count - left, prefix + "1");
  };
  split(split, n, "");
  return out;
}

UniformSubsetPair gen_uniform_subset(std::size_t universe, std::size_t sq, std::size_t sp) {
  if (sp == 0 || sp > sq || sq > universe)
    throw std::invalid_argument("gen_uniform_subset: need 1 <= |S_P| <= |S_Q| <= |U|");
  std::vector<double> p(universe, 0.0), q(universe, 0.0);
  for (std::size_t i = 0; i < sp; ++i) p[i] = 1.0 / static_cast<double>(sp);
  for (std::size_t i = 0; i < sq; ++i) q[i] = 1.0 / static_cast<double>(sq);
  return UniformSubsetPair{Dist(Universe{universe}, std::move(p)),
                           Dist(Universe{universe}, std::move(q))};
}

CpjInstance gen_random_cpj(std::uint32_t depth, std::size_t branching, const SharedSeed& seed,
                           double min_weight) {
  if (depth == 0) throw std::invalid_argument("gen_random_cpj: depth must be >= 1");
  if (branching < 2) throw std::invalid_argument("gen_random_cpj: branching must be >= 2");
  DetStream stream(seed);
  const Owner root_owner = stream.next_u64() & 1 ? Owner::b : Owner::a;
  const auto labels = prefix_free_labels(branching);
  auto build = [&](auto&& self, std::uint32_t d) -> CpjNode {
    CpjNode n;
    if (d == depth) {
      n.output = static_cast<std::int64_t>(stream.next_u64() & 1);
      return n;
    }
    n.owner = (d % 2 == 0) ? root_owner : other(root_owner);
    n.labels = labels;
    n.dist_a = random_dist(stream, branching, min_weight);
    n.dist_b = random_dist(stream, branching, min_weight);
    n.children.reserve(branching);
    for (std::size_t c = 0; c < branching; ++c) n.children.push_back(self(self, d + 1));
    return n;
  };
  CpjInstance f;
  f.rounds = depth;
  f.root = build(build, 0);
  f.validate();
  return f;
}

CpjInstance gen_promise_cpj(std::uint32_t depth, double margin, const SharedSeed& seed) {
  if (!(margin > 0.5 && margin <= 1.0))
    throw std::invalid_argument("gen_promise_cpj: margin must be in (1/2, 1]");
  CpjInstance f = gen_random_cpj(depth, 2, seed);
  const Dist correct = correct_distribution(f);
  std::vector<std::size_t> order(correct.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return correct(a) > correct(b); });
  std::vector<std::int64_t> labels(correct.size(), 0);
  double cum = 0.0;
  for (std::size_t i : order) {
    if (cum >= margin) break;
    labels[i] = 1;
    cum += correct(i);
  }
  std::size_t next = 0;
  auto assign = [&](auto&& self, CpjNode& n) -> void {
    if (n.is_leaf()) {
      n.output = labels[next++];
      return;
    }
    for (CpjNode& c : n.children) self(self, c);
  };
  assign(assign, f.root);
  // The generated instance must actually satisfy the promise.
  double mass = 0.0;
  for (std::size_t i = 0; i < correct.size(); ++i)
    if (labels[i] == 1) mass += correct(i);
  if (mass < margin) throw std::logic_error("gen_promise_cpj: margin not reached");
  return f;
}

ProtocolTree gen_random_protocol(std::uint32_t depth, std::size_t x_size, std::size_t y_size,
                                 std::size_t r_size, const SharedSeed& seed, double min_weight) {
  if (depth == 0) throw std::invalid_argument("gen_random_protocol: depth must be >= 1");
  if (r_size == 0) throw std::invalid_argument("gen_random_protocol: need at least one variant");
  DetStream stream(seed);
  ProtocolTree pi;
  pi.x_size = x_size;
  pi.y_size = y_size;
  const Dist r_probs = r_size == 1 ? Dist::point_mass(Universe{1}, 0)
                                   : random_dist(stream, r_size, min_weight);
  for (std::size_t r = 0; r < r_size; ++r) {
    const Owner root_owner = stream.next_u64() & 1 ? Owner::b : Owner::a;
    auto build = [&](auto&& self, std::uint32_t d) -> ProtoNode {
      ProtoNode n;
      if (d == depth) {
        n.output = static_cast<std::int64_t>(stream.next_u64() & 1);
        return n;
      }
      n.owner = (d % 2 == 0) ? root_owner : other(root_owner);
      n.labels = {"0", "1"};
      const std::size_t inputs = n.owner == Owner::a ? x_size : y_size;
      n.dists.reserve(inputs);
      for (std::size_t in = 0; in < inputs; ++in) n.dists.push_back(random_dist(stream, 2, min_weight));
      n.children.push_back(self(self, d + 1));
      n.children.push_back(self(self, d + 1));
      return n;
    };
    pi.variants.push_back(ProtocolVariant{r_probs(r), build(build, 0)});
  }
  pi.validate();
  return pi;
}

namespace {

Dist noisy_bit_dist(int bit, double flip) {
  return bit == 0 ? Dist(Universe{2}, {1.0 - flip, flip}) : Dist(Universe{2}, {flip, 1.0 - flip});
}

// Builds a depth-`rounds` binary tree where round d's owner sends a
// noisy copy of one input bit (or a constant when bit_of returns -1).
ProtoNode build_bit_reveal_tree(std::uint32_t rounds, std::size_t x_size, std::size_t y_size,
                                double flip,
                                const std::function<int(std::uint32_t round, std::size_t input)>&
                                    bit_of,
                                std::uint32_t d = 0) {
  ProtoNode n;
  if (d == rounds) {
    n.output = 0;
    return n;
  }
  n.owner = (d % 2 == 0) ? Owner::a : Owner::b;
  n.labels = {"0", "1"};
  const std::size_t inputs = n.owner == Owner::a ? x_size : y_size;
  for (std::size_t in = 0; in < inputs; ++in) {
    const int bit = bit_of(d, in);
    n.dists.push_back(bit < 0 ? Dist::point_mass(Universe{2}, 0) : noisy_bit_dist(bit, flip));
  }
  n.children.push_back(build_bit_reveal_tree(rounds, x_size, y_size, flip, bit_of, d + 1));
  n.children.push_back(build_bit_reveal_tree(rounds, x_size, y_size, flip, bit_of, d + 1));
  return n;
}

}  // namespace

ReferenceProtocol gen_reference_protocol() {
  // Rounds 0..3 reveal x1, y1, x2, y2 at flip probability 0.11
  // (1 - H(0.11) ~ 0.5 bits each); rounds 4 and 5 send constants.
  const auto bit_of = [](std::uint32_t round, std::size_t input) -> int {
    switch (round) {
      case 0: return static_cast<int>((input >> 1) & 1);  // x1
      case 1: return static_cast<int>((input >> 1) & 1);  // y1
      case 2: return static_cast<int>(input & 1);         // x2
      case 3: return static_cast<int>(input & 1);         // y2
      default: return -1;
    }
  };
  ReferenceProtocol out{
      ProtocolTree{4, 4, {ProtocolVariant{1.0, build_bit_reveal_tree(6, 4, 4, 0.11, bit_of)}}},
      JointDist::product(Dist::uniform(Universe{4}), Dist::uniform(Universe{4}))};
  out.pi.validate();
  return out;
}

TinyXorProtocol gen_tiny_xor_protocol() {
  const auto bit_of = [](std::uint32_t round, std::size_t input) -> int {
    (void)round;
    return static_cast<int>((input >> 1) & 1);  // first (high) bit each side
  };
  TinyXorProtocol out{
      ProtocolTree{4, 4, {ProtocolVariant{1.0, build_bit_reveal_tree(2, 4, 4, 0.1, bit_of)}}},
      JointDist::product(Dist::uniform(Universe{4}), Dist::uniform(Universe{4})),
      {}};
  // Leaf output = XOR of the two transmitted bits.
  for (std::size_t c1 = 0; c1 < 2; ++c1)
    for (std::size_t c2 = 0; c2 < 2; ++c2)
      out.pi.variants[0].root.children[c1].children[c2].output =
          static_cast<std::int64_t>(c1 ^ c2);
  out.pi.validate();
  out.f.assign(4, std::vector<std::int64_t>(4, 0));
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 4; ++y) out.f[x][y] = static_cast<std::int64_t>(((x >> 1) ^ (y >> 1)) & 1);
  return out;
}

}  // namespace infocomp
