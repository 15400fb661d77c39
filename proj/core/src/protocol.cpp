#include "infocomp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace infocomp {

namespace {

// Subseed index for compression setup draws; round seeds use indices
// 0..rounds-1, so setup lives in a disjoint range.
constexpr std::uint64_t kSetupSubseedIndex = std::uint64_t{1} << 32;

void validate_proto_labels(const std::vector<std::string>& labels) {
  for (const auto& l : labels) {
    if (l.empty()) throw std::invalid_argument("ProtocolTree: empty child label");
    for (char c : l)
      if (c != '0' && c != '1')
        throw std::invalid_argument("ProtocolTree: labels must be binary strings");
  }
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i + 1].starts_with(sorted[i]) || sorted[i] == sorted[i + 1])
      throw std::invalid_argument("ProtocolTree: child labels not prefix-free");
}

void validate_proto_node(const ProtoNode& n, std::size_t x_size, std::size_t y_size,
                         std::optional<Owner> expected_owner) {
  if (n.is_leaf()) {
    if (!n.output) throw std::invalid_argument("ProtocolTree: leaf without output");
    return;
  }
  if (n.output) throw std::invalid_argument("ProtocolTree: internal node with output");
  if (expected_owner && n.owner != *expected_owner)
    throw std::invalid_argument("ProtocolTree: ownership must alternate with depth");
  if (n.labels.size() != n.children.size())
    throw std::invalid_argument("ProtocolTree: labels do not match children");
  validate_proto_labels(n.labels);
  const std::size_t inputs = n.owner == Owner::a ? x_size : y_size;
  if (n.dists.size() != inputs)
    throw std::invalid_argument("ProtocolTree: one distribution per owner input required");
  for (const Dist& d : n.dists)
    if (d.size() != n.children.size())
      throw std::invalid_argument("ProtocolTree: distribution size does not match children");
  for (const ProtoNode& c : n.children)
    validate_proto_node(c, x_size, y_size, other(n.owner));
}

std::uint32_t node_depth(const ProtoNode& n) {
  if (n.is_leaf()) return 0;
  std::uint32_t d = 0;
  for (const ProtoNode& c : n.children) d = std::max(d, node_depth(c));
  return d + 1;
}

bool node_uniform(const ProtoNode& n, std::uint32_t depth, std::uint32_t target) {
  if (n.is_leaf()) return depth == target;
  for (const ProtoNode& c : n.children)
    if (!node_uniform(c, depth + 1, target)) return false;
  return true;
}

struct ProtoLeaf {
  const ProtoNode* node;
  std::vector<std::pair<const ProtoNode*, std::size_t>> edges;  // (parent, child index)
};

std::vector<ProtoLeaf> collect_proto_leaves(const ProtoNode& root) {
  std::vector<ProtoLeaf> leaves;
  std::vector<std::pair<const ProtoNode*, std::size_t>> edges;
  auto walk = [&](auto&& self, const ProtoNode& n) -> void {
    if (n.is_leaf()) {
      leaves.push_back(ProtoLeaf{&n, edges});
      return;
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      edges.emplace_back(&n, i);
      self(self, n.children[i]);
      edges.pop_back();
    }
  };
  walk(walk, root);
  return leaves;
}

double leaf_prob(const ProtoLeaf& leaf, std::size_t x, std::size_t y) {
  double p = 1.0;
  for (const auto& [node, child] : leaf.edges) {
    const std::size_t input = node->owner == Owner::a ? x : y;
    p *= node->dists[input](child);
    if (p == 0.0) return 0.0;
  }
  return p;
}

void check_mu(const ProtocolTree& pi, const JointDist& mu) {
  if (mu.x_size() != pi.x_size || mu.y_size() != pi.y_size)
    throw std::invalid_argument("input prior does not match protocol input spaces");
}

std::pair<std::size_t, std::size_t> sample_joint(const JointDist& mu, DetStream& stream) {
  const double r = stream.next_double();
  double acc = 0.0;
  for (std::size_t x = 0; x < mu.x_size(); ++x) {
    for (std::size_t y = 0; y < mu.y_size(); ++y) {
      acc += mu(x, y);
      if (r < acc) return {x, y};
    }
  }
  return {mu.x_size() - 1, mu.y_size() - 1};
}

}  // namespace

void ProtocolTree::validate() const {
  if (x_size == 0 || y_size == 0) throw std::invalid_argument("ProtocolTree: empty input space");
  if (variants.empty()) throw std::invalid_argument("ProtocolTree: no variants");
  double sum = 0.0;
  for (const ProtocolVariant& v : variants) {
    if (!(v.prob >= 0.0)) throw std::invalid_argument("ProtocolTree: negative variant probability");
    sum += v.prob;
    if (v.root.is_leaf()) throw std::invalid_argument("ProtocolTree: variant root must be internal");
    validate_proto_node(v.root, x_size, y_size, std::nullopt);
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance)
    throw std::invalid_argument("ProtocolTree: variant probabilities do not sum to 1");
}

std::uint32_t ProtocolTree::rounds() const {
  std::uint32_t d = 0;
  for (const ProtocolVariant& v : variants) d = std::max(d, node_depth(v.root));
  return d;
}

bool ProtocolTree::uniform_depth() const {
  for (const ProtocolVariant& v : variants)
    if (!node_uniform(v.root, 0, node_depth(v.root))) return false;
  return true;
}

Transcript run_protocol(const ProtocolTree& pi, std::size_t x, std::size_t y, DetStream& rng) {
  if (x >= pi.x_size || y >= pi.y_size) throw std::invalid_argument("run_protocol: input out of range");
  Transcript t;
  // Public randomness first.
  const double rv = rng.next_double();
  double acc = 0.0;
  t.r = pi.variants.size() - 1;
  for (std::size_t r = 0; r < pi.variants.size(); ++r) {
    acc += pi.variants[r].prob;
    if (rv < acc) {
      t.r = r;
      break;
    }
  }
  const ProtoNode* n = &pi.variants[t.r].root;
  while (!n->is_leaf()) {
    const std::size_t input = n->owner == Owner::a ? x : y;
    const std::size_t child = rng.sample(n->dists[input]);
    t.path.push_back(child);
    t.labels.push_back(n->labels[child]);
    n = &n->children[child];
  }
  t.output = *n->output;
  return t;
}

TranscriptSpace transcript_distribution(const ProtocolTree& pi, const JointDist& mu,
                                        std::size_t max_states) {
  check_mu(pi, mu);
  TranscriptSpace ts;
  std::vector<std::vector<ProtoLeaf>> leaves_by_variant;
  for (std::size_t r = 0; r < pi.variants.size(); ++r) {
    leaves_by_variant.push_back(collect_proto_leaves(pi.variants[r].root));
    for (std::size_t l = 0; l < leaves_by_variant.back().size(); ++l)
      ts.transcripts.push_back(TranscriptSpace::Id{r, l});
  }
  const std::size_t nt = ts.transcripts.size();
  if (mu.x_size() * mu.y_size() * nt > max_states)
    throw std::invalid_argument("transcript_distribution: state-space cap exceeded");

  std::vector<double> probs(mu.x_size() * mu.y_size() * nt, 0.0);
  std::size_t t0 = 0;
  for (std::size_t r = 0; r < pi.variants.size(); ++r) {
    const double rp = pi.variants[r].prob;
    const auto& leaves = leaves_by_variant[r];
    for (std::size_t l = 0; l < leaves.size(); ++l) {
      for (std::size_t x = 0; x < mu.x_size(); ++x) {
        for (std::size_t y = 0; y < mu.y_size(); ++y) {
          const double m = mu(x, y);
          if (m == 0.0) continue;
          const double p = m * rp * leaf_prob(leaves[l], x, y);
          if (p != 0.0) probs[(x * mu.y_size() + y) * nt + (t0 + l)] += p;
        }
      }
    }
    t0 += leaves.size();
  }
  ts.joint = Joint3(mu.x_size(), mu.y_size(), nt, std::move(probs));
  return ts;
}

double internal_info_cost(const ProtocolTree& pi, const JointDist& mu) {
  const TranscriptSpace ts = transcript_distribution(pi, mu);
  return conditional_mutual_information(ts.joint, CmiTarget::xz_given_y) +
         conditional_mutual_information(ts.joint, CmiTarget::yz_given_x);
}

double external_info_cost(const ProtocolTree& pi, const JointDist& mu) {
  const TranscriptSpace ts = transcript_distribution(pi, mu);
  const std::size_t nxy = ts.joint.nx() * ts.joint.ny();
  const std::size_t nt = ts.joint.nz();
  std::vector<double> probs(nxy * nt);
  for (std::size_t x = 0; x < ts.joint.nx(); ++x)
    for (std::size_t y = 0; y < ts.joint.ny(); ++y)
      for (std::size_t t = 0; t < nt; ++t)
        probs[(x * ts.joint.ny() + y) * nt + t] = ts.joint(x, y, t);
  return mutual_information(JointDist(nxy, nt, std::move(probs)));
}

std::uint32_t comm_complexity(const ProtocolTree& pi) {
  std::uint32_t cc = 0;
  for (const ProtocolVariant& v : pi.variants) {
    for (const ProtoLeaf& leaf : collect_proto_leaves(v.root)) {
      std::uint32_t bits = 0;
      for (const auto& [node, child] : leaf.edges)
        bits += static_cast<std::uint32_t>(node->labels[child].size());
      cc = std::max(cc, bits);
    }
  }
  return cc;
}

// ---------------------------------------------------------------------------
// Posterior tracking and F_pi

SideBeliefWalker::SideBeliefWalker(const ProtoNode* root, Owner side, std::size_t own_input,
                                   Dist belief_other)
    : node_(root), side_(side), own_input_(own_input), belief_other_(std::move(belief_other)) {}

Dist SideBeliefWalker::side_dist() const {
  if (leads()) return node_->dists[own_input_];
  std::vector<double> mix(node_->children.size(), 0.0);
  for (std::size_t o = 0; o < belief_other_.size(); ++o) {
    const double w = belief_other_(o);
    if (w == 0.0) continue;
    const Dist& d = node_->dists[o];
    for (std::size_t c = 0; c < mix.size(); ++c) mix[c] += w * d(c);
  }
  const std::size_t n_mix = mix.size();
  return Dist(Universe{n_mix}, std::move(mix));
}

void SideBeliefWalker::descend(std::size_t child) {
  if (!leads()) {
    // Observed the other side's move; Bayes-update the posterior.
    std::vector<double> post(belief_other_.size());
    double denom = 0.0;
    for (std::size_t o = 0; o < post.size(); ++o) {
      post[o] = belief_other_(o) * node_->dists[o](child);
      denom += post[o];
    }
    if (denom < 1e-12) {
      // Zero-probability prefix; the subtree is unreachable, fill flat.
      post.assign(post.size(), 1.0 / static_cast<double>(post.size()));
    } else {
      for (double& p : post) p /= denom;
    }
    const std::size_t n_post = post.size();
    belief_other_ = Dist(Universe{n_post}, std::move(post));
  }
  node_ = &node_->children[child];
}

namespace {

CpjNode build_cpj_node(const SideBeliefWalker& wa, const SideBeliefWalker& wb) {
  const ProtoNode* n = wa.node();
  CpjNode out;
  if (n->is_leaf()) {
    out.output = *n->output;
    return out;
  }
  out.owner = n->owner;
  out.labels = n->labels;
  out.dist_a = wa.side_dist();
  out.dist_b = wb.side_dist();
  out.children.reserve(n->children.size());
  for (std::size_t c = 0; c < n->children.size(); ++c) {
    SideBeliefWalker ca = wa;
    SideBeliefWalker cb = wb;
    ca.descend(c);
    cb.descend(c);
    out.children.push_back(build_cpj_node(ca, cb));
  }
  return out;
}

}  // namespace

CpjInstance build_cpj(const ProtocolTree& pi, std::size_t x, std::size_t y, std::size_t r,
                      const JointDist& mu) {
  check_mu(pi, mu);
  if (r >= pi.variants.size()) throw std::invalid_argument("build_cpj: bad variant index");
  if (x >= pi.x_size || y >= pi.y_size) throw std::invalid_argument("build_cpj: input out of range");
  if (mu(x, y) == 0.0) throw std::invalid_argument("build_cpj: (x, y) outside support of mu");
  const ProtoNode& root = pi.variants[r].root;
  SideBeliefWalker wa(&root, Owner::a, x, mu.conditional_y_given_x(x));
  SideBeliefWalker wb(&root, Owner::b, y, mu.conditional_x_given_y(y));
  CpjInstance f;
  f.rounds = node_depth(root);
  f.root = build_cpj_node(wa, wb);
  f.validate();
  return f;
}

// ---------------------------------------------------------------------------
// Compression

namespace {

// Signed and clamped divergence costs along a path, via both sides'
// effective distributions.
struct PathCosts {
  double signed_cost = 0.0;
  double clamped_cost = 0.0;
};

PathCosts path_costs(SideBeliefWalker wa, SideBeliefWalker wb,
                     const std::vector<std::size_t>& path) {
  PathCosts costs;
  for (std::size_t child : path) {
    const Dist da = wa.side_dist();
    const Dist db = wb.side_dist();
    const bool a_owns = wa.leads();
    const double num = a_owns ? da(child) : db(child);
    const double den = a_owns ? db(child) : da(child);
    double e;
    if (num == 0.0 && den == 0.0) e = 0.0;
    else if (den == 0.0) e = kInfiniteBits;
    else if (num == 0.0) e = -kInfiniteBits;
    else e = std::log2(num / den);
    costs.signed_cost += e;
    costs.clamped_cost += std::max(0.0, e);
    wa.descend(child);
    wb.descend(child);
  }
  return costs;
}

}  // namespace

CompressRun compress(const ProtocolTree& pi, const JointDist& mu, double eps,
                     const SharedSeed& run_seed) {
  pi.validate();
  check_mu(pi, mu);
  if (!pi.uniform_depth())
    throw std::invalid_argument("compress: protocol must have uniform depth per variant");
  DetStream setup(derive_subseed(run_seed, kSetupSubseedIndex));
  CompressRun run;
  // Public draws: the input pair and the protocol's public randomness.
  std::tie(run.x, run.y) = sample_joint(mu, setup);
  const double rv = setup.next_double();
  double acc = 0.0;
  run.r = pi.variants.size() - 1;
  for (std::size_t r = 0; r < pi.variants.size(); ++r) {
    acc += pi.variants[r].prob;
    if (rv < acc) {
      run.r = r;
      break;
    }
  }
  const ProtoNode& root = pi.variants[run.r].root;
  run.rounds = node_depth(root);

  SideBeliefWalker wa(&root, Owner::a, run.x, mu.conditional_y_given_x(run.x));
  SideBeliefWalker wb(&root, Owner::b, run.y, mu.conditional_x_given_y(run.y));
  SamplerConfig cfg;
  cfg.eps = eps;
  PathEngine ea(std::make_unique<ProtoWalkSource>(wa), run_seed, run.rounds, cfg);
  PathEngine eb(std::make_unique<ProtoWalkSource>(wb), run_seed, run.rounds, cfg);
  PathRun pr = run_path_engines(ea, eb);

  run.path_a = pr.path_a;
  run.path_b = pr.path_b;
  run.stats = pr.stats;
  run.match = pr.match;
  const PathCosts costs = path_costs(wa, wb, run.path_a);
  run.div_signed = costs.signed_cost;
  run.div_clamped = costs.clamped_cost;

  auto fill = [&](const std::vector<std::size_t>& path, std::vector<std::string>& labels,
                  std::int64_t& output) {
    const ProtoNode* n = &root;
    for (std::size_t c : path) {
      labels.push_back(n->labels[c]);
      n = &n->children[c];
    }
    if (n->is_leaf()) output = *n->output;
  };
  fill(run.path_a, run.labels_a, run.output_a);
  fill(run.path_b, run.labels_b, run.output_b);
  return run;
}

// ---------------------------------------------------------------------------
// Parallel products

JointDist mu_power(const JointDist& mu, std::size_t n) {
  if (n == 0) throw std::invalid_argument("mu_power: n must be >= 1");
  JointDist acc = mu;
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<double> probs(acc.x_size() * mu.x_size() * acc.y_size() * mu.y_size());
    const std::size_t ys = acc.y_size() * mu.y_size();
    for (std::size_t xa = 0; xa < acc.x_size(); ++xa)
      for (std::size_t xb = 0; xb < mu.x_size(); ++xb)
        for (std::size_t ya = 0; ya < acc.y_size(); ++ya)
          for (std::size_t yb = 0; yb < mu.y_size(); ++yb)
            probs[(xa * mu.x_size() + xb) * ys + (ya * mu.y_size() + yb)] =
                acc(xa, ya) * mu(xb, yb);
    acc = JointDist(acc.x_size() * mu.x_size(), acc.y_size() * mu.y_size(), std::move(probs));
  }
  return acc;
}

namespace {

void require_uniform_binary(const ProtocolTree& pi) {
  pi.validate();
  if (!pi.is_private_coin())
    throw std::invalid_argument("parallel product requires a private-coin protocol");
  const ProtoNode& root = pi.variants[0].root;
  const std::uint32_t depth = node_depth(root);
  if (!node_uniform(root, 0, depth))
    throw std::invalid_argument("parallel product requires uniform depth");
  auto walk = [&](auto&& self, const ProtoNode& n) -> void {
    if (n.is_leaf()) {
      if (*n.output != 0 && *n.output != 1)
        throw std::invalid_argument("parallel product requires 0/1 leaf outputs");
      return;
    }
    if (n.children.size() != 2 || n.labels[0] != "0" || n.labels[1] != "1")
      throw std::invalid_argument("parallel product requires binary rounds with labels 0/1");
    for (const ProtoNode& c : n.children) self(self, c);
  };
  walk(walk, root);
}

struct ParallelBuild {
  std::size_t n;
  std::size_t x_size, y_size;

  ProtoNode build(const std::vector<const ProtoNode*>& nodes) const {
    ProtoNode out;
    if (nodes[0]->is_leaf()) {
      std::int64_t packed = 0;
      for (std::size_t i = 0; i < n; ++i) packed |= (*nodes[i]->output) << i;
      out.output = packed;
      return out;
    }
    out.owner = nodes[0]->owner;
    const std::size_t deg = std::size_t{1} << n;
    const std::size_t in_size = out.owner == Owner::a ? x_size : y_size;
    std::size_t in_total = 1;
    for (std::size_t i = 0; i < n; ++i) in_total *= in_size;

    out.labels.reserve(deg);
    out.children.reserve(deg);
    for (std::size_t combined = 0; combined < deg; ++combined) {
      std::string label(n, '0');
      std::vector<const ProtoNode*> sub(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bit = (combined >> (n - 1 - i)) & 1;
        label[i] = bit ? '1' : '0';
        sub[i] = &nodes[i]->children[bit];
      }
      out.labels.push_back(std::move(label));
      out.children.push_back(build(sub));
    }
    out.dists.reserve(in_total);
    for (std::size_t cin = 0; cin < in_total; ++cin) {
      // Decompose the combined input, copy 0 most significant.
      std::vector<std::size_t> digits(n);
      std::size_t rem = cin;
      for (std::size_t i = n; i-- > 0;) {
        digits[i] = rem % in_size;
        rem /= in_size;
      }
      std::vector<double> probs(deg);
      for (std::size_t combined = 0; combined < deg; ++combined) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t bit = (combined >> (n - 1 - i)) & 1;
          p *= nodes[i]->dists[digits[i]](bit);
        }
        probs[combined] = p;
      }
      out.dists.emplace_back(Universe{deg}, std::move(probs));
    }
    return out;
  }
};

}  // namespace

ProtocolTree parallel_protocol(const ProtocolTree& pi, std::size_t n, std::size_t max_states) {
  if (n == 0) throw std::invalid_argument("parallel_protocol: n must be >= 1");
  require_uniform_binary(pi);
  const ProtoNode& root = pi.variants[0].root;
  const std::uint32_t depth = node_depth(root);
  const double leaves = std::pow(2.0, double(n) * double(depth));
  if (leaves > double(max_states))
    throw std::invalid_argument("parallel_protocol: state-space cap exceeded");

  ProtocolTree out;
  out.x_size = 1;
  out.y_size = 1;
  for (std::size_t i = 0; i < n; ++i) {
    out.x_size *= pi.x_size;
    out.y_size *= pi.y_size;
  }
  std::vector<const ProtoNode*> roots(n, &root);
  out.variants.push_back(
      ProtocolVariant{1.0, ParallelBuild{n, pi.x_size, pi.y_size}.build(roots)});
  out.validate();
  return out;
}

namespace {

class ProductProtoWalkSource final : public PathSource {
 public:
  ProductProtoWalkSource(std::vector<SideBeliefWalker> copies) : copies_(std::move(copies)) {}

  bool leads() const override { return copies_[0].leads(); }

  Dist side_dist() const override {
    std::vector<double> acc{1.0};
    for (const SideBeliefWalker& w : copies_) {
      const Dist d = w.side_dist();
      std::vector<double> next(acc.size() * d.size());
      for (std::size_t i = 0; i < acc.size(); ++i)
        for (std::size_t c = 0; c < d.size(); ++c) next[i * d.size() + c] = acc[i] * d(c);
      acc = std::move(next);
    }
    const std::size_t n_acc = acc.size();
    return Dist(Universe{n_acc}, std::move(acc));
  }

  void descend(std::size_t child) override {
    const std::size_t n = copies_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t bit = (child >> (n - 1 - i)) & 1;
      copies_[i].descend(bit);
    }
  }

 private:
  std::vector<SideBeliefWalker> copies_;
};

}  // namespace

ParallelCompressRun compress_parallel(const ProtocolTree& pi, const JointDist& mu, std::size_t n,
                                      double eps, const SharedSeed& run_seed) {
  if (n == 0 || n > 32) throw std::invalid_argument("compress_parallel: n out of range");
  require_uniform_binary(pi);
  check_mu(pi, mu);
  const ProtoNode& root = pi.variants[0].root;
  const std::uint32_t depth = node_depth(root);

  DetStream setup(derive_subseed(run_seed, kSetupSubseedIndex));
  std::vector<SideBeliefWalker> wa, wb;
  wa.reserve(n);
  wb.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = sample_joint(mu, setup);
    wa.emplace_back(&root, Owner::a, x, mu.conditional_y_given_x(x));
    wb.emplace_back(&root, Owner::b, y, mu.conditional_x_given_y(y));
  }

  SamplerConfig cfg;
  cfg.eps = eps;
  PathEngine ea(std::make_unique<ProductProtoWalkSource>(wa), run_seed, depth, cfg);
  PathEngine eb(std::make_unique<ProductProtoWalkSource>(wb), run_seed, depth, cfg);
  PathRun pr = run_path_engines(ea, eb);

  ParallelCompressRun out;
  out.stats = pr.stats;
  out.match = pr.match;
  out.rounds = depth;
  // Costs along A's path: sum of per-copy edge costs.
  for (std::size_t step = 0; step < pr.path_a.size(); ++step) {
    const std::size_t child = pr.path_a[step];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t bit = (child >> (n - 1 - i)) & 1;
      const Dist da = wa[i].side_dist();
      const Dist db = wb[i].side_dist();
      const bool a_owns = wa[i].leads();
      const double num = a_owns ? da(bit) : db(bit);
      const double den = a_owns ? db(bit) : da(bit);
      double e;
      if (num == 0.0 && den == 0.0) e = 0.0;
      else if (den == 0.0) e = kInfiniteBits;
      else if (num == 0.0) e = -kInfiniteBits;
      else e = std::log2(num / den);
      out.div_signed += e;
      out.div_clamped += std::max(0.0, e);
      wa[i].descend(bit);
      wb[i].descend(bit);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-copy extraction (protocol tau)

SingleCopyProtocol::SingleCopyProtocol(const ProtocolTree& pi_n, JointDist mu, std::size_t n)
    : pi_n_(pi_n), mu_(std::move(mu)), n_(n), mu_x_(mu_.marginal_x()), mu_y_(mu_.marginal_y()) {
  if (n_ == 0) throw std::invalid_argument("SingleCopyProtocol: n must be >= 1");
  pi_n_.validate();
  if (!pi_n_.is_private_coin())
    throw std::invalid_argument("SingleCopyProtocol: pi_n must be private-coin");
  std::size_t xs = 1, ys = 1;
  for (std::size_t i = 0; i < n_; ++i) {
    xs *= mu_.x_size();
    ys *= mu_.y_size();
  }
  if (xs != pi_n_.x_size || ys != pi_n_.y_size)
    throw std::invalid_argument("SingleCopyProtocol: pi_n input spaces do not match mu^n");
}

void SingleCopyProtocol::enumerate_completions(
    std::size_t x, std::size_t y,
    const std::function<void(std::size_t, double, std::size_t, double,
                             const std::vector<std::size_t>&, const std::vector<std::size_t>&)>&
        fn) const {
  const std::size_t xs = mu_.x_size(), ys = mu_.y_size();
  for (std::size_t j = 0; j < n_; ++j) {
    // Public draws: X_i for i < j, Y_i for i > j.
    const std::size_t npub_x = j, npub_y = n_ - 1 - j;
    std::size_t pub_total = 1;
    for (std::size_t i = 0; i < npub_x; ++i) pub_total *= xs;
    for (std::size_t i = 0; i < npub_y; ++i) pub_total *= ys;
    for (std::size_t pub = 0; pub < pub_total; ++pub) {
      std::vector<std::size_t> pub_x(npub_x), pub_y(npub_y);
      std::size_t rem = pub;
      for (std::size_t i = npub_y; i-- > 0;) {
        pub_y[i] = rem % ys;
        rem /= ys;
      }
      for (std::size_t i = npub_x; i-- > 0;) {
        pub_x[i] = rem % xs;
        rem /= xs;
      }
      double pub_prob = 1.0;
      for (std::size_t v : pub_x) pub_prob *= mu_x_(v);
      for (std::size_t v : pub_y) pub_prob *= mu_y_(v);
      if (pub_prob == 0.0) continue;

      // Private completions: B's Y_i | X_i for i < j, A's X_i | Y_i for i > j.
      std::size_t priv_total = 1;
      for (std::size_t i = 0; i < npub_x; ++i) priv_total *= ys;
      for (std::size_t i = 0; i < npub_y; ++i) priv_total *= xs;
      for (std::size_t priv = 0; priv < priv_total; ++priv) {
        std::vector<std::size_t> priv_y(npub_x), priv_x(npub_y);
        std::size_t prem = priv;
        for (std::size_t i = npub_y; i-- > 0;) {
          priv_x[i] = prem % xs;
          prem /= xs;
        }
        for (std::size_t i = npub_x; i-- > 0;) {
          priv_y[i] = prem % ys;
          prem /= ys;
        }
        double priv_prob = 1.0;
        for (std::size_t i = 0; i < npub_x; ++i) {
          const double colsum = mu_x_(pub_x[i]);
          priv_prob *= mu_(pub_x[i], priv_y[i]) / colsum;
        }
        for (std::size_t i = 0; i < npub_y; ++i) {
          const double rowsum = mu_y_(pub_y[i]);
          priv_prob *= mu_(priv_x[i], pub_y[i]) / rowsum;
        }
        if (priv_prob == 0.0) continue;

        std::vector<std::size_t> xt(n_), yt(n_);
        for (std::size_t i = 0; i < j; ++i) {
          xt[i] = pub_x[i];
          yt[i] = priv_y[i];
        }
        xt[j] = x;
        yt[j] = y;
        for (std::size_t i = j + 1; i < n_; ++i) {
          xt[i] = priv_x[i - j - 1];
          yt[i] = pub_y[i - j - 1];
        }
        fn(j, pub_prob, pub, priv_prob, xt, yt);
      }
    }
  }
}

namespace {

std::size_t tuple_index(const std::vector<std::size_t>& digits, std::size_t base) {
  std::size_t v = 0;
  for (std::size_t d : digits) v = v * base + d;
  return v;
}

}  // namespace

double SingleCopyProtocol::internal_info_cost() const {
  const ProtoNode& root = pi_n_.variants[0].root;
  const auto leaves = collect_proto_leaves(root);

  // Dense transcript ids over (j, public draw, leaf).
  std::unordered_map<std::uint64_t, std::size_t> tid;
  auto transcript_id = [&](std::size_t j, std::size_t pub, std::size_t leaf) {
    if (pub >= (1u << 21) || leaf >= (1u << 21))
      throw std::invalid_argument("SingleCopyProtocol: transcript space too large");
    const std::uint64_t key = (static_cast<std::uint64_t>(j) << 42) |
                              (static_cast<std::uint64_t>(pub) << 21) |
                              static_cast<std::uint64_t>(leaf);
    auto [it, inserted] = tid.try_emplace(key, tid.size());
    return it->second;
  };

  struct Cell {
    std::size_t x, y, t;
    double p;
  };
  std::vector<Cell> cells;
  for (std::size_t x = 0; x < mu_.x_size(); ++x) {
    for (std::size_t y = 0; y < mu_.y_size(); ++y) {
      const double m = mu_(x, y);
      if (m == 0.0) continue;
      enumerate_completions(
          x, y,
          [&](std::size_t j, double pub_prob, std::size_t pub, double priv_prob,
              const std::vector<std::size_t>& xt, const std::vector<std::size_t>& yt) {
            const std::size_t cx = tuple_index(xt, mu_.x_size());
            const std::size_t cy = tuple_index(yt, mu_.y_size());
            for (std::size_t l = 0; l < leaves.size(); ++l) {
              const double lp = leaf_prob(leaves[l], cx, cy);
              if (lp == 0.0) continue;
              const double p = m * (1.0 / double(n_)) * pub_prob * priv_prob * lp;
              cells.push_back(Cell{x, y, transcript_id(j, pub, l), p});
            }
          });
    }
  }
  const std::size_t nt = tid.size();
  std::vector<double> probs(mu_.x_size() * mu_.y_size() * nt, 0.0);
  for (const Cell& c : cells) probs[(c.x * mu_.y_size() + c.y) * nt + c.t] += c.p;
  const Joint3 joint(mu_.x_size(), mu_.y_size(), nt, std::move(probs));
  return conditional_mutual_information(joint, CmiTarget::xz_given_y) +
         conditional_mutual_information(joint, CmiTarget::yz_given_x);
}

std::uint32_t SingleCopyProtocol::comm_complexity() const {
  return infocomp::comm_complexity(pi_n_);
}

double SingleCopyProtocol::error_against(
    const std::vector<std::vector<std::int64_t>>& f_table) const {
  const ProtoNode& root = pi_n_.variants[0].root;
  const auto leaves = collect_proto_leaves(root);
  double err = 0.0;
  for (std::size_t x = 0; x < mu_.x_size(); ++x) {
    for (std::size_t y = 0; y < mu_.y_size(); ++y) {
      const double m = mu_(x, y);
      if (m == 0.0) continue;
      const std::int64_t want = f_table[x][y];
      enumerate_completions(
          x, y,
          [&](std::size_t j, double pub_prob, std::size_t, double priv_prob,
              const std::vector<std::size_t>& xt, const std::vector<std::size_t>& yt) {
            const std::size_t cx = tuple_index(xt, mu_.x_size());
            const std::size_t cy = tuple_index(yt, mu_.y_size());
            for (const ProtoLeaf& leaf : leaves) {
              const double lp = leaf_prob(leaf, cx, cy);
              if (lp == 0.0) continue;
              const std::int64_t got = (*leaf.node->output >> j) & 1;
              if (got != want)
                err += m * (1.0 / double(n_)) * pub_prob * priv_prob * lp;
            }
          });
    }
  }
  return err;
}

std::int64_t SingleCopyProtocol::run(std::size_t x, std::size_t y, DetStream& rng) const {
  const std::size_t j = rng.next_index(n_);
  std::vector<std::size_t> xt(n_), yt(n_);
  for (std::size_t i = 0; i < j; ++i) {
    xt[i] = rng.sample(mu_x_);  // public
    yt[i] = rng.sample(mu_.conditional_y_given_x(xt[i]));  // B private
  }
  xt[j] = x;
  yt[j] = y;
  for (std::size_t i = j + 1; i < n_; ++i) {
    yt[i] = rng.sample(mu_y_);  // public
    xt[i] = rng.sample(mu_.conditional_x_given_y(yt[i]));  // A private
  }
  const std::size_t cx = tuple_index(xt, mu_.x_size());
  const std::size_t cy = tuple_index(yt, mu_.y_size());
  const Transcript t = run_protocol(pi_n_, cx, cy, rng);
  return (t.output >> j) & 1;
}

double per_coordinate_error(const ProtocolTree& pi_n, const JointDist& mu, std::size_t n,
                            std::size_t coord,
                            const std::vector<std::vector<std::int64_t>>& f_table) {
  pi_n.validate();
  if (!pi_n.is_private_coin())
    throw std::invalid_argument("per_coordinate_error: pi_n must be private-coin");
  if (coord >= n) throw std::invalid_argument("per_coordinate_error: bad coordinate");
  const ProtoNode& root = pi_n.variants[0].root;
  const auto leaves = collect_proto_leaves(root);
  const JointDist mun = mu_power(mu, n);
  const std::size_t xs = mu.x_size(), ys = mu.y_size();

  double err = 0.0;
  for (std::size_t cx = 0; cx < mun.x_size(); ++cx) {
    for (std::size_t cy = 0; cy < mun.y_size(); ++cy) {
      const double m = mun(cx, cy);
      if (m == 0.0) continue;
      // Extract coordinate `coord` (copy 0 most significant).
      std::size_t xd = cx, yd = cy;
      for (std::size_t i = n - 1; i > coord; --i) {
        xd /= xs;
        yd /= ys;
      }
      const std::size_t xi = xd % xs;
      const std::size_t yi = yd % ys;
      const std::int64_t want = f_table[xi][yi];
      for (const ProtoLeaf& leaf : leaves) {
        const double lp = leaf_prob(leaf, cx, cy);
        if (lp == 0.0) continue;
        const std::int64_t got = (*leaf.node->output >> coord) & 1;
        if (got != want) err += m * lp;
      }
    }
  }
  return err;
}

}  // namespace infocomp
