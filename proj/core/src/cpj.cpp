#include "infocomp/cpj.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace infocomp {

namespace {

void validate_labels(const std::vector<std::string>& labels) {
  for (const auto& l : labels) {
    if (l.empty()) throw std::invalid_argument("CpjInstance: empty child label");
    for (char c : l)
      if (c != '0' && c != '1')
        throw std::invalid_argument("CpjInstance: labels must be binary strings");
  }
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i + 1].starts_with(sorted[i]) || sorted[i] == sorted[i + 1])
      throw std::invalid_argument("CpjInstance: child labels not prefix-free");
  }
}

void validate_node(const CpjNode& n, std::uint32_t depth, std::uint32_t rounds,
                   std::optional<Owner> expected_owner) {
  if (n.is_leaf()) {
    if (!n.output) throw std::invalid_argument("CpjInstance: leaf without output");
    return;
  }
  if (depth >= rounds) throw std::invalid_argument("CpjInstance: path longer than rounds");
  if (n.output) throw std::invalid_argument("CpjInstance: internal node with output");
  if (expected_owner && n.owner != *expected_owner)
    throw std::invalid_argument("CpjInstance: ownership must alternate with depth");
  if (n.labels.size() != n.children.size())
    throw std::invalid_argument("CpjInstance: labels do not match children");
  validate_labels(n.labels);
  if (!n.dist_a || !n.dist_b)
    throw std::invalid_argument("CpjInstance: internal node missing a distribution");
  if (n.dist_a->size() != n.children.size() || n.dist_b->size() != n.children.size())
    throw std::invalid_argument("CpjInstance: distribution size does not match children");
  for (const CpjNode& c : n.children) validate_node(c, depth + 1, rounds, other(n.owner));
}

bool node_uniform_depth(const CpjNode& n, std::uint32_t depth, std::uint32_t rounds) {
  if (n.is_leaf()) return depth == rounds;
  for (const CpjNode& c : n.children)
    if (!node_uniform_depth(c, depth + 1, rounds)) return false;
  return true;
}

std::size_t count_leaves(const CpjNode& n) {
  if (n.is_leaf()) return 1;
  std::size_t total = 0;
  for (const CpjNode& c : n.children) total += count_leaves(c);
  return total;
}

}  // namespace

void CpjInstance::validate() const {
  if (rounds == 0) throw std::invalid_argument("CpjInstance: rounds must be >= 1");
  if (root.is_leaf()) throw std::invalid_argument("CpjInstance: root must be internal");
  validate_node(root, 0, rounds, std::nullopt);
}

bool CpjInstance::uniform_depth() const { return node_uniform_depth(root, 0, rounds); }

double edge_divergence(const CpjNode& v, std::size_t child_index) {
  const double pa = (*v.dist_a)(child_index);
  const double pb = (*v.dist_b)(child_index);
  const double num = v.owner == Owner::a ? pa : pb;
  const double den = v.owner == Owner::a ? pb : pa;
  if (num == 0.0 && den == 0.0) return 0.0;  // unreachable under the correct distribution
  if (den == 0.0) return kInfiniteBits;
  if (num == 0.0) return -kInfiniteBits;
  return std::log2(num / den);
}

std::vector<LeafInfo> collect_leaves(const CpjNode& root) {
  std::vector<LeafInfo> leaves;
  std::vector<std::size_t> path;
  auto walk = [&](auto&& self, const CpjNode& n) -> void {
    if (n.is_leaf()) {
      leaves.push_back(LeafInfo{&n, path});
      return;
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      path.push_back(i);
      self(self, n.children[i]);
      path.pop_back();
    }
  };
  walk(walk, root);
  return leaves;
}

std::size_t leaf_index_for_path(const CpjNode& root, const std::vector<std::size_t>& path) {
  const CpjNode* n = &root;
  std::size_t index = 0;
  for (std::size_t step : path) {
    for (std::size_t i = 0; i < step; ++i) index += count_leaves(n->children[i]);
    n = &n->children[step];
  }
  if (!n->is_leaf()) throw std::invalid_argument("leaf_index_for_path: path ends at internal node");
  return index;
}

Dist correct_distribution(const CpjInstance& f) {
  std::vector<double> probs;
  auto walk = [&](auto&& self, const CpjNode& n, double acc) -> void {
    if (n.is_leaf()) {
      probs.push_back(acc);
      return;
    }
    const Dist& own = n.owner == Owner::a ? *n.dist_a : *n.dist_b;
    for (std::size_t i = 0; i < n.children.size(); ++i)
      self(self, n.children[i], acc * own(i));
  };
  walk(walk, f.root, 1.0);
  const std::size_t n_probs = probs.size();
  return Dist(Universe{n_probs}, std::move(probs));
}

double instance_divergence(const CpjInstance& f) {
  auto walk = [&](auto&& self, const CpjNode& n) -> double {
    if (n.is_leaf()) return 0.0;
    const Dist& own = n.owner == Owner::a ? *n.dist_a : *n.dist_b;
    double total = 0.0;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      const double p = own(i);
      if (p == 0.0) continue;
      const double e = edge_divergence(n, i);
      if (std::isinf(e)) return kInfiniteBits;
      const double sub = self(self, n.children[i]);
      if (std::isinf(sub)) return kInfiniteBits;
      total += p * (e + sub);
    }
    return total;
  };
  return walk(walk, f.root);
}

double path_divergence(const CpjNode& root, const std::vector<std::size_t>& path) {
  const CpjNode* n = &root;
  double total = 0.0;
  for (std::size_t step : path) {
    total += edge_divergence(*n, step);
    n = &n->children[step];
  }
  return total;
}

double path_divergence_clamped(const CpjNode& root, const std::vector<std::size_t>& path) {
  const CpjNode* n = &root;
  double total = 0.0;
  for (std::size_t step : path) {
    total += std::max(0.0, edge_divergence(*n, step));
    n = &n->children[step];
  }
  return total;
}

double path_comm_bound(double signed_cost, double clamped_cost, std::uint32_t k, double eps) {
  const double kd = static_cast<double>(k);
  return signed_cost + 2.0 * kd * std::log2(1.0 / eps) +
         5.0 * std::sqrt(kd * std::max(0.0, clamped_cost)) + 9.0 * kd;
}

// ---------------------------------------------------------------------------
// Products

namespace {

struct ProductBuild {
  const std::vector<CpjInstance>& parts;

  CpjNode build(const std::vector<const CpjNode*>& nodes) const {
    const bool leaf = nodes[0]->is_leaf();
    for (const CpjNode* n : nodes)
      if (n->is_leaf() != leaf)
        throw std::invalid_argument("product_instance: components disagree on depth");
    CpjNode out;
    if (leaf) {
      std::int64_t packed = 0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::int64_t o = *nodes[i]->output;
        if (o != 0 && o != 1)
          throw std::invalid_argument("product_instance: leaf outputs must be 0/1");
        packed |= o << i;
      }
      out.output = packed;
      return out;
    }
    out.owner = nodes[0]->owner;
    for (const CpjNode* n : nodes)
      if (n->owner != out.owner)
        throw std::invalid_argument("product_instance: per-level ownership differs");

    std::size_t total = 1;
    for (const CpjNode* n : nodes) total *= n->children.size();
    out.labels.reserve(total);
    out.children.reserve(total);
    std::vector<double> pa(total), pb(total);
    std::vector<std::size_t> digits(nodes.size());
    for (std::size_t combined = 0; combined < total; ++combined) {
      std::size_t rem = combined;
      for (std::size_t i = nodes.size(); i-- > 0;) {
        digits[i] = rem % nodes[i]->children.size();
        rem /= nodes[i]->children.size();
      }
      std::string label;
      double prod_a = 1.0, prod_b = 1.0;
      std::vector<const CpjNode*> sub(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        label += nodes[i]->labels[digits[i]];
        prod_a *= (*nodes[i]->dist_a)(digits[i]);
        prod_b *= (*nodes[i]->dist_b)(digits[i]);
        sub[i] = &nodes[i]->children[digits[i]];
      }
      out.labels.push_back(std::move(label));
      pa[combined] = prod_a;
      pb[combined] = prod_b;
      out.children.push_back(build(sub));
    }
    out.dist_a = Dist(Universe{total}, std::move(pa));
    out.dist_b = Dist(Universe{total}, std::move(pb));
    return out;
  }
};

}  // namespace

CpjInstance product_instance(const std::vector<CpjInstance>& instances) {
  if (instances.empty()) throw std::invalid_argument("product_instance: no components");
  if (instances.size() > 63) throw std::invalid_argument("product_instance: too many components");
  const std::uint32_t rounds = instances[0].rounds;
  for (const CpjInstance& f : instances) {
    f.validate();
    if (f.rounds != rounds) throw std::invalid_argument("product_instance: depth mismatch");
    if (!f.uniform_depth())
      throw std::invalid_argument("product_instance: components must have uniform depth");
  }
  std::vector<const CpjNode*> roots;
  roots.reserve(instances.size());
  for (const CpjInstance& f : instances) roots.push_back(&f.root);
  CpjInstance out;
  out.rounds = rounds;
  out.root = ProductBuild{instances}.build(roots);
  out.validate();
  return out;
}

ProductCpjSource::ProductCpjSource(const std::vector<const CpjInstance*>& components, Owner side)
    : side_(side) {
  if (components.empty()) throw std::invalid_argument("ProductCpjSource: no components");
  double total = 1.0;
  for (const CpjInstance* f : components) {
    if (f->root.owner != components[0]->root.owner)
      throw std::invalid_argument("ProductCpjSource: per-level ownership differs");
    nodes_.push_back(&f->root);
    total *= static_cast<double>(f->root.children.size());
  }
  if (total > (1u << 22))
    throw std::invalid_argument("ProductCpjSource: product universe too large");
}

bool ProductCpjSource::leads() const { return nodes_[0]->owner == side_; }

Dist ProductCpjSource::side_dist() const {
  std::vector<double> acc{1.0};
  for (const CpjNode* n : nodes_) {
    const Dist& d = side_ == Owner::a ? *n->dist_a : *n->dist_b;
    std::vector<double> next(acc.size() * d.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
      for (std::size_t c = 0; c < d.size(); ++c) next[i * d.size() + c] = acc[i] * d(c);
    acc = std::move(next);
  }
  const std::size_t n_acc = acc.size();
  return Dist(Universe{n_acc}, std::move(acc));
}

void ProductCpjSource::descend(std::size_t child) {
  std::size_t rem = child;
  std::vector<std::size_t> digits(nodes_.size());
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    digits[i] = rem % nodes_[i]->children.size();
    rem /= nodes_[i]->children.size();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_[i] = &nodes_[i]->children[digits[i]];
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

PathSample make_path_sample(const CpjInstance& f, const std::vector<std::size_t>& indices) {
  PathSample s;
  s.child_indices = indices;
  const CpjNode* n = &f.root;
  for (std::size_t step : indices) {
    s.labels.push_back(n->labels[step]);
    n = &n->children[step];
  }
  s.divergence_cost = path_divergence(f.root, indices);
  if (n->is_leaf() && indices.size() == f.rounds) {
    s.leaf_output = *n->output;
    s.leaf_index = leaf_index_for_path(f.root, indices);
  }
  return s;
}

}  // namespace

PathSampleRun sample_path(const CpjInstance& f, const SharedSeed& seed, double eps,
                          const SamplerConfig* cfg) {
  f.validate();
  if (!f.uniform_depth())
    throw std::invalid_argument("sample_path: instance must have uniform depth");
  SamplerConfig c;
  if (cfg) c = *cfg;
  c.eps = cfg ? cfg->eps : eps;
  PathEngine ea(std::make_unique<CpjSideSource>(f, Owner::a), seed, f.rounds, c);
  PathEngine eb(std::make_unique<CpjSideSource>(f, Owner::b), seed, f.rounds, c);
  PathRun run = run_path_engines(ea, eb);

  PathSampleRun out;
  out.path_a = make_path_sample(f, run.path_a);
  out.path_b = make_path_sample(f, run.path_b);
  out.stats = run.stats;
  out.match = run.match;
  return out;
}

SolveResult solve_cpj(const CpjInstance& f, const SharedSeed& seed, double eps) {
  PathSampleRun run = sample_path(f, seed, eps);
  SolveResult r;
  r.label_a = run.path_a.leaf_output;
  r.label_b = run.path_b.leaf_output;
  r.stats = run.stats;
  r.match = run.match;
  return r;
}

SolveManyResult solve_cpj_n(const std::vector<CpjInstance>& instances, const SharedSeed& seed,
                            double eps) {
  if (instances.empty()) throw std::invalid_argument("solve_cpj_n: no instances");
  const std::size_t n = instances.size();
  const std::uint32_t rounds = instances[0].rounds;
  for (const CpjInstance& f : instances) {
    f.validate();
    if (f.rounds != rounds) throw std::invalid_argument("solve_cpj_n: depth mismatch");
    if (!f.uniform_depth())
      throw std::invalid_argument("solve_cpj_n: instances must have uniform depth");
  }
  const std::size_t replicas =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log2(double(n)))));
  std::vector<const CpjInstance*> components;
  components.reserve(n * replicas);
  for (const CpjInstance& f : instances)
    for (std::size_t r = 0; r < replicas; ++r) components.push_back(&f);

  SamplerConfig cfg;
  cfg.eps = eps;
  PathEngine ea(std::make_unique<ProductCpjSource>(components, Owner::a), seed, rounds, cfg);
  PathEngine eb(std::make_unique<ProductCpjSource>(components, Owner::b), seed, rounds, cfg);
  PathRun run = run_path_engines(ea, eb);

  // Projects a product path to each component's leaf output.
  auto project_labels = [&](const std::vector<std::size_t>& path) {
    std::vector<const CpjNode*> nodes;
    for (const CpjInstance* f : components) nodes.push_back(&f->root);
    for (std::size_t combined : path) {
      std::size_t rem = combined;
      std::vector<std::size_t> digits(nodes.size());
      for (std::size_t i = nodes.size(); i-- > 0;) {
        digits[i] = rem % nodes[i]->children.size();
        rem /= nodes[i]->children.size();
      }
      for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = &nodes[i]->children[digits[i]];
    }
    std::vector<std::int64_t> labels(n, 0);
    if (path.size() != rounds) return labels;  // aborted run; values unused
    for (std::size_t i = 0; i < n; ++i) {
      std::map<std::int64_t, std::size_t> counts;
      for (std::size_t r = 0; r < replicas; ++r) counts[*nodes[i * replicas + r]->output]++;
      const std::int64_t first = *nodes[i * replicas]->output;
      std::int64_t best = first;
      std::size_t best_count = 0;
      for (const auto& [label, count] : counts) {
        if (count > best_count) {
          best = label;
          best_count = count;
        }
      }
      // Majority with ties resolved toward the lowest replica.
      if (counts[first] == best_count) best = first;
      labels[i] = best;
    }
    return labels;
  };

  SolveManyResult out;
  out.labels_a = project_labels(run.path_a);
  out.labels_b = project_labels(run.path_b);
  out.stats = run.stats;
  out.match = run.match;
  return out;
}

}  // namespace infocomp
