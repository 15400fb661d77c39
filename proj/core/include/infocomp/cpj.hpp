#pragma once

// Correlated pointer jumping: a rooted tree whose every non-leaf node
// carries two distributions over its children, one known to each
// player. Divergence costs measure the gap between the two sides'
// knowledge; the correct leaf distribution is the one induced by always
// sampling from the owner's distribution.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infocomp/dist.hpp"
#include "infocomp/info.hpp"
#include "infocomp/path_engine.hpp"

namespace infocomp {

enum class Owner : std::uint8_t { a, b };

inline Owner other(Owner o) { return o == Owner::a ? Owner::b : Owner::a; }

struct CpjNode {
  Owner owner = Owner::a;                // internal nodes only
  std::vector<std::string> labels;       // prefix-free child labels
  std::vector<CpjNode> children;
  std::optional<Dist> dist_a;            // over children, A's knowledge
  std::optional<Dist> dist_b;            // over children, B's knowledge
  std::optional<std::int64_t> output;    // leaves only

  bool is_leaf() const { return children.empty(); }
};

struct CpjInstance {
  CpjNode root;
  std::uint32_t rounds = 1;

  /// Checks structural invariants: prefix-free labels, dists matching
  /// the child set, leaf outputs, ownership alternating with depth,
  /// depth <= rounds. Throws std::invalid_argument on violation.
  void validate() const;

  /// True when every leaf sits at depth exactly `rounds`; required for
  /// interactive path sampling (see path_engine.hpp).
  bool uniform_depth() const;
};

/// Signed per-edge divergence cost: log2 of owner-probability over
/// other-probability for the child at `child_index`. +inf when the
/// other side assigns 0 and the owner does not; a both-zero edge costs 0.
double edge_divergence(const CpjNode& v, std::size_t child_index);

/// DFS (left-to-right) leaf enumeration with root-to-leaf child paths.
struct LeafInfo {
  const CpjNode* node;
  std::vector<std::size_t> path;
};
std::vector<LeafInfo> collect_leaves(const CpjNode& root);

/// Maps a root-to-leaf child-index path to the DFS leaf index.
std::size_t leaf_index_for_path(const CpjNode& root, const std::vector<std::size_t>& path);

/// Exact leaf distribution induced by the owner-side distributions,
/// over the DFS leaf enumeration.
Dist correct_distribution(const CpjInstance& f);

/// Expected path divergence cost under the correct distribution; +inf
/// if an infinite edge lies on a positive-probability path.
double instance_divergence(const CpjInstance& f);

/// Divergence cost of a specific root-to-leaf path (signed sum).
double path_divergence(const CpjNode& root, const std::vector<std::size_t>& path);

/// Like path_divergence but with each edge clamped at 0, for the
/// square-root terms of communication bounds.
double path_divergence_clamped(const CpjNode& root, const std::vector<std::size_t>& path);

/// Per-run communication bound of k-round path sampling:
///   D(T) + 2k log2(1/eps) + 5 sqrt(k * D(T)_clamped) + 9k
/// where D(T) is the signed path cost and the sqrt uses the per-edge
/// clamped cost.
double path_comm_bound(double signed_cost, double clamped_cost, std::uint32_t k, double eps);

/// Explicit product of m instances: nodes are tuples (component 0 most
/// significant), labels concatenate, distributions multiply. Components
/// must share depth (uniform) and per-level ownership, and carry 0/1
/// leaf outputs, which pack into bit i of the product leaf output.
CpjInstance product_instance(const std::vector<CpjInstance>& instances);

/// One side's walk over a CPJ instance (PathSource for PathEngine).
class CpjSideSource final : public PathSource {
 public:
  CpjSideSource(const CpjInstance& f, Owner side) : node_(&f.root), side_(side) {}
  bool leads() const override { return node_->owner == side_; }
  Dist side_dist() const override {
    return side_ == Owner::a ? *node_->dist_a : *node_->dist_b;
  }
  void descend(std::size_t child) override { node_ = &node_->children[child]; }
  const CpjNode* node() const { return node_; }

 private:
  const CpjNode* node_;
  Owner side_;
};

/// Implicit product walk over m component instances; materializes the
/// product distribution per node (component 0 most significant). Keeps
/// the product construction usable when the explicit tree would not fit.
class ProductCpjSource final : public PathSource {
 public:
  ProductCpjSource(const std::vector<const CpjInstance*>& components, Owner side);
  bool leads() const override;
  Dist side_dist() const override;
  void descend(std::size_t child) override;
  const std::vector<const CpjNode*>& nodes() const { return nodes_; }

 private:
  std::vector<const CpjNode*> nodes_;
  Owner side_;
};

/// Root-to-leaf sample with its divergence cost.
struct PathSample {
  std::vector<std::string> labels;
  std::vector<std::size_t> child_indices;
  std::int64_t leaf_output = 0;
  std::size_t leaf_index = 0;
  double divergence_cost = 0.0;
};

struct PathSampleRun {
  PathSample path_a;
  PathSample path_b;
  RunStats stats;
  bool match = false;
};

/// Samples a path by running one one-shot sampling per level. Requires
/// uniform depth. Conditioned on all levels matching, the sampled path
/// has the correct distribution.
PathSampleRun sample_path(const CpjInstance& f, const SharedSeed& seed, double eps,
                          const SamplerConfig* cfg = nullptr);

/// Promise-problem solver: samples a path and reads each side's leaf label.
struct SolveResult {
  std::int64_t label_a = 0;
  std::int64_t label_b = 0;
  RunStats stats;
  bool match = false;
};
SolveResult solve_cpj(const CpjInstance& f, const SharedSeed& seed, double eps);

/// Solves n promise instances at once: ceil(log2 n) replicas per
/// instance (at least one), all sampled through one implicit product
/// walk, answers by per-instance majority (ties go to the lowest
/// replica). Returns per-instance labels from each side.
struct SolveManyResult {
  std::vector<std::int64_t> labels_a;
  std::vector<std::int64_t> labels_b;
  RunStats stats;
  bool match = false;
};
SolveManyResult solve_cpj_n(const std::vector<CpjInstance>& instances, const SharedSeed& seed,
                            double eps);

}  // namespace infocomp
