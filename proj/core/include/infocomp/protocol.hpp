#pragma once

// Generic two-party communication protocols over a finite input prior:
// exact transcript distributions and information costs, the reduction
// of a protocol plus inputs to a correlated pointer jumping instance
// (with Bayes posterior tracking), protocol compression, parallel
// products, and single-copy extraction.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "infocomp/cpj.hpp"
#include "infocomp/dist.hpp"
#include "infocomp/path_engine.hpp"
#include "infocomp/shared_randomness.hpp"

namespace infocomp {

struct ProtoNode {
  Owner owner = Owner::a;
  std::vector<std::string> labels;
  std::vector<ProtoNode> children;
  std::vector<Dist> dists;             // per owner-input symbol, each over children
  std::optional<std::int64_t> output;  // leaves only

  bool is_leaf() const { return children.empty(); }
};

/// Public-coin protocol: a distribution over private-coin trees.
struct ProtocolVariant {
  double prob = 1.0;
  ProtoNode root;
};

struct ProtocolTree {
  std::size_t x_size = 0;
  std::size_t y_size = 0;
  std::vector<ProtocolVariant> variants;

  void validate() const;
  /// Number of rounds: maximum tree depth over the public randomness.
  std::uint32_t rounds() const;
  bool uniform_depth() const;
  bool is_private_coin() const { return variants.size() == 1; }
};

/// Transcript of one run: the public-randomness index followed by the
/// message path.
struct Transcript {
  std::size_t r = 0;
  std::vector<std::size_t> path;
  std::vector<std::string> labels;
  std::int64_t output = 0;
};

/// Walks the tree, sampling each node's child from the owner's
/// distribution for their input.
Transcript run_protocol(const ProtocolTree& pi, std::size_t x, std::size_t y, DetStream& rng);

/// Exact joint distribution of inputs and transcript, by enumeration
/// over public randomness and paths. Transcripts are identified by
/// (variant, DFS leaf index) pairs listed in `transcripts`.
struct TranscriptSpace {
  struct Id {
    std::size_t r;
    std::size_t leaf;
  };
  std::vector<Id> transcripts;
  Joint3 joint;  // axes: X, Y, transcript
};
TranscriptSpace transcript_distribution(const ProtocolTree& pi, const JointDist& mu,
                                        std::size_t max_states = 1'000'000);

/// IC_mu(pi) = I(T;X|Y) + I(T;Y|X), exact.
double internal_info_cost(const ProtocolTree& pi, const JointDist& mu);

/// I(XY;T), exact.
double external_info_cost(const ProtocolTree& pi, const JointDist& mu);

/// Maximum number of label bits on any root-to-leaf path, over all
/// public randomness.
std::uint32_t comm_complexity(const ProtocolTree& pi);

/// One side's Bayes-tracking walk over a variant tree: keeps the
/// posterior over the other party's input given own input and the
/// prefix, and yields this side's message distribution at each node.
class SideBeliefWalker {
 public:
  SideBeliefWalker(const ProtoNode* root, Owner side, std::size_t own_input, Dist belief_other);

  const ProtoNode* node() const { return node_; }
  bool leads() const { return node_->owner == side_; }
  /// Owner side: pi's own-input distribution; follower side: posterior
  /// mixture of the owner's distributions.
  Dist side_dist() const;
  void descend(std::size_t child);
  const Dist& belief() const { return belief_other_; }

 private:
  const ProtoNode* node_;
  Owner side_;
  std::size_t own_input_;
  Dist belief_other_;
};

/// PathSource adapter over a single belief walker (one endpoint's view
/// of a compression run).
class ProtoWalkSource final : public PathSource {
 public:
  explicit ProtoWalkSource(SideBeliefWalker w) : w_(std::move(w)) {}
  bool leads() const override { return w_.leads(); }
  Dist side_dist() const override { return w_.side_dist(); }
  void descend(std::size_t child) override { w_.descend(child); }

 private:
  SideBeliefWalker w_;
};

/// The pointer-jumping instance F_pi(x, y, r): same shape as variant r,
/// each side's child distribution as in SideBeliefWalker. (x, y) must
/// be in the support of mu.
CpjInstance build_cpj(const ProtocolTree& pi, std::size_t x, std::size_t y, std::size_t r,
                      const JointDist& mu);

/// One compression run: inputs and public randomness sampled from the
/// run seed, then the F_pi path sampled with one one-shot sampling per
/// round. Conditioned on the match event, both transcripts are equal
/// and exactly distributed as pi(X,Y) | x,y,r.
struct CompressRun {
  std::size_t x = 0, y = 0, r = 0;
  std::vector<std::size_t> path_a, path_b;
  std::vector<std::string> labels_a, labels_b;
  std::int64_t output_a = 0, output_b = 0;
  bool match = false;
  RunStats stats;
  double div_signed = 0.0;   // along A's path
  double div_clamped = 0.0;  // per-edge clamped, for sqrt terms
  std::uint32_t rounds = 0;
};
CompressRun compress(const ProtocolTree& pi, const JointDist& mu, double eps,
                     const SharedSeed& run_seed);

/// mu^n over tuple inputs (copy 0 most significant in the tuple index).
JointDist mu_power(const JointDist& mu, std::size_t n);

/// Explicit parallel product pi^n: round d transmits the d'th bit of
/// every copy. Requires a private-coin pi with uniform binary round
/// structure and 0/1 leaf outputs; copy i's output lands in bit i.
ProtocolTree parallel_protocol(const ProtocolTree& pi, std::size_t n,
                               std::size_t max_states = 1'000'000);

/// Compression of pi^n without materializing the product tree: the
/// product distributions are assembled per node from n per-copy
/// posterior walkers. Per-copy inputs are sampled from mu.
struct ParallelCompressRun {
  bool match = false;
  RunStats stats;
  double div_signed = 0.0;
  double div_clamped = 0.0;
  std::uint32_t rounds = 0;
};
ParallelCompressRun compress_parallel(const ProtocolTree& pi, const JointDist& mu, std::size_t n,
                                      double eps, const SharedSeed& run_seed);

/// Single-copy protocol tau extracted from a protocol for n copies:
/// publicly samples the coordinate J and the straddling inputs,
/// privately completes the rest, and embeds (x, y) at coordinate J.
/// CC(tau) = CC(pi_n); IC_mu(tau) <= IC_{mu^n}(pi_n) / n.
class SingleCopyProtocol {
 public:
  /// pi_n must be a private-coin protocol for n copies over mu^n with
  /// bit-packed per-copy outputs (as built by parallel_protocol).
  SingleCopyProtocol(const ProtocolTree& pi_n, JointDist mu, std::size_t n);

  double internal_info_cost() const;
  std::uint32_t comm_complexity() const;

  /// P[output != f(x,y)] with (x,y) ~ mu, exact.
  double error_against(const std::vector<std::vector<std::int64_t>>& f_table) const;

  /// Executes tau once on fixed inputs; returns the embedded
  /// coordinate's output.
  std::int64_t run(std::size_t x, std::size_t y, DetStream& rng) const;

 private:
  // Enumerates (j, publics, privates) completions for fixed (x, y).
  void enumerate_completions(std::size_t x, std::size_t y,
                             const std::function<void(std::size_t j, double pub_prob,
                                                      std::size_t pub_id, double priv_prob,
                                                      const std::vector<std::size_t>& xs,
                                                      const std::vector<std::size_t>& ys)>& fn)
      const;

  ProtocolTree pi_n_;
  JointDist mu_;
  std::size_t n_;
  Dist mu_x_, mu_y_;
};

/// Per-coordinate error of a protocol computing n copies of f: the
/// probability that coordinate `coord`'s output differs from
/// f(x_coord, y_coord), exact over mu^n.
double per_coordinate_error(const ProtocolTree& pi_n, const JointDist& mu, std::size_t n,
                            std::size_t coord,
                            const std::vector<std::vector<std::int64_t>>& f_table);

}  // namespace infocomp
