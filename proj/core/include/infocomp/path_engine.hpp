#pragma once

// Multi-round correlated path sampling: one one-shot sampling run per
// tree level, the owner of the current node acting as the P-side. Each
// endpoint follows its own sampled/guessed child, so the two walks can
// silently diverge; node ownership alternates with depth, which keeps
// the message schedule identical on both sides even then. Every level
// draws its randomness from a per-depth subseed, so the node samplings
// never share tape or hash domains.
//
// The walk must have uniform depth (every leaf at depth == rounds):
// otherwise a diverged pair could disagree about when the run ends,
// and resynchronizing would cost bits the communication bound does not
// allow for.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "infocomp/sampler.hpp"

namespace infocomp {

/// One side's view of a walk: its own distribution over the current
/// node's children and whether it owns (leads) the node.
class PathSource {
 public:
  virtual ~PathSource() = default;
  virtual bool leads() const = 0;
  virtual Dist side_dist() const = 0;
  virtual void descend(std::size_t child) = 0;
};

/// Per-depth subseeds; both endpoints derive the same sequence.
inline SharedSeed round_seed(const SharedSeed& run_seed, std::uint32_t depth) {
  return derive_subseed(run_seed, depth);
}

/// One endpoint of a multi-round path sampling run.
class PathEngine {
 public:
  PathEngine(std::unique_ptr<PathSource> source, SharedSeed run_seed, std::uint32_t rounds,
             SamplerConfig cfg);

  std::optional<Message> next_message();
  void on_message(const Message& m);
  bool finished() const { return phase_ != Phase::running; }
  Phase phase() const { return phase_; }
  Outcome abort_reason() const { return abort_reason_; }

  /// Child indices chosen at each level (complete only when done).
  const std::vector<std::size_t>& path() const { return path_; }
  std::uint64_t bits_sent() const { return bits_sent_; }
  std::uint64_t bits_received() const { return bits_received_; }
  std::uint32_t total_iterations() const { return total_iterations_; }

 private:
  void start_level();
  void settle_level();

  std::unique_ptr<PathSource> source_;
  SharedSeed run_seed_;
  std::uint32_t rounds_;
  SamplerConfig cfg_;
  Phase phase_ = Phase::running;
  Outcome abort_reason_ = Outcome::abort_t_max;
  std::uint32_t depth_ = 0;
  std::vector<std::size_t> path_;
  std::unique_ptr<SamplerA> lead_;
  std::unique_ptr<SamplerB> follow_;
  std::uint64_t bits_sent_ = 0;
  std::uint64_t bits_received_ = 0;
  std::uint32_t total_iterations_ = 0;
};

/// Combined result of pumping two PathEngines in-process.
struct PathRun {
  std::vector<std::size_t> path_a;
  std::vector<std::size_t> path_b;
  RunStats stats;  // rounds_t = total widening iterations across levels
  bool match = false;
};

PathRun run_path_engines(PathEngine& a, PathEngine& b);

}  // namespace infocomp
