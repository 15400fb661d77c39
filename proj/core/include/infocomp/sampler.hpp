#pragma once

// One-shot sampling between two parties: A holds P, B holds Q over the
// same universe. A outputs a ~ P; B learns it with probability > 1-eps
// at a per-run cost of about log2(P(a)/Q(a)) bits.
//
// Both sides interpret the shared tape as elements a_i = (x_i, p_i).
// A takes the first a_i under P's histogram and announces the block
// index k = ceil(i/|U|). Iteration t then widens B's candidate region
// to the 2^(t^2)-multiple of Q's histogram while A streams hash bits of
// its symbol; B accepts the first block element that is in region and
// consistent with every received hash bit.
//
// Message schedule (bit-exact):
//   message 1: k_bits bits from A, big-endian encoding of k-1
//              (block index k is 1-based);
//   iteration t = 0,1,...: A sends hash bits h_j(x) for
//              s_{t-1} < j <= s_t (s_{-1} = 0), then B sends one verdict
//              bit (1 = success, 0 = failure).
// A block-index overflow aborts the run via a control message that
// carries no protocol bits.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infocomp/dist.hpp"
#include "infocomp/info.hpp"
#include "infocomp/shared_randomness.hpp"

namespace infocomp {

enum class Outcome {
  match,
  mismatch,
  abort_k_overflow,
  abort_t_max,
};

std::string to_string(Outcome o);

/// Per-run accounting. bits_a + bits_b is the total protocol
/// communication; framing overhead is never included.
struct RunStats {
  std::uint64_t bits_a = 0;
  std::uint64_t bits_b = 0;
  std::uint32_t rounds_t = 0;  // iterations executed in the widening loop
  std::uint64_t k = 0;         // block index chosen by A (1-based)
  Outcome outcome = Outcome::match;

  std::uint64_t total_bits() const { return bits_a + bits_b; }
};

struct SamplerConfig {
  double eps = 0.01;
  std::uint32_t k_bits = 0;  // 0 = derive from eps
  std::uint32_t t_max = 0;   // 0 = derive (from dists when known, else fallback cap)
  std::uint64_t scan_cap_factor = 1'000'000;  // A aborts after factor*|U| tape elements
  std::uint32_t t_max_cap = 64;               // fallback when the divergence is unbounded

  /// 1 + ceil(log2 log2 (1/eps)); k then fits 1..2^k_bits.
  static std::uint32_t default_k_bits(double eps);

  /// ceil(sqrt(max_x log2 P(x)/Q(x))) + 2 when finite, else t_max_cap.
  /// Past this iteration the correct element is guaranteed in region.
  static std::uint32_t default_t_max(const Dist& p, const Dist& q, std::uint32_t cap = 64);

  /// Fills in zero fields. Both endpoints of a run must resolve to the
  /// same values; multi-round engines resolve without dist knowledge.
  SamplerConfig resolved(const Dist* p = nullptr, const Dist* q = nullptr) const;

  void validate() const;
};

/// Membership in the histogram set of d: d(x) > p.
inline bool in_p_set(const TapeElement& e, const Dist& d) { return d(e.x) > e.p; }

/// Membership in the c-multiple of d's histogram (c >= 1, may be +inf):
/// d(x) > p/c.
inline bool in_scaled_q_set(const TapeElement& e, const Dist& d, double c) {
  return d(e.x) > e.p / c;
}

/// s_t = 1 + ceil(log2 1/eps) + (t+1)^2: hash bits required through iteration t.
std::uint32_t hash_bits_through(double eps, std::uint32_t t);

/// C_t = 2^(t^2); saturates to +inf for large t, which the membership
/// test handles exactly.
inline double region_multiple(std::uint32_t t) {
  return std::exp2(static_cast<double>(t) * static_cast<double>(t));
}

/// First tape index whose element lies under P's histogram, with the
/// element itself. Empty when the defensive scan cap is exceeded.
std::optional<std::pair<std::uint64_t, TapeElement>> pick_a_element(
    const Dist& p, const SharedSeed& seed, std::uint64_t scan_cap_factor = 1'000'000);

/// Per-run communication bound of the sampling protocol, in bits:
///   max(0, log2 P(a)/Q(a)) + log2(1/eps) + log2 log2 (1/eps)
///   + 5*sqrt(max(0, log2 P(a)/Q(a))) + 9.
/// +inf when Q(a) = 0.
double comm_bound(const Dist& p, const Dist& q, std::size_t a, double eps);

/// One protocol message: a bit payload, or an abort notification that
/// terminates the run without contributing protocol bits.
struct Message {
  enum class Kind { bits, abort };
  Kind kind = Kind::bits;
  std::vector<std::uint8_t> bits;  // values 0/1
  Outcome abort_reason = Outcome::abort_k_overflow;

  static Message of_bits(std::vector<std::uint8_t> b) {
    return Message{Kind::bits, std::move(b), Outcome::abort_k_overflow};
  }
  static Message of_abort(Outcome reason) { return Message{Kind::abort, {}, reason}; }
};

enum class Phase { running, done, aborted };

/// Player A's state machine. Drives the schedule: block index, then one
/// hash burst per iteration, consuming B's verdicts.
class SamplerA {
 public:
  SamplerA(Dist p, SharedSeed seed, SamplerConfig cfg);

  /// Next message to send, or nullopt when waiting for B / finished.
  std::optional<Message> next_message();
  void on_message(const Message& m);
  bool finished() const { return phase_ != Phase::running; }
  Phase phase() const { return phase_; }
  Outcome abort_reason() const { return abort_reason_; }

  std::size_t output() const { return sample_; }  // a ~ P
  std::uint64_t k() const { return k_; }
  std::uint64_t bits_sent() const { return bits_sent_; }
  std::uint64_t bits_received() const { return bits_received_; }
  std::uint32_t rounds() const { return round_; }

 private:
  enum class State { send_k, send_burst, await_verdict };

  Dist p_;
  SharedSeed seed_;
  SamplerConfig cfg_;
  Phase phase_ = Phase::running;
  Outcome abort_reason_ = Outcome::abort_k_overflow;
  State state_ = State::send_k;
  bool overflow_ = false;
  std::size_t sample_ = 0;
  std::uint64_t k_ = 0;
  std::uint32_t round_ = 0;      // iterations completed
  std::uint32_t bits_state_ = 0; // hash bits sent so far (s_{t-1})
  std::uint64_t bits_sent_ = 0;
  std::uint64_t bits_received_ = 0;
};

/// Player B's state machine: consumes the block index and hash bursts,
/// answers one verdict bit per iteration, and outputs the first
/// surviving block element on success.
class SamplerB {
 public:
  SamplerB(Dist q, SharedSeed seed, SamplerConfig cfg);

  std::optional<Message> next_message();
  void on_message(const Message& m);
  bool finished() const { return phase_ != Phase::running; }
  Phase phase() const { return phase_; }
  Outcome abort_reason() const { return abort_reason_; }

  /// b, present only after a successful run.
  std::optional<std::size_t> output() const { return output_; }
  std::uint64_t bits_sent() const { return bits_sent_; }
  std::uint64_t bits_received() const { return bits_received_; }
  std::uint32_t rounds() const { return round_; }

 private:
  struct Candidate {
    std::uint64_t index;     // tape index r
    std::size_t symbol;      // y_r
    double threshold;        // q_r; in region at t iff Q(y_r) > q_r / C_t
    std::uint32_t verified;  // hash bits checked so far
    bool alive;
  };

  void load_block();
  bool candidate_survives(Candidate& c, std::uint32_t s_t);

  Dist q_;
  SharedSeed seed_;
  SamplerConfig cfg_;
  Phase phase_ = Phase::running;
  Outcome abort_reason_ = Outcome::abort_t_max;
  bool have_k_ = false;
  bool verdict_pending_ = false;
  std::uint8_t verdict_ = 0;
  std::uint64_t k_ = 0;
  std::uint32_t round_ = 0;
  std::uint32_t bits_state_ = 0;
  std::vector<std::uint8_t> received_hash_;  // cumulative, index j-1
  std::vector<Candidate> candidates_;        // block elements with Q(y) > 0, in r order
  std::optional<std::size_t> output_;
  std::uint64_t bits_sent_ = 0;
  std::uint64_t bits_received_ = 0;
};

/// Result of one complete two-party run.
struct SampleRun {
  std::size_t a = 0;
  std::optional<std::size_t> b;
  RunStats stats;
};

/// Runs both state machines to completion in-process. Outcome
/// classification: aborts as reported, otherwise match iff b == a.
SampleRun run_sampler(const Dist& p, const Dist& q, const SharedSeed& seed,
                      const SamplerConfig& cfg);

}  // namespace infocomp
