#pragma once

// Runs any two-party engine over an ordered reliable byte stream with
// bit-exact accounting.
//
// Frame format: a 2-byte big-endian header, then the payload.
//   header 1..32767   data frame; the value is the payload bit length,
//                     payload occupies ceil(bits/8) bytes, bits packed
//                     MSB-first with unused low bits of the last byte
//                     zero. The accounted communication is exactly the
//                     header value; framing bytes are never counted.
//   header 0          invalid (protocol error).
//   header 0x8000|c   control frame, no payload: c = 1 aborts the run
//                     (block-index overflow), c = 2 reserved for
//                     iteration-cap aborts. Control frames carry no
//                     protocol bits.
// Replay determinism: a run over any transport produces the same
// outputs and the same accounted bit counts as the in-process run with
// the same seed, inputs, and config.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "infocomp/cpj.hpp"
#include "infocomp/protocol.hpp"
#include "infocomp/sampler.hpp"

namespace infocomp {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered reliable duplex byte stream, one direction per method.
class ByteChannel {
 public:
  virtual ~ByteChannel() = default;
  virtual void write_bytes(const std::uint8_t* data, std::size_t len) = 0;
  /// Blocks until len bytes arrive; throws WireError on close/failure.
  virtual void read_exact(std::uint8_t* data, std::size_t len) = 0;
};

/// MSB-first bit packing, unused low bits of the final byte zero.
std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t nbits);

void write_frame(ByteChannel& ch, const Message& m);
Message read_frame(ByteChannel& ch);

/// In-memory duplex pipe pair for same-process endpoints (tests, the
/// paired transparency harness). Thread-safe; blocking reads.
class InMemoryDuplex {
 public:
  InMemoryDuplex();
  ~InMemoryDuplex();
  ByteChannel& end_a();
  ByteChannel& end_b();
  /// Unblocks pending readers with an error.
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// TCP channel. address is "host:port".
std::unique_ptr<ByteChannel> tcp_listen_accept(const std::string& address);
std::unique_ptr<ByteChannel> tcp_connect(const std::string& address);

/// Type-erased endpoint: one side of a two-party engine.
class EndpointEngine {
 public:
  virtual ~EndpointEngine() = default;
  virtual std::optional<Message> next_message() = 0;
  virtual void on_message(const Message& m) = 0;
  virtual bool finished() const = 0;
  virtual Phase phase() const = 0;
  virtual Outcome abort_reason() const = 0;
  /// Engine outputs: the sampled symbol for the one-shot engine, the
  /// child-index path for tree walks.
  virtual std::vector<std::size_t> outputs() const = 0;
  virtual std::uint64_t bits_sent() const = 0;
  virtual std::uint64_t bits_received() const = 0;
};

/// What one endpoint reports after a run.
struct EndpointReport {
  Phase phase = Phase::done;
  Outcome abort_reason = Outcome::match;
  std::vector<std::size_t> outputs;
  std::uint64_t bits_sent = 0;
  std::uint64_t bits_received = 0;
};

/// Pumps one endpoint against a channel until its engine finishes.
EndpointReport run_endpoint_over_channel(EndpointEngine& engine, ByteChannel& ch);

/// Hosts both endpoints on an in-memory duplex, one thread each.
std::pair<EndpointReport, EndpointReport> run_pair_in_memory(EndpointEngine& a,
                                                             EndpointEngine& b);

/// Engine selection for networked runs. Inputs private to one role live
/// in that role's slot only; shared structure (tree shapes, eps, seed)
/// is common knowledge.
struct EngineSpec {
  enum class Kind { sample, cpj, compress };
  Kind kind = Kind::sample;
  SamplerConfig cfg;  // eps and explicit t_max/k_bits; dist-derived
                      // defaults are unavailable across endpoints

  // sample
  std::optional<Dist> p;  // role A
  std::optional<Dist> q;  // role B

  // cpj
  std::optional<CpjInstance> instance;

  // compress: inputs and public randomness derive from the shared seed
  std::optional<ProtocolTree> protocol;
  std::optional<JointDist> mu;
};

/// Copy of a CPJ instance with the other side's distributions removed;
/// what a single endpoint is allowed to hold.
CpjInstance strip_side(const CpjInstance& f, Owner keep);

/// Builds one side's endpoint engine. The returned engine holds only
/// that role's private inputs.
std::unique_ptr<EndpointEngine> make_endpoint(const EngineSpec& spec, Owner role,
                                              const SharedSeed& seed);

}  // namespace infocomp
