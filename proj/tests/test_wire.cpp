#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <thread>

#include "doctest.h"
#include "infocomp/generate.hpp"
#include "infocomp/json_io.hpp"
#include "infocomp/wire.hpp"

using namespace infocomp;

namespace {

SharedSeed nth_seed(std::uint64_t i) { return derive_subseed(SharedSeed{0x3141, 0x5926}, i); }

// Byte channel over a plain buffer, for frame-level tests.
class BufferChannel final : public ByteChannel {
 public:
  void write_bytes(const std::uint8_t* data, std::size_t len) override {
    buf_.insert(buf_.end(), data, data + len);
  }
  void read_exact(std::uint8_t* data, std::size_t len) override {
    if (pos_ + len > buf_.size()) throw WireError("buffer exhausted");
    std::copy(buf_.begin() + pos_, buf_.begin() + pos_ + len, data);
    pos_ += len;
  }
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

TEST_CASE("bit packing is MSB-first with zero padding") {
  const std::vector<std::uint8_t> bits{1, 0, 1, 1, 0, 0, 1, 0, 1, 1};
  const auto bytes = pack_bits(bits);
  REQUIRE(bytes.size() == 2);
  CHECK(bytes[0] == 0xb2);
  CHECK(bytes[1] == 0xc0);
  CHECK(unpack_bits(bytes, bits.size()) == bits);
}

TEST_CASE("frame round trip") {
  BufferChannel ch;
  write_frame(ch, Message::of_bits({1, 0, 1}));
  write_frame(ch, Message::of_abort(Outcome::abort_k_overflow));
  const Message m1 = read_frame(ch);
  CHECK(m1.kind == Message::Kind::bits);
  CHECK(m1.bits == std::vector<std::uint8_t>{1, 0, 1});
  const Message m2 = read_frame(ch);
  CHECK(m2.kind == Message::Kind::abort);
  CHECK(m2.abort_reason == Outcome::abort_k_overflow);
}

TEST_CASE("malformed frames raise clean errors") {
  // Zero bit length is a protocol error.
  BufferChannel zero;
  const std::uint8_t z[2] = {0, 0};
  zero.write_bytes(z, 2);
  CHECK_THROWS_AS(read_frame(zero), WireError);

  // Truncated payload.
  BufferChannel trunc;
  const std::uint8_t hdr[2] = {0, 9};  // 9 bits = 2 bytes, only 1 present
  trunc.write_bytes(hdr, 2);
  const std::uint8_t partial = 0xff;
  trunc.write_bytes(&partial, 1);
  CHECK_THROWS_AS(read_frame(trunc), WireError);

  // Nonzero padding bits.
  BufferChannel pad;
  const std::uint8_t hdr2[2] = {0, 3};
  pad.write_bytes(hdr2, 2);
  const std::uint8_t bad = 0xff;  // low 5 bits must be zero for a 3-bit frame
  pad.write_bytes(&bad, 1);
  CHECK_THROWS_AS(read_frame(pad), WireError);

  // Empty payloads cannot be written.
  BufferChannel out;
  CHECK_THROWS_AS(write_frame(out, Message::of_bits({})), WireError);
}

TEST_CASE("one-shot sampling over a channel replays the in-process run") {
  const auto pair = gen_uniform_subset(64, 64, 4);
  EngineSpec spec;
  spec.kind = EngineSpec::Kind::sample;
  spec.cfg.eps = 0.01;
  spec.cfg.t_max = 8;  // explicit so both transports resolve identically
  spec.p = pair.p;
  spec.q = pair.q;

  for (std::uint64_t i = 0; i < 50; ++i) {
    const SharedSeed seed = nth_seed(i);
    auto ea = make_endpoint(spec, Owner::a, seed);
    auto eb = make_endpoint(spec, Owner::b, seed);
    const auto [ra, rb] = run_pair_in_memory(*ea, *eb);

    const SampleRun direct = run_sampler(pair.p, pair.q, seed, spec.cfg.resolved());
    REQUIRE(ra.outputs.size() == 1);
    CHECK(ra.outputs[0] == direct.a);
    if (direct.b) {
      REQUIRE(rb.outputs.size() == 1);
      CHECK(rb.outputs[0] == *direct.b);
    } else {
      CHECK(rb.outputs.empty());
    }
    CHECK(ra.bits_sent == direct.stats.bits_a);
    CHECK(rb.bits_sent == direct.stats.bits_b);
    CHECK(ra.bits_received == rb.bits_sent);
    CHECK(rb.bits_received == ra.bits_sent);
  }
}

TEST_CASE("a hundred pointer-jumping runs agree with in-process bit for bit") {
  std::uint64_t compared = 0;
  for (std::uint64_t inst = 0; inst < 4; ++inst) {
    const CpjInstance f = gen_random_cpj(3, 2, nth_seed(500 + inst));
    EngineSpec spec;
    spec.kind = EngineSpec::Kind::cpj;
    spec.cfg.eps = 0.05;
    spec.instance = f;
    SamplerConfig cfg;
    cfg.eps = 0.05;
    for (std::uint64_t i = 0; i < 25; ++i) {
      const SharedSeed seed = nth_seed(1'000 + inst * 100 + i);
      auto ea = make_endpoint(spec, Owner::a, seed);
      auto eb = make_endpoint(spec, Owner::b, seed);
      const auto [ra, rb] = run_pair_in_memory(*ea, *eb);
      const PathSampleRun direct = sample_path(f, seed, cfg.eps, &cfg);
      CHECK(ra.outputs == direct.path_a.child_indices);
      CHECK(rb.outputs == direct.path_b.child_indices);
      CHECK(ra.bits_sent + rb.bits_sent == direct.stats.total_bits());
      CHECK(ra.bits_sent == direct.stats.bits_a);
      CHECK(rb.bits_sent == direct.stats.bits_b);
      ++compared;
    }
  }
  CHECK(compared == 100);
}

TEST_CASE("compression endpoints replay the in-process run") {
  const TinyXorProtocol tiny = gen_tiny_xor_protocol();
  EngineSpec spec;
  spec.kind = EngineSpec::Kind::compress;
  spec.cfg.eps = 0.05;
  spec.protocol = tiny.pi;
  spec.mu = tiny.mu;

  for (std::uint64_t i = 0; i < 50; ++i) {
    const SharedSeed seed = nth_seed(2'000 + i);
    auto ea = make_endpoint(spec, Owner::a, seed);
    auto eb = make_endpoint(spec, Owner::b, seed);
    const auto [ra, rb] = run_pair_in_memory(*ea, *eb);
    const CompressRun direct = compress(tiny.pi, tiny.mu, 0.05, seed);
    CHECK(ra.outputs == direct.path_a);
    CHECK(rb.outputs == direct.path_b);
    CHECK(ra.bits_sent + rb.bits_sent == direct.stats.total_bits());
  }
}

TEST_CASE("stripped instances hold only one side's knowledge") {
  const CpjInstance f = gen_random_cpj(3, 2, nth_seed(3'000));
  const CpjInstance only_a = strip_side(f, Owner::a);
  const CpjInstance only_b = strip_side(f, Owner::b);
  auto walk = [&](auto&& self, const CpjNode& a, const CpjNode& b) -> void {
    if (a.is_leaf()) return;
    CHECK(a.dist_a.has_value());
    CHECK_FALSE(a.dist_b.has_value());
    CHECK(b.dist_b.has_value());
    CHECK_FALSE(b.dist_a.has_value());
    for (std::size_t i = 0; i < a.children.size(); ++i)
      self(self, a.children[i], b.children[i]);
  };
  walk(walk, only_a.root, only_b.root);
}

TEST_CASE("role-scoped engine specs never read the other side's input") {
  const auto pair = gen_uniform_subset(16, 16, 2);
  nlohmann::json spec{{"engine", "sample"},
                      {"eps", 0.01},
                      {"t_max", 8},
                      {"a", {{"p", to_json(pair.p)}}},
                      {"b", {{"q", to_json(pair.q)}}}};
  const EngineSpec as_a = engine_spec_from_json(spec, Owner::a);
  CHECK(as_a.p.has_value());
  CHECK_FALSE(as_a.q.has_value());
  const EngineSpec as_b = engine_spec_from_json(spec, Owner::b);
  CHECK(as_b.q.has_value());
  CHECK_FALSE(as_b.p.has_value());

  // A's section alone suffices for role A even if B's is absent.
  nlohmann::json only_a{{"engine", "sample"}, {"eps", 0.01}, {"a", {{"p", to_json(pair.p)}}}};
  CHECK_NOTHROW(engine_spec_from_json(only_a, Owner::a));
  CHECK_THROWS(engine_spec_from_json(only_a, Owner::b));
}

TEST_CASE("tcp transport matches the in-memory transport") {
  const auto pair = gen_uniform_subset(32, 32, 2);
  EngineSpec spec;
  spec.kind = EngineSpec::Kind::sample;
  spec.cfg.eps = 0.01;
  spec.cfg.t_max = 8;
  spec.p = pair.p;
  spec.q = pair.q;
  const SharedSeed seed = nth_seed(4'000);

  EndpointReport ra, rb;
  std::thread server([&] {
    auto ch = tcp_listen_accept("127.0.0.1:39171");
    auto engine = make_endpoint(spec, Owner::a, seed);
    ra = run_endpoint_over_channel(*engine, *ch);
  });
  // Give the listener a moment; connect retries cover races.
  std::unique_ptr<ByteChannel> ch;
  for (int attempt = 0; attempt < 50 && !ch; ++attempt) {
    try {
      ch = tcp_connect("127.0.0.1:39171");
    } catch (const WireError&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  REQUIRE(ch);
  auto engine = make_endpoint(spec, Owner::b, seed);
  rb = run_endpoint_over_channel(*engine, *ch);
  server.join();

  const SampleRun direct = run_sampler(pair.p, pair.q, seed, spec.cfg.resolved());
  REQUIRE(ra.outputs.size() == 1);
  CHECK(ra.outputs[0] == direct.a);
  CHECK(ra.bits_sent == direct.stats.bits_a);
  CHECK(rb.bits_sent == direct.stats.bits_b);
}
