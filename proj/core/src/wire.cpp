#include "infocomp/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace infocomp {

namespace {

constexpr std::uint16_t kControlFlag = 0x8000;
constexpr std::uint16_t kAbortKOverflow = kControlFlag | 1;
constexpr std::uint16_t kAbortTMax = kControlFlag | 2;
constexpr std::size_t kMaxFrameBits = 0x7fff;

// Compression setup draws use this index; round seeds use 0..rounds-1.
constexpr std::uint64_t kSetupSubseedIndex = std::uint64_t{1} << 32;

}  // namespace

std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return bytes;
}

std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t nbits) {
  std::vector<std::uint8_t> bits(nbits);
  for (std::size_t i = 0; i < nbits; ++i)
    bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  return bits;
}

void write_frame(ByteChannel& ch, const Message& m) {
  std::uint16_t header = 0;
  std::vector<std::uint8_t> payload;
  if (m.kind == Message::Kind::abort) {
    header = m.abort_reason == Outcome::abort_t_max ? kAbortTMax : kAbortKOverflow;
  } else {
    if (m.bits.empty() || m.bits.size() > kMaxFrameBits)
      throw WireError("write_frame: payload bit length out of range");
    header = static_cast<std::uint16_t>(m.bits.size());
    payload = pack_bits(m.bits);
  }
  std::uint8_t hdr[2] = {static_cast<std::uint8_t>(header >> 8),
                         static_cast<std::uint8_t>(header & 0xff)};
  ch.write_bytes(hdr, 2);
  if (!payload.empty()) ch.write_bytes(payload.data(), payload.size());
}

Message read_frame(ByteChannel& ch) {
  std::uint8_t hdr[2];
  ch.read_exact(hdr, 2);
  const std::uint16_t header = static_cast<std::uint16_t>((hdr[0] << 8) | hdr[1]);
  if (header & kControlFlag) {
    switch (header) {
      case kAbortKOverflow: return Message::of_abort(Outcome::abort_k_overflow);
      case kAbortTMax: return Message::of_abort(Outcome::abort_t_max);
      default: throw WireError("read_frame: unknown control frame");
    }
  }
  if (header == 0) throw WireError("read_frame: zero bit length");
  std::vector<std::uint8_t> payload((header + 7) / 8);
  ch.read_exact(payload.data(), payload.size());
  // Unused low bits of the final byte must be zero.
  const std::size_t used = header % 8;
  if (used != 0) {
    const std::uint8_t mask = static_cast<std::uint8_t>(0xffu >> used);
    if (payload.back() & mask) throw WireError("read_frame: nonzero padding bits");
  }
  return Message::of_bits(unpack_bits(payload, header));
}

// ---------------------------------------------------------------------------
// In-memory duplex

namespace {

struct Pipe {
  std::mutex m;
  std::condition_variable cv;
  std::deque<std::uint8_t> buf;
  bool closed = false;

  void write(const std::uint8_t* data, std::size_t len) {
    std::lock_guard lock(m);
    if (closed) throw WireError("pipe closed");
    buf.insert(buf.end(), data, data + len);
    cv.notify_all();
  }

  void read(std::uint8_t* data, std::size_t len) {
    std::unique_lock lock(m);
    for (std::size_t i = 0; i < len; ++i) {
      cv.wait(lock, [&] { return !buf.empty() || closed; });
      if (buf.empty()) throw WireError("pipe closed");
      data[i] = buf.front();
      buf.pop_front();
    }
  }

  void close() {
    std::lock_guard lock(m);
    closed = true;
    cv.notify_all();
  }
};

class PipeEnd final : public ByteChannel {
 public:
  PipeEnd(Pipe& out, Pipe& in) : out_(out), in_(in) {}
  void write_bytes(const std::uint8_t* data, std::size_t len) override { out_.write(data, len); }
  void read_exact(std::uint8_t* data, std::size_t len) override { in_.read(data, len); }

 private:
  Pipe& out_;
  Pipe& in_;
};

}  // namespace

struct InMemoryDuplex::Impl {
  Pipe a_to_b, b_to_a;
  PipeEnd end_a{a_to_b, b_to_a};
  PipeEnd end_b{b_to_a, a_to_b};
};

InMemoryDuplex::InMemoryDuplex() : impl_(std::make_unique<Impl>()) {}
InMemoryDuplex::~InMemoryDuplex() { close(); }
ByteChannel& InMemoryDuplex::end_a() { return impl_->end_a; }
ByteChannel& InMemoryDuplex::end_b() { return impl_->end_b; }
void InMemoryDuplex::close() {
  impl_->a_to_b.close();
  impl_->b_to_a.close();
}

// ---------------------------------------------------------------------------
// TCP

namespace {

class FdChannel final : public ByteChannel {
 public:
  explicit FdChannel(int fd) : fd_(fd) {}
  ~FdChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }
  void write_bytes(const std::uint8_t* data, std::size_t len) override {
    std::size_t off = 0;
    while (off < len) {
      const ssize_t n = ::send(fd_, data + off, len - off, 0);
      if (n <= 0) throw WireError("socket write failed");
      off += static_cast<std::size_t>(n);
    }
  }
  void read_exact(std::uint8_t* data, std::size_t len) override {
    std::size_t off = 0;
    while (off < len) {
      const ssize_t n = ::recv(fd_, data + off, len - off, 0);
      if (n <= 0) throw WireError("socket closed during read");
      off += static_cast<std::size_t>(n);
    }
  }

 private:
  int fd_;
};

std::pair<std::string, std::string> split_address(const std::string& address) {
  const auto pos = address.rfind(':');
  if (pos == std::string::npos) throw WireError("address must be host:port");
  return {address.substr(0, pos), address.substr(pos + 1)};
}

}  // namespace

std::unique_ptr<ByteChannel> tcp_listen_accept(const std::string& address) {
  const auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(), &hints, &res) != 0)
    throw WireError("cannot resolve listen address");
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    freeaddrinfo(res);
    throw WireError("cannot create socket");
  }
  const int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (bind(fd, res->ai_addr, res->ai_addrlen) != 0 || listen(fd, 1) != 0) {
    freeaddrinfo(res);
    ::close(fd);
    throw WireError("cannot bind/listen");
  }
  freeaddrinfo(res);
  const int conn = ::accept(fd, nullptr, nullptr);
  ::close(fd);
  if (conn < 0) throw WireError("accept failed");
  return std::make_unique<FdChannel>(conn);
}

std::unique_ptr<ByteChannel> tcp_connect(const std::string& address) {
  const auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0)
    throw WireError("cannot resolve connect address");
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw WireError("connect failed");
  return std::make_unique<FdChannel>(fd);
}

// ---------------------------------------------------------------------------
// Endpoint pumping

EndpointReport run_endpoint_over_channel(EndpointEngine& engine, ByteChannel& ch) {
  while (!engine.finished()) {
    bool sent = false;
    while (auto m = engine.next_message()) {
      write_frame(ch, *m);
      sent = true;
      if (engine.finished()) break;
    }
    if (engine.finished()) break;
    if (!sent || !engine.finished()) {
      const Message m = read_frame(ch);
      engine.on_message(m);
    }
  }
  EndpointReport r;
  r.phase = engine.phase();
  r.abort_reason = engine.abort_reason();
  r.outputs = engine.outputs();
  r.bits_sent = engine.bits_sent();
  r.bits_received = engine.bits_received();
  return r;
}

std::pair<EndpointReport, EndpointReport> run_pair_in_memory(EndpointEngine& a,
                                                             EndpointEngine& b) {
  InMemoryDuplex duplex;
  EndpointReport ra, rb;
  std::exception_ptr err_a, err_b;
  std::thread ta([&] {
    try {
      ra = run_endpoint_over_channel(a, duplex.end_a());
    } catch (...) {
      err_a = std::current_exception();
      duplex.close();
    }
  });
  std::thread tb([&] {
    try {
      rb = run_endpoint_over_channel(b, duplex.end_b());
    } catch (...) {
      err_b = std::current_exception();
      duplex.close();
    }
  });
  ta.join();
  tb.join();
  if (err_a) std::rethrow_exception(err_a);
  if (err_b) std::rethrow_exception(err_b);
  return {ra, rb};
}

// ---------------------------------------------------------------------------
// Engine adapters

CpjInstance strip_side(const CpjInstance& f, Owner keep) {
  CpjInstance out;
  out.rounds = f.rounds;
  auto walk = [&](auto&& self, const CpjNode& n) -> CpjNode {
    CpjNode c;
    c.owner = n.owner;
    c.labels = n.labels;
    c.output = n.output;
    if (keep == Owner::a) c.dist_a = n.dist_a;
    if (keep == Owner::b) c.dist_b = n.dist_b;
    for (const CpjNode& ch : n.children) c.children.push_back(self(self, ch));
    return c;
  };
  out.root = walk(walk, f.root);
  return out;
}

namespace {

class SampleEndpointA final : public EndpointEngine {
 public:
  SampleEndpointA(Dist p, const SharedSeed& seed, const SamplerConfig& cfg)
      : inner_(std::move(p), seed, cfg) {}
  std::optional<Message> next_message() override { return inner_.next_message(); }
  void on_message(const Message& m) override { inner_.on_message(m); }
  bool finished() const override { return inner_.finished(); }
  Phase phase() const override { return inner_.phase(); }
  Outcome abort_reason() const override { return inner_.abort_reason(); }
  std::vector<std::size_t> outputs() const override { return {inner_.output()}; }
  std::uint64_t bits_sent() const override { return inner_.bits_sent(); }
  std::uint64_t bits_received() const override { return inner_.bits_received(); }

 private:
  SamplerA inner_;
};

class SampleEndpointB final : public EndpointEngine {
 public:
  SampleEndpointB(Dist q, const SharedSeed& seed, const SamplerConfig& cfg)
      : inner_(std::move(q), seed, cfg) {}
  std::optional<Message> next_message() override { return inner_.next_message(); }
  void on_message(const Message& m) override { inner_.on_message(m); }
  bool finished() const override { return inner_.finished(); }
  Phase phase() const override { return inner_.phase(); }
  Outcome abort_reason() const override { return inner_.abort_reason(); }
  std::vector<std::size_t> outputs() const override {
    return inner_.output() ? std::vector<std::size_t>{*inner_.output()}
                           : std::vector<std::size_t>{};
  }
  std::uint64_t bits_sent() const override { return inner_.bits_sent(); }
  std::uint64_t bits_received() const override { return inner_.bits_received(); }

 private:
  SamplerB inner_;
};

class PathEndpoint final : public EndpointEngine {
 public:
  // Keeps alive whatever the source points into (stripped instance,
  // protocol copy).
  PathEndpoint(std::unique_ptr<PathSource> source, std::shared_ptr<void> owned,
               const SharedSeed& seed, std::uint32_t rounds, const SamplerConfig& cfg)
      : owned_(std::move(owned)), inner_(std::move(source), seed, rounds, cfg) {}
  std::optional<Message> next_message() override { return inner_.next_message(); }
  void on_message(const Message& m) override { inner_.on_message(m); }
  bool finished() const override { return inner_.finished(); }
  Phase phase() const override { return inner_.phase(); }
  Outcome abort_reason() const override { return inner_.abort_reason(); }
  std::vector<std::size_t> outputs() const override { return inner_.path(); }
  std::uint64_t bits_sent() const override { return inner_.bits_sent(); }
  std::uint64_t bits_received() const override { return inner_.bits_received(); }

 private:
  std::shared_ptr<void> owned_;
  PathEngine inner_;
};

std::uint32_t proto_depth(const ProtoNode& n) {
  if (n.is_leaf()) return 0;
  std::uint32_t d = 0;
  for (const ProtoNode& c : n.children) d = std::max(d, proto_depth(c));
  return d + 1;
}

}  // namespace

std::unique_ptr<EndpointEngine> make_endpoint(const EngineSpec& spec, Owner role,
                                              const SharedSeed& seed) {
  SamplerConfig cfg = spec.cfg.resolved();  // explicit t_max or fallback cap
  switch (spec.kind) {
    case EngineSpec::Kind::sample: {
      if (role == Owner::a) {
        if (!spec.p) throw WireError("sample engine: role A needs p");
        return std::make_unique<SampleEndpointA>(*spec.p, seed, cfg);
      }
      if (!spec.q) throw WireError("sample engine: role B needs q");
      return std::make_unique<SampleEndpointB>(*spec.q, seed, cfg);
    }
    case EngineSpec::Kind::cpj: {
      if (!spec.instance) throw WireError("cpj engine: instance required");
      auto own = std::make_shared<CpjInstance>(strip_side(*spec.instance, role));
      auto src = std::make_unique<CpjSideSource>(*own, role);
      return std::make_unique<PathEndpoint>(std::move(src), own, seed, own->rounds, cfg);
    }
    case EngineSpec::Kind::compress: {
      if (!spec.protocol || !spec.mu) throw WireError("compress engine: protocol and mu required");
      // Public draws from the shared seed: the input pair and the
      // protocol's public randomness. Each endpoint keeps its own half.
      DetStream setup(derive_subseed(seed, kSetupSubseedIndex));
      const double rx = setup.next_double();
      double acc = 0.0;
      std::size_t x = spec.mu->x_size() - 1, y = spec.mu->y_size() - 1;
      bool found = false;
      for (std::size_t xi = 0; xi < spec.mu->x_size() && !found; ++xi)
        for (std::size_t yi = 0; yi < spec.mu->y_size() && !found; ++yi) {
          acc += (*spec.mu)(xi, yi);
          if (rx < acc) {
            x = xi;
            y = yi;
            found = true;
          }
        }
      const double rv = setup.next_double();
      acc = 0.0;
      std::size_t r = spec.protocol->variants.size() - 1;
      for (std::size_t i = 0; i < spec.protocol->variants.size(); ++i) {
        acc += spec.protocol->variants[i].prob;
        if (rv < acc) {
          r = i;
          break;
        }
      }
      auto own = std::make_shared<ProtocolTree>(*spec.protocol);
      const ProtoNode& root = own->variants[r].root;
      const std::uint32_t rounds = proto_depth(root);
      std::unique_ptr<PathSource> src;
      if (role == Owner::a) {
        SideBeliefWalker w(&root, Owner::a, x, spec.mu->conditional_y_given_x(x));
        src = std::make_unique<ProtoWalkSource>(std::move(w));
      } else {
        SideBeliefWalker w(&root, Owner::b, y, spec.mu->conditional_x_given_y(y));
        src = std::make_unique<ProtoWalkSource>(std::move(w));
      }
      return std::make_unique<PathEndpoint>(std::move(src), own, seed, rounds, cfg);
    }
  }
  throw WireError("make_endpoint: unknown engine kind");
}

}  // namespace infocomp
