#include "infocomp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace infocomp {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::match: return "match";
    case Outcome::mismatch: return "mismatch";
    case Outcome::abort_k_overflow: return "abort_k_overflow";
    case Outcome::abort_t_max: return "abort_t_max";
  }
  return "unknown";
}

std::uint32_t SamplerConfig::default_k_bits(double eps) {
  const double ll = std::log2(std::log2(1.0 / eps));
  const double c = std::ceil(ll);
  return 1 + static_cast<std::uint32_t>(std::max(0.0, c));
}

std::uint32_t SamplerConfig::default_t_max(const Dist& p, const Dist& q, std::uint32_t cap) {
  double max_log_ratio = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p(x) == 0.0) continue;
    if (q(x) == 0.0) return cap;
    max_log_ratio = std::max(max_log_ratio, std::log2(p(x) / q(x)));
  }
  return static_cast<std::uint32_t>(std::ceil(std::sqrt(max_log_ratio))) + 2;
}

SamplerConfig SamplerConfig::resolved(const Dist* p, const Dist* q) const {
  SamplerConfig r = *this;
  if (r.k_bits == 0) r.k_bits = default_k_bits(r.eps);
  if (r.t_max == 0) r.t_max = (p && q) ? default_t_max(*p, *q, r.t_max_cap) : r.t_max_cap;
  r.validate();
  return r;
}

void SamplerConfig::validate() const {
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("SamplerConfig: eps not in (0, 1/2]");
  if (k_bits == 0 || k_bits > 62) throw std::invalid_argument("SamplerConfig: k_bits out of range");
  if (t_max == 0) throw std::invalid_argument("SamplerConfig: t_max must be positive");
  if (scan_cap_factor == 0) throw std::invalid_argument("SamplerConfig: scan cap must be positive");
}

std::uint32_t hash_bits_through(double eps, std::uint32_t t) {
  const auto log_term = static_cast<std::uint32_t>(std::ceil(std::log2(1.0 / eps)));
  return 1 + log_term + (t + 1) * (t + 1);
}

std::optional<std::pair<std::uint64_t, TapeElement>> pick_a_element(
    const Dist& p, const SharedSeed& seed, std::uint64_t scan_cap_factor) {
  const Universe& u = p.universe();
  const std::uint64_t cap = scan_cap_factor * static_cast<std::uint64_t>(u.size);
  for (std::uint64_t i = 1; i <= cap; ++i) {
    const std::size_t x = tape_symbol(seed, u, i);
    if (p(x) == 0.0) continue;
    TapeElement e{x, tape_threshold(seed, i)};
    if (in_p_set(e, p)) return std::make_pair(i, e);
  }
  return std::nullopt;
}

double comm_bound(const Dist& p, const Dist& q, std::size_t a, double eps) {
  if (q(a) == 0.0) return kInfiniteBits;
  const double ratio = p(a) > 0.0 ? std::log2(p(a) / q(a)) : 0.0;
  const double l = std::max(0.0, ratio);
  const double log_eps = std::log2(1.0 / eps);
  return l + log_eps + std::log2(log_eps) + 5.0 * std::sqrt(l) + 9.0;
}

// ---------------------------------------------------------------------------
// Player A

SamplerA::SamplerA(Dist p, SharedSeed seed, SamplerConfig cfg)
    : p_(std::move(p)), seed_(seed), cfg_(cfg) {
  cfg_.validate();
  const auto hit = pick_a_element(p_, seed_, cfg_.scan_cap_factor);
  if (!hit) {
    // Scan cap exceeded; k would dwarf any encodable block index.
    k_ = 0;
    abort_reason_ = Outcome::abort_k_overflow;
    state_ = State::send_k;
    sample_ = 0;
    overflow_ = true;
    return;
  }
  sample_ = hit->second.x;
  const std::uint64_t usize = p_.size();
  k_ = (hit->first + usize - 1) / usize;
  overflow_ = k_ > (std::uint64_t{1} << cfg_.k_bits);
}

std::optional<Message> SamplerA::next_message() {
  if (phase_ != Phase::running) return std::nullopt;
  switch (state_) {
    case State::send_k: {
      if (overflow_) {
        phase_ = Phase::aborted;
        abort_reason_ = Outcome::abort_k_overflow;
        return Message::of_abort(Outcome::abort_k_overflow);
      }
      std::vector<std::uint8_t> bits(cfg_.k_bits);
      const std::uint64_t v = k_ - 1;
      for (std::uint32_t i = 0; i < cfg_.k_bits; ++i)
        bits[i] = static_cast<std::uint8_t>((v >> (cfg_.k_bits - 1 - i)) & 1u);
      bits_sent_ += bits.size();
      state_ = State::send_burst;
      return Message::of_bits(std::move(bits));
    }
    case State::send_burst: {
      const std::uint32_t s_t = hash_bits_through(cfg_.eps, round_);
      std::vector<std::uint8_t> bits;
      bits.reserve(s_t - bits_state_);
      for (std::uint32_t j = bits_state_ + 1; j <= s_t; ++j)
        bits.push_back(static_cast<std::uint8_t>(hash_bit(seed_, j, sample_)));
      bits_state_ = s_t;
      bits_sent_ += bits.size();
      state_ = State::await_verdict;
      return Message::of_bits(std::move(bits));
    }
    case State::await_verdict:
      return std::nullopt;
  }
  return std::nullopt;
}

void SamplerA::on_message(const Message& m) {
  if (phase_ != Phase::running) return;
  if (m.kind == Message::Kind::abort) {
    phase_ = Phase::aborted;
    abort_reason_ = m.abort_reason;
    return;
  }
  if (state_ != State::await_verdict || m.bits.size() != 1)
    throw std::runtime_error("SamplerA: unexpected message");
  bits_received_ += 1;
  ++round_;
  if (m.bits[0] == 1) {
    phase_ = Phase::done;
  } else if (round_ >= cfg_.t_max) {
    phase_ = Phase::aborted;
    abort_reason_ = Outcome::abort_t_max;
  } else {
    state_ = State::send_burst;
  }
}

// ---------------------------------------------------------------------------
// Player B

SamplerB::SamplerB(Dist q, SharedSeed seed, SamplerConfig cfg)
    : q_(std::move(q)), seed_(seed), cfg_(cfg) {
  cfg_.validate();
}

void SamplerB::load_block() {
  const std::uint64_t usize = q_.size();
  const std::uint64_t first = (k_ - 1) * usize + 1;
  candidates_.reserve(usize);
  for (std::uint64_t r = first; r < first + usize; ++r) {
    const std::size_t y = tape_symbol(seed_, q_.universe(), r);
    if (q_(y) == 0.0) continue;  // never inside any multiple of Q's histogram
    candidates_.push_back(Candidate{r, y, tape_threshold(seed_, r), 0, true});
  }
}

bool SamplerB::candidate_survives(Candidate& c, std::uint32_t s_t) {
  while (c.verified < s_t) {
    const std::uint64_t w = c.verified / 64;  // word covering bit c.verified+1
    const std::uint64_t word = hash_word(seed_, c.symbol, w);
    const std::uint32_t hi = std::min<std::uint32_t>(s_t, static_cast<std::uint32_t>((w + 1) * 64));
    for (std::uint32_t j = c.verified + 1; j <= hi; ++j) {
      const int bit = static_cast<int>((word >> ((j - 1) % 64)) & 1u);
      if (bit != received_hash_[j - 1]) {
        c.alive = false;
        return false;
      }
    }
    c.verified = hi;
  }
  return true;
}

void SamplerB::on_message(const Message& m) {
  if (phase_ != Phase::running) return;
  if (m.kind == Message::Kind::abort) {
    phase_ = Phase::aborted;
    abort_reason_ = m.abort_reason;
    return;
  }
  if (!have_k_) {
    if (m.bits.size() != cfg_.k_bits) throw std::runtime_error("SamplerB: bad block-index message");
    std::uint64_t v = 0;
    for (std::uint8_t b : m.bits) v = (v << 1) | (b & 1u);
    k_ = v + 1;
    have_k_ = true;
    bits_received_ += m.bits.size();
    load_block();
    return;
  }
  if (verdict_pending_) throw std::runtime_error("SamplerB: burst before verdict was consumed");
  const std::uint32_t s_t = hash_bits_through(cfg_.eps, round_);
  if (m.bits.size() != s_t - bits_state_)
    throw std::runtime_error("SamplerB: hash burst has wrong length");
  received_hash_.insert(received_hash_.end(), m.bits.begin(), m.bits.end());
  bits_state_ = s_t;
  bits_received_ += m.bits.size();

  const double c_t = region_multiple(round_);
  for (Candidate& c : candidates_) {
    if (!c.alive) continue;
    if (!(q_(c.symbol) > c.threshold / c_t)) continue;  // not yet in C_t * Q
    if (candidate_survives(c, s_t)) {
      verdict_ = 1;
      output_ = c.symbol;
      verdict_pending_ = true;
      return;
    }
  }
  verdict_ = 0;
  verdict_pending_ = true;
}

std::optional<Message> SamplerB::next_message() {
  if (phase_ != Phase::running || !verdict_pending_) return std::nullopt;
  verdict_pending_ = false;
  bits_sent_ += 1;
  ++round_;
  if (verdict_ == 1) {
    phase_ = Phase::done;
  } else if (round_ >= cfg_.t_max) {
    phase_ = Phase::aborted;
    abort_reason_ = Outcome::abort_t_max;
  }
  return Message::of_bits({verdict_});
}

// ---------------------------------------------------------------------------

SampleRun run_sampler(const Dist& p, const Dist& q, const SharedSeed& seed,
                      const SamplerConfig& cfg) {
  if (!p.same_universe(q)) throw std::invalid_argument("run_sampler: universe mismatch");
  const SamplerConfig rc = cfg.resolved(&p, &q);
  SamplerA a(p, seed, rc);
  SamplerB b(q, seed, rc);
  while (!a.finished() || !b.finished()) {
    if (auto m = a.next_message()) {
      b.on_message(*m);
      continue;
    }
    if (auto m = b.next_message()) {
      a.on_message(*m);
      continue;
    }
    throw std::logic_error("run_sampler: protocol deadlock");
  }

  SampleRun run;
  run.a = a.output();
  run.b = b.output();
  run.stats.bits_a = a.bits_sent();
  run.stats.bits_b = b.bits_sent();
  run.stats.rounds_t = std::max(a.rounds(), b.rounds());
  run.stats.k = a.k();
  if (a.phase() == Phase::aborted) {
    run.stats.outcome = a.abort_reason();
  } else if (b.phase() == Phase::aborted) {
    run.stats.outcome = b.abort_reason();
  } else {
    run.stats.outcome = (run.b && *run.b == run.a) ? Outcome::match : Outcome::mismatch;
  }
  return run;
}

}  // namespace infocomp
