#include "infocomp/path_engine.hpp"

#include <stdexcept>

namespace infocomp {

PathEngine::PathEngine(std::unique_ptr<PathSource> source, SharedSeed run_seed,
                       std::uint32_t rounds, SamplerConfig cfg)
    : source_(std::move(source)), run_seed_(run_seed), rounds_(rounds), cfg_(cfg) {
  if (rounds_ == 0) throw std::invalid_argument("PathEngine: rounds must be positive");
  // Per-level samplers cannot see both dists, so t_max comes from the
  // shared config, never from the data.
  cfg_ = cfg_.resolved();
  start_level();
}

void PathEngine::start_level() {
  const SharedSeed level_seed = round_seed(run_seed_, depth_);
  if (source_->leads()) {
    lead_ = std::make_unique<SamplerA>(source_->side_dist(), level_seed, cfg_);
    follow_.reset();
  } else {
    follow_ = std::make_unique<SamplerB>(source_->side_dist(), level_seed, cfg_);
    lead_.reset();
  }
}

// Finishes the current level's sampler: records the chosen child and
// either advances to the next level or ends the walk.
void PathEngine::settle_level() {
  std::size_t child = 0;
  if (lead_) {
    if (lead_->phase() == Phase::aborted) {
      phase_ = Phase::aborted;
      abort_reason_ = lead_->abort_reason();
      return;
    }
    total_iterations_ += lead_->rounds();
    child = lead_->output();
  } else {
    if (follow_->phase() == Phase::aborted) {
      phase_ = Phase::aborted;
      abort_reason_ = follow_->abort_reason();
      return;
    }
    total_iterations_ += follow_->rounds();
    child = follow_->output().value();
  }
  path_.push_back(child);
  source_->descend(child);
  ++depth_;
  if (depth_ == rounds_) {
    phase_ = Phase::done;
  } else {
    start_level();
  }
}

std::optional<Message> PathEngine::next_message() {
  if (phase_ != Phase::running) return std::nullopt;
  auto pump = [&](auto& inner) -> std::optional<Message> {
    auto m = inner->next_message();
    if (m) {
      if (m->kind == Message::Kind::bits) bits_sent_ += m->bits.size();
      if (inner->finished()) settle_level();
      return m;
    }
    if (inner->finished()) settle_level();
    return std::nullopt;
  };
  if (lead_) return pump(lead_);
  return pump(follow_);
}

void PathEngine::on_message(const Message& m) {
  if (phase_ != Phase::running) return;
  if (m.kind == Message::Kind::bits) bits_received_ += m.bits.size();
  if (lead_) {
    lead_->on_message(m);
    if (lead_->finished()) {
      // The lead learns completion from the verdict; nothing left to send.
      settle_level();
    }
  } else {
    follow_->on_message(m);
    // The follower still owes its verdict; settled in next_message.
  }
}

PathRun run_path_engines(PathEngine& a, PathEngine& b) {
  while (!a.finished() || !b.finished()) {
    if (auto m = a.next_message()) {
      b.on_message(*m);
      continue;
    }
    if (auto m = b.next_message()) {
      a.on_message(*m);
      continue;
    }
    if (a.finished() && b.finished()) break;
    throw std::logic_error("run_path_engines: protocol deadlock");
  }
  PathRun run;
  run.path_a = a.path();
  run.path_b = b.path();
  run.stats.bits_a = a.bits_sent();
  run.stats.bits_b = b.bits_sent();
  run.stats.rounds_t = a.total_iterations();
  run.stats.k = 0;
  if (a.phase() == Phase::aborted || b.phase() == Phase::aborted) {
    run.stats.outcome =
        a.phase() == Phase::aborted ? a.abort_reason() : b.abort_reason();
    run.match = false;
  } else {
    run.match = run.path_a == run.path_b;
    run.stats.outcome = run.match ? Outcome::match : Outcome::mismatch;
  }
  return run;
}

}  // namespace infocomp
