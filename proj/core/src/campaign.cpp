#include "infocomp/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "infocomp/generate.hpp"
#include "infocomp/info.hpp"

namespace infocomp {

namespace {

constexpr std::uint64_t kTrialSubseedBase = std::uint64_t{1} << 33;

double percentile(std::vector<double>& sorted, double pct) {
  if (sorted.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(sorted.size()))) ;
  return sorted[std::min(sorted.size() - 1, idx == 0 ? 0 : idx - 1)];
}

void fill_bit_stats(CampaignSummary& s, std::vector<double> bits) {
  if (bits.empty()) return;
  double sum = 0.0;
  for (double b : bits) sum += b;
  s.mean_bits = sum / static_cast<double>(bits.size());
  std::sort(bits.begin(), bits.end());
  s.p50_bits = percentile(bits, 50);
  s.p90_bits = percentile(bits, 90);
  s.p99_bits = percentile(bits, 99);
}

}  // namespace

SharedSeed trial_seed(const SharedSeed& seed, std::uint64_t trial) {
  return derive_subseed(seed, kTrialSubseedBase + trial);
}

void parallel_trials(std::uint64_t trials, unsigned threads,
                     const std::function<void(std::uint64_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads == 1 || trials < 2 * threads) {
    for (std::uint64_t t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::vector<std::thread> workers;
  const std::uint64_t chunk = (trials + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = std::min(trials, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (std::uint64_t t = lo; t < hi; ++t) fn(t);
    });
  }
  for (auto& w : workers) w.join();
}

// ---------------------------------------------------------------------------
// sample

std::vector<SampleRow> run_sample_campaign(const SampleCampaign& cfg, CampaignSummary* summary) {
  if (cfg.trials == 0) throw std::invalid_argument("campaign: trials must be >= 1");
  SamplerConfig base;
  base.eps = cfg.eps;
  const SamplerConfig rc = base.resolved(&cfg.p, &cfg.q);

  std::vector<SampleRow> rows(cfg.trials);
  parallel_trials(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    const SampleRun run = run_sampler(cfg.p, cfg.q, trial_seed(cfg.seed, t), rc);
    SampleRow& r = rows[t];
    r.trial = t;
    r.a = run.a;
    r.b = run.b ? static_cast<std::int64_t>(*run.b) : -1;
    r.outcome = run.stats.outcome;
    r.bits_a = run.stats.bits_a;
    r.bits_b = run.stats.bits_b;
    r.rounds_t = run.stats.rounds_t;
    r.k = run.stats.k;
    r.bound = comm_bound(cfg.p, cfg.q, run.a, cfg.eps);
  });

  if (summary) {
    CampaignSummary s;
    s.engine = "sample";
    s.trials = cfg.trials;
    s.eps = cfg.eps;
    s.seed_hex = cfg.seed.to_hex();
    std::vector<double> bits;
    bits.reserve(rows.size());
    double bound_sum = 0.0;
    std::uint64_t errors = 0;
    for (const SampleRow& r : rows) {
      const double total = static_cast<double>(r.bits_a + r.bits_b);
      bits.push_back(total);
      if (r.outcome != Outcome::match) ++errors;
      if (std::isfinite(r.bound)) bound_sum += r.bound;
      const bool abort = r.outcome == Outcome::abort_k_overflow || r.outcome == Outcome::abort_t_max;
      if (!abort && std::isfinite(r.bound) && total > r.bound + 1e-9) ++s.bound_violations;
    }
    fill_bit_stats(s, std::move(bits));
    s.error_rate = static_cast<double>(errors) / static_cast<double>(cfg.trials);
    s.mean_bound = bound_sum / static_cast<double>(cfg.trials);
    s.divergence = kl_divergence(cfg.p, cfg.q);
    if (std::isfinite(s.divergence)) {
      const double d = std::max(0.0, s.divergence);
      s.expected_form = d + 2.0 * std::log2(1.0 / cfg.eps) + 5.0 * std::sqrt(d) + 9.0;
    } else {
      s.expected_form = kInfiniteBits;
    }
    *summary = s;
  }
  return rows;
}

void write_sample_csv(std::ostream& out, const std::vector<SampleRow>& rows) {
  out << "trial,a,b,outcome,bits_A,bits_B,rounds_t,k,bound\n";
  out << std::setprecision(12);
  for (const SampleRow& r : rows) {
    out << r.trial << ',' << r.a << ',' << r.b << ',' << to_string(r.outcome) << ',' << r.bits_a
        << ',' << r.bits_b << ',' << r.rounds_t << ',' << r.k << ',' << r.bound << '\n';
  }
}

// ---------------------------------------------------------------------------
// cpj

std::vector<CpjRow> run_cpj_campaign(const CpjCampaign& cfg, CampaignSummary* summary) {
  if (cfg.trials == 0) throw std::invalid_argument("campaign: trials must be >= 1");
  cfg.instance.validate();
  const std::uint32_t k = cfg.instance.rounds;

  std::vector<CpjRow> rows(cfg.trials);
  parallel_trials(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    const PathSampleRun run = sample_path(cfg.instance, trial_seed(cfg.seed, t), cfg.eps);
    CpjRow& r = rows[t];
    r.trial = t;
    const bool complete_a = run.path_a.child_indices.size() == k;
    const bool complete_b = run.path_b.child_indices.size() == k;
    r.leaf_a = complete_a ? static_cast<std::int64_t>(run.path_a.leaf_index) : -1;
    r.leaf_b = complete_b ? static_cast<std::int64_t>(run.path_b.leaf_index) : -1;
    r.match = run.match;
    r.bits = run.stats.total_bits();
    r.divcost_path = run.path_a.divergence_cost;
    const double clamped = path_divergence_clamped(cfg.instance.root, run.path_a.child_indices);
    r.bound = path_comm_bound(r.divcost_path, clamped, k, cfg.eps);
  });

  if (summary) {
    CampaignSummary s;
    s.engine = "cpj";
    s.trials = cfg.trials;
    s.eps = cfg.eps;
    s.seed_hex = cfg.seed.to_hex();
    std::vector<double> bits;
    bits.reserve(rows.size());
    double bound_sum = 0.0;
    std::uint64_t errors = 0;
    for (const CpjRow& r : rows) {
      bits.push_back(static_cast<double>(r.bits));
      if (!r.match) ++errors;
      if (std::isfinite(r.bound)) bound_sum += r.bound;
      if (r.match && std::isfinite(r.bound) && static_cast<double>(r.bits) > r.bound + 1e-9)
        ++s.bound_violations;
    }
    fill_bit_stats(s, std::move(bits));
    s.error_rate = static_cast<double>(errors) / static_cast<double>(cfg.trials);
    s.mean_bound = bound_sum / static_cast<double>(cfg.trials);
    s.divergence = instance_divergence(cfg.instance);
    const double d = std::max(0.0, s.divergence);
    s.expected_form = d + 2.0 * k * std::log2(1.0 / cfg.eps) + 5.0 * std::sqrt(k * d) + 9.0 * k;
    *summary = s;
  }
  return rows;
}

void write_cpj_csv(std::ostream& out, const std::vector<CpjRow>& rows) {
  out << "trial,leafA,leafB,match,bits,divcost_path,bound\n";
  out << std::setprecision(12);
  for (const CpjRow& r : rows) {
    out << r.trial << ',' << r.leaf_a << ',' << r.leaf_b << ',' << (r.match ? 1 : 0) << ','
        << r.bits << ',' << r.divcost_path << ',' << r.bound << '\n';
  }
}

// ---------------------------------------------------------------------------
// compress

std::vector<CompressRow> run_compress_campaign(const CompressCampaign& cfg,
                                               CampaignSummary* summary) {
  if (cfg.trials == 0) throw std::invalid_argument("campaign: trials must be >= 1");
  cfg.protocol.validate();

  std::vector<CompressRow> rows(cfg.trials);
  parallel_trials(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    const CompressRun run = compress(cfg.protocol, cfg.mu, cfg.eps, trial_seed(cfg.seed, t));
    CompressRow& r = rows[t];
    r.trial = t;
    auto fmt = [&](const std::vector<std::string>& labels) {
      std::string s = "r" + std::to_string(run.r) + ":";
      for (const auto& l : labels) s += l;
      return s;
    };
    r.transcript_a = fmt(run.labels_a);
    r.transcript_b = fmt(run.labels_b);
    r.match = run.match;
    r.bits = run.stats.total_bits();
    r.divcost_path = run.div_signed;
    r.bound = path_comm_bound(run.div_signed, run.div_clamped, run.rounds, cfg.eps);
  });

  if (summary) {
    CampaignSummary s;
    s.engine = "compress";
    s.trials = cfg.trials;
    s.eps = cfg.eps;
    s.seed_hex = cfg.seed.to_hex();
    std::vector<double> bits;
    bits.reserve(rows.size());
    double bound_sum = 0.0;
    std::uint64_t errors = 0;
    for (const CompressRow& r : rows) {
      bits.push_back(static_cast<double>(r.bits));
      if (!r.match) ++errors;
      if (std::isfinite(r.bound)) bound_sum += r.bound;
      if (r.match && std::isfinite(r.bound) && static_cast<double>(r.bits) > r.bound + 1e-9)
        ++s.bound_violations;
    }
    fill_bit_stats(s, std::move(bits));
    s.error_rate = static_cast<double>(errors) / static_cast<double>(cfg.trials);
    s.mean_bound = bound_sum / static_cast<double>(cfg.trials);
    const double ic = internal_info_cost(cfg.protocol, cfg.mu);
    const std::uint32_t k = cfg.protocol.rounds();
    s.divergence = ic;
    s.expected_form =
        ic + 2.0 * k * std::log2(1.0 / cfg.eps) + 5.0 * std::sqrt(k * ic) + 9.0 * k;
    s.identity_residual = std::abs(expected_divergence(cfg.protocol, cfg.mu) - ic);
    *summary = s;
  }
  return rows;
}

void write_compress_csv(std::ostream& out, const std::vector<CompressRow>& rows) {
  out << "trial,transcriptA,transcriptB,match,bits,divcost_path,bound\n";
  out << std::setprecision(12);
  for (const CompressRow& r : rows) {
    out << r.trial << ',' << r.transcript_a << ',' << r.transcript_b << ',' << (r.match ? 1 : 0)
        << ',' << r.bits << ',' << r.divcost_path << ',' << r.bound << '\n';
  }
}

// ---------------------------------------------------------------------------
// amortize

std::vector<AmortizeRow> run_amortize_campaign(const AmortizeCampaign& cfg) {
  if (cfg.trials == 0) throw std::invalid_argument("campaign: trials must be >= 1");
  cfg.protocol.validate();
  const double ic = internal_info_cost(cfg.protocol, cfg.mu);
  const double cc = comm_complexity(cfg.protocol);

  std::vector<AmortizeRow> out;
  for (std::size_t n : cfg.n_list) {
    std::vector<std::uint64_t> bits(cfg.trials, 0);
    std::vector<std::uint8_t> matched(cfg.trials, 0);
    // Per-n seed block so changing the n-list never re-pairs seeds.
    const SharedSeed block = derive_subseed(cfg.seed, kTrialSubseedBase + (std::uint64_t{n} << 24));
    parallel_trials(cfg.trials, cfg.threads, [&](std::uint64_t t) {
      const ParallelCompressRun run =
          compress_parallel(cfg.protocol, cfg.mu, n, cfg.eps, trial_seed(block, t));
      bits[t] = run.stats.total_bits();
      matched[t] = run.match ? 1 : 0;
    });
    AmortizeRow row;
    row.n = n;
    row.trials = cfg.trials;
    double sum = 0.0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      sum += static_cast<double>(bits[t]);
      row.matched += matched[t];
    }
    row.mean_bits = sum / static_cast<double>(cfg.trials);
    row.mean_bits_per_copy = row.mean_bits / static_cast<double>(n);
    row.per_copy_bound = ic + 2.0 * cc * std::log2(1.0 / cfg.eps);
    out.push_back(row);
  }
  return out;
}

void write_amortize_csv(std::ostream& out, const std::vector<AmortizeRow>& rows) {
  out << "n,trials,matched,mean_bits,mean_bits_per_copy,per_copy_bound\n";
  out << std::setprecision(12);
  for (const AmortizeRow& r : rows) {
    out << r.n << ',' << r.trials << ',' << r.matched << ',' << r.mean_bits << ','
        << r.mean_bits_per_copy << ',' << r.per_copy_bound << '\n';
  }
}

// ---------------------------------------------------------------------------
// selftest

double expected_divergence(const ProtocolTree& pi, const JointDist& mu) {
  double total = 0.0;
  for (std::size_t r = 0; r < pi.variants.size(); ++r) {
    const double rp = pi.variants[r].prob;
    if (rp == 0.0) continue;
    for (std::size_t x = 0; x < mu.x_size(); ++x) {
      for (std::size_t y = 0; y < mu.y_size(); ++y) {
        const double m = mu(x, y);
        if (m == 0.0) continue;
        total += rp * m * instance_divergence(build_cpj(pi, x, y, r, mu));
      }
    }
  }
  return total;
}

namespace {

// I(A;B|C) from a flat p(a,b,c) tensor with explicit axis extents.
Joint3 make_joint3(std::vector<double> probs, std::size_t na, std::size_t nb, std::size_t nc) {
  return Joint3(na, nb, nc, std::move(probs));
}

// Chain rule Prop-style check on a random 4-way joint over
// (c1, c2, b, d), all axes of size `m`.
double chain_rule_residual(DetStream& stream, std::size_t m) {
  const std::size_t total = m * m * m * m;
  const Dist w = random_dist(stream, total, 0.2);
  auto p4 = [&](std::size_t c1, std::size_t c2, std::size_t b, std::size_t d) {
    return w(((c1 * m + c2) * m + b) * m + d);
  };

  // I(C1C2;B|D): X = (c1,c2), Y = b, Z = d.
  std::vector<double> lhs(m * m * m * m);
  for (std::size_t c1 = 0; c1 < m; ++c1)
    for (std::size_t c2 = 0; c2 < m; ++c2)
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t d = 0; d < m; ++d)
          lhs[((c1 * m + c2) * m + b) * m + d] = p4(c1, c2, b, d);
  const double i_all =
      conditional_mutual_information(make_joint3(std::move(lhs), m * m, m, m));

  // I(C1;B|D): marginalize c2.
  std::vector<double> first(m * m * m, 0.0);
  for (std::size_t c1 = 0; c1 < m; ++c1)
    for (std::size_t c2 = 0; c2 < m; ++c2)
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t d = 0; d < m; ++d) first[(c1 * m + b) * m + d] += p4(c1, c2, b, d);
  const double i_first = conditional_mutual_information(make_joint3(std::move(first), m, m, m));

  // I(C2;B|C1,D): X = c2, Y = b, Z = (c1,d).
  std::vector<double> second(m * m * m * m);
  for (std::size_t c2 = 0; c2 < m; ++c2)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c1 = 0; c1 < m; ++c1)
        for (std::size_t d = 0; d < m; ++d)
          second[(c2 * m + b) * (m * m) + c1 * m + d] = p4(c1, c2, b, d);
  const double i_second =
      conditional_mutual_information(make_joint3(std::move(second), m, m, m * m));

  return std::abs(i_all - (i_first + i_second));
}

// I(A;B|C) = E_{a,c}[D(B|ac || B|c)] on a random 3-way joint.
double divinfo_residual(DetStream& stream, std::size_t m) {
  const Dist w = random_dist(stream, m * m * m, 0.2);
  auto p3 = [&](std::size_t a, std::size_t b, std::size_t c) { return w((a * m + b) * m + c); };
  const Joint3 j(m, m, m, std::vector<double>(w.probs().begin(), w.probs().end()));
  const double lhs = conditional_mutual_information(j, CmiTarget::xy_given_z);

  double rhs = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t c = 0; c < m; ++c) {
      double p_ac = 0.0, p_c = 0.0;
      for (std::size_t b = 0; b < m; ++b) p_ac += p3(a, b, c);
      for (std::size_t aa = 0; aa < m; ++aa)
        for (std::size_t b = 0; b < m; ++b) p_c += p3(aa, b, c);
      if (p_ac == 0.0) continue;
      std::vector<double> b_ac(m), b_c(m, 0.0);
      for (std::size_t b = 0; b < m; ++b) {
        b_ac[b] = p3(a, b, c) / p_ac;
        for (std::size_t aa = 0; aa < m; ++aa) b_c[b] += p3(aa, b, c);
      }
      for (double& v : b_c) v /= p_c;
      rhs += p_ac * kl_divergence(Dist(Universe{m}, std::move(b_ac)),
                                  Dist(Universe{m}, std::move(b_c)));
    }
  }
  return std::abs(lhs - rhs);
}

}  // namespace

SelfTestReport run_selftest(const SelfTestOptions& opts) {
  SelfTestReport report;
  DetStream stream(opts.seed);

  for (std::uint64_t c = 0; c < opts.chain_cases; ++c) {
    report.max_chain_residual = std::max(report.max_chain_residual, chain_rule_residual(stream, 3));
    report.max_divinfo_residual = std::max(report.max_divinfo_residual, divinfo_residual(stream, 3));
  }

  for (std::uint64_t c = 0; c < opts.protocol_cases; ++c) {
    const std::uint32_t depth = 2 + static_cast<std::uint32_t>(stream.next_index(2));
    const std::size_t xs = 2 + stream.next_index(3);
    const std::size_t ys = 2 + stream.next_index(3);
    const std::size_t rs = 1 + stream.next_index(2);
    SharedSeed case_seed{stream.next_u64(), stream.next_u64()};
    ProtocolTree pi = gen_random_protocol(depth, xs, ys, rs, case_seed);
    DetStream mu_stream(derive_subseed(case_seed, 7));
    const JointDist mu = random_joint(mu_stream, xs, ys);
    const double ic = internal_info_cost(pi, mu);

    ProtocolTree measured = pi;
    if (opts.dist_a_perturbation != 0.0) {
      // Nudge one table entry of the protocol the divergence side sees.
      Dist& d0 = measured.variants[0].root.dists[0];
      std::vector<double> probs(d0.probs().begin(), d0.probs().end());
      const double delta = std::min(opts.dist_a_perturbation, probs[1] / 2);
      probs[0] += delta;
      probs[1] -= delta;
      const std::size_t n_probs = probs.size();
      d0 = Dist(Universe{n_probs}, std::move(probs));
    }
    const double ed = expected_divergence(measured, mu);
    report.max_lemma52_residual = std::max(report.max_lemma52_residual, std::abs(ed - ic));
    report.max_ic_cc_excess =
        std::max(report.max_ic_cc_excess, ic - static_cast<double>(comm_complexity(pi)));
  }

  for (std::uint64_t c = 0; c < opts.product_cases; ++c) {
    const CpjInstance f1 = gen_random_cpj(2, 2, SharedSeed{stream.next_u64(), stream.next_u64()});
    CpjInstance f2 = gen_random_cpj(2, 2, SharedSeed{stream.next_u64(), stream.next_u64()});
    // Products need per-level ownership agreement; mirror when needed.
    auto align = [&](auto&& self, CpjNode& n, Owner expect) -> void {
      if (n.is_leaf()) return;
      if (n.owner != expect) {
        std::swap(n.dist_a, n.dist_b);
        n.owner = expect;
      }
      for (CpjNode& ch : n.children) self(self, ch, other(expect));
    };
    align(align, f2.root, f1.root.owner);
    const CpjInstance prod = product_instance({f1, f2});
    const double residual =
        std::abs(instance_divergence(prod) - (instance_divergence(f1) + instance_divergence(f2)));
    report.max_additivity_residual = std::max(report.max_additivity_residual, residual);
  }

  // Hard per-run bound on a high-ratio instance (log-ratio 17, so the
  // widening loop genuinely reaches t = 5 and the 5*sqrt(d) term is load
  // bearing).
  {
    const std::size_t universe = std::size_t{1} << 17;
    const auto pair = gen_uniform_subset(universe, universe, 1);
    const double eps = 0.01;
    SamplerConfig cfg;
    cfg.eps = eps;
    const SamplerConfig rc = cfg.resolved(&pair.p, &pair.q);
    const SharedSeed block = derive_subseed(opts.seed, 99);
    std::vector<std::uint8_t> violations(opts.bound_trials, 0);
    parallel_trials(opts.bound_trials, 0, [&](std::uint64_t t) {
      const SampleRun run = run_sampler(pair.p, pair.q, trial_seed(block, t), rc);
      if (run.stats.outcome == Outcome::abort_k_overflow ||
          run.stats.outcome == Outcome::abort_t_max)
        return;
      const double l = std::max(0.0, std::log2(pair.p(run.a) / pair.q(run.a)));
      const double log_eps = std::log2(1.0 / eps);
      const double bound =
          l + log_eps + std::log2(log_eps) + opts.sqrt_coeff * std::sqrt(l) + 9.0;
      if (static_cast<double>(run.stats.total_bits()) > bound + 1e-9) violations[t] = 1;
    });
    for (std::uint8_t v : violations) report.bound_violations += v;
  }

  return report;
}

void print_selftest_report(std::ostream& out, const SelfTestReport& r) {
  out << std::setprecision(6);
  out << (r.max_chain_residual < 1e-9 ? "[PASS]" : "[FAIL]")
      << " chain rule residual " << r.max_chain_residual << "\n";
  out << (r.max_divinfo_residual < 1e-9 ? "[PASS]" : "[FAIL]")
      << " divergence/information identity residual " << r.max_divinfo_residual << "\n";
  out << (r.max_lemma52_residual < 1e-9 ? "[PASS]" : "[FAIL]")
      << " expected divergence vs internal information cost residual " << r.max_lemma52_residual
      << "\n";
  out << (r.max_ic_cc_excess < 1e-9 ? "[PASS]" : "[FAIL]")
      << " information cost within communication (max excess " << r.max_ic_cc_excess << ")\n";
  out << (r.max_additivity_residual < 1e-9 ? "[PASS]" : "[FAIL]")
      << " product additivity residual " << r.max_additivity_residual << "\n";
  out << (r.bound_violations == 0 ? "[PASS]" : "[FAIL]") << " hard per-run bound ("
      << r.bound_violations << " violations)\n";
}

}  // namespace infocomp
