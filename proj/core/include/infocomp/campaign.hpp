#pragma once

// Monte-Carlo campaign runners: deterministic per-trial subseeds,
// order-independent sharding across workers, CSV rows plus a summary.
// Column layouts are stable; never reorder within a major version.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "infocomp/cpj.hpp"
#include "infocomp/dist.hpp"
#include "infocomp/protocol.hpp"
#include "infocomp/sampler.hpp"

namespace infocomp {

/// Subseed for trial i of a campaign keyed by `seed`. Trial indices
/// live above the round/setup ranges used inside a single run.
SharedSeed trial_seed(const SharedSeed& seed, std::uint64_t trial);

/// Runs fn(trial) for every trial, sharded over worker threads
/// (0 = hardware concurrency). fn must only touch per-trial state.
void parallel_trials(std::uint64_t trials, unsigned threads,
                     const std::function<void(std::uint64_t)>& fn);

struct CampaignSummary {
  std::string engine;
  std::uint64_t trials = 0;
  double eps = 0.0;
  std::string seed_hex;
  double mean_bits = 0.0;
  double p50_bits = 0.0;
  double p90_bits = 0.0;
  double p99_bits = 0.0;
  double error_rate = 0.0;           // mismatches plus aborts, per trial
  std::uint64_t bound_violations = 0;  // hard per-run bound; must be 0
  double mean_bound = 0.0;           // mean of the per-run bound values
  double divergence = 0.0;   // D(P||Q), instance divergence, or IC
  double expected_form = 0.0;  // divergence-level form of the bound
  double identity_residual = 0.0;  // exact-identity residual where one applies
};

// --- one-shot sampling -----------------------------------------------------

struct SampleCampaign {
  Dist p;
  Dist q;
  double eps = 0.01;
  std::uint64_t trials = 10'000;
  SharedSeed seed;
  unsigned threads = 0;
};

struct SampleRow {
  std::uint64_t trial = 0;
  std::size_t a = 0;
  std::int64_t b = -1;  // -1 when B produced no output
  Outcome outcome = Outcome::match;
  std::uint64_t bits_a = 0;
  std::uint64_t bits_b = 0;
  std::uint32_t rounds_t = 0;
  std::uint64_t k = 0;
  double bound = 0.0;
};

std::vector<SampleRow> run_sample_campaign(const SampleCampaign& cfg,
                                           CampaignSummary* summary = nullptr);
// CSV: trial,a,b,outcome,bits_A,bits_B,rounds_t,k,bound
void write_sample_csv(std::ostream& out, const std::vector<SampleRow>& rows);

// --- pointer jumping --------------------------------------------------------

struct CpjCampaign {
  CpjInstance instance;
  double eps = 0.01;
  std::uint64_t trials = 10'000;
  SharedSeed seed;
  unsigned threads = 0;
};

struct CpjRow {
  std::uint64_t trial = 0;
  std::int64_t leaf_a = -1;
  std::int64_t leaf_b = -1;
  bool match = false;
  std::uint64_t bits = 0;
  double divcost_path = 0.0;
  double bound = 0.0;
};

std::vector<CpjRow> run_cpj_campaign(const CpjCampaign& cfg, CampaignSummary* summary = nullptr);
// CSV: trial,leafA,leafB,match,bits,divcost_path,bound
void write_cpj_csv(std::ostream& out, const std::vector<CpjRow>& rows);

// --- protocol compression ----------------------------------------------------

struct CompressCampaign {
  ProtocolTree protocol;
  JointDist mu;
  double eps = 0.01;
  std::uint64_t trials = 10'000;
  SharedSeed seed;
  unsigned threads = 0;
};

struct CompressRow {
  std::uint64_t trial = 0;
  std::string transcript_a;
  std::string transcript_b;
  bool match = false;
  std::uint64_t bits = 0;
  double divcost_path = 0.0;
  double bound = 0.0;
};

std::vector<CompressRow> run_compress_campaign(const CompressCampaign& cfg,
                                               CampaignSummary* summary = nullptr);
// CSV: trial,transcriptA,transcriptB,match,bits,divcost_path,bound
void write_compress_csv(std::ostream& out, const std::vector<CompressRow>& rows);

// --- amortization -------------------------------------------------------------

struct AmortizeCampaign {
  ProtocolTree protocol;
  JointDist mu;
  std::vector<std::size_t> n_list = {1, 4, 16};
  double eps = 0.01;
  std::uint64_t trials = 2'000;
  SharedSeed seed;
  unsigned threads = 0;
};

struct AmortizeRow {
  std::size_t n = 0;
  std::uint64_t trials = 0;
  std::uint64_t matched = 0;
  double mean_bits = 0.0;
  double mean_bits_per_copy = 0.0;
  double per_copy_bound = 0.0;  // IC + 2 CC log2(1/eps), the construction's per-copy budget
};

std::vector<AmortizeRow> run_amortize_campaign(const AmortizeCampaign& cfg);
// CSV: n,trials,matched,mean_bits,mean_bits_per_copy,per_copy_bound
void write_amortize_csv(std::ostream& out, const std::vector<AmortizeRow>& rows);

// --- selftest -----------------------------------------------------------------

struct SelfTestOptions {
  SharedSeed seed = SharedSeed{0x5e1f7e57, 0x1};
  std::uint64_t chain_cases = 50;
  std::uint64_t protocol_cases = 20;
  std::uint64_t product_cases = 10;
  std::uint64_t bound_trials = 500;
  // Mutation hooks for verifying that the selftest can fail:
  double sqrt_coeff = 5.0;           // bound constant under test
  double dist_a_perturbation = 0.0;  // applied to one F_pi table entry
};

struct SelfTestReport {
  double max_chain_residual = 0.0;
  double max_divinfo_residual = 0.0;
  double max_lemma52_residual = 0.0;
  double max_ic_cc_excess = 0.0;
  double max_additivity_residual = 0.0;
  std::uint64_t bound_violations = 0;

  bool pass() const {
    return max_chain_residual < 1e-9 && max_divinfo_residual < 1e-9 &&
           max_lemma52_residual < 1e-9 && max_ic_cc_excess < 1e-9 &&
           max_additivity_residual < 1e-9 && bound_violations == 0;
  }
};

SelfTestReport run_selftest(const SelfTestOptions& opts = {});
void print_selftest_report(std::ostream& out, const SelfTestReport& r);

/// E over mu and public randomness of instance_divergence(F_pi);
/// equals internal_info_cost(pi, mu) exactly.
double expected_divergence(const ProtocolTree& pi, const JointDist& mu);

}  // namespace infocomp
