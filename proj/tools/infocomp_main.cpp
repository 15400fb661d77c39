// infocomp: experiment harness for interactive protocol compression.
// Subcommands: sample, cpj, compress, amortize, info, gen, serve, selftest.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "infocomp/campaign.hpp"
#include "infocomp/generate.hpp"
#include "infocomp/json_io.hpp"
#include "infocomp/wire.hpp"
#include "json.hpp"

namespace {

using infocomp::CampaignSummary;
using infocomp::SharedSeed;
using nlohmann::json;

struct CommonOpts {
  std::string seed_hex = "00000000000000000000000000000001";
  std::string out;
  double eps = 0.01;
  std::uint64_t trials = 10'000;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_trials = true) {
  cmd->add_option("--seed", opts.seed_hex, "128-bit shared seed, 32 hex characters");
  cmd->add_option("--out", opts.out, "CSV output path (stdout when omitted)");
  cmd->add_option("--eps", opts.eps, "error parameter in (0, 1/2]");
  if (with_trials) cmd->add_option("--trials", opts.trials, "number of Monte-Carlo trials");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

json summary_json(const CampaignSummary& s) {
  return json{{"engine", s.engine},
              {"trials", s.trials},
              {"eps", s.eps},
              {"seed", s.seed_hex},
              {"mean_bits", s.mean_bits},
              {"p50_bits", s.p50_bits},
              {"p90_bits", s.p90_bits},
              {"p99_bits", s.p99_bits},
              {"error_rate", s.error_rate},
              {"bound_violations", s.bound_violations},
              {"mean_bound", s.mean_bound},
              {"divergence", s.divergence},
              {"expected_form_bound", s.expected_form},
              {"identity_residual", s.identity_residual}};
}

// CSV to --out (or stdout), summary JSON to stdout (and next to the CSV).
template <typename Rows, typename Writer>
void emit(const CommonOpts& opts, const Rows& rows, Writer writer, const json& summary) {
  if (opts.out.empty()) {
    writer(std::cout, rows);
    std::cerr << summary.dump(2) << "\n";
  } else {
    std::ofstream f(opts.out);
    if (!f) throw std::runtime_error("cannot write " + opts.out);
    writer(f, rows);
    infocomp::save_json_file(opts.out + ".summary.json", summary);
    std::cout << summary.dump(2) << "\n";
  }
}

infocomp::Dist load_dist_arg(const std::string& path, const char* pair_key) {
  const json j = infocomp::load_json_file(path);
  if (j.contains(pair_key)) return infocomp::dist_from_json(j.at(pair_key));
  return infocomp::dist_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interactive protocol compression experiments"};
  app.require_subcommand(1);

  // --- sample ---------------------------------------------------------------
  CommonOpts sample_opts;
  std::string p_path, q_path, pair_path;
  auto* sample_cmd = app.add_subcommand("sample", "one-shot sampling campaign");
  add_common(sample_cmd, sample_opts);
  sample_cmd->add_option("--p", p_path, "P distribution JSON (player A)");
  sample_cmd->add_option("--q", q_path, "Q distribution JSON (player B)");
  sample_cmd->add_option("--pair", pair_path, "combined {p, q} JSON (as written by gen)");

  // --- cpj ------------------------------------------------------------------
  CommonOpts cpj_opts;
  std::string instance_path;
  auto* cpj_cmd = app.add_subcommand("cpj", "correlated pointer jumping campaign");
  add_common(cpj_cmd, cpj_opts);
  cpj_cmd->add_option("--instance", instance_path, "CPJ instance JSON")->required();

  // --- compress ---------------------------------------------------------------
  CommonOpts compress_opts;
  std::string protocol_path, mu_path;
  auto* compress_cmd = app.add_subcommand("compress", "protocol compression campaign");
  add_common(compress_cmd, compress_opts);
  compress_cmd->add_option("--protocol", protocol_path, "protocol JSON")->required();
  compress_cmd->add_option("--mu", mu_path, "input prior JSON")->required();

  // --- amortize ---------------------------------------------------------------
  CommonOpts amortize_opts;
  amortize_opts.trials = 2'000;
  std::string am_protocol_path, am_mu_path, n_list_str = "1,4,16";
  auto* amortize_cmd = app.add_subcommand("amortize", "per-copy cost of compressing pi^n");
  add_common(amortize_cmd, amortize_opts);
  amortize_cmd->add_option("--protocol", am_protocol_path, "protocol JSON")->required();
  amortize_cmd->add_option("--mu", am_mu_path, "input prior JSON")->required();
  amortize_cmd->add_option("--n-list", n_list_str, "comma-separated copy counts");

  // --- info -------------------------------------------------------------------
  std::string info_protocol_path, info_mu_path;
  auto* info_cmd = app.add_subcommand("info", "exact information quantities of a protocol");
  info_cmd->add_option("--protocol", info_protocol_path, "protocol JSON")->required();
  info_cmd->add_option("--mu", info_mu_path, "input prior JSON")->required();

  // --- gen --------------------------------------------------------------------
  std::string gen_kind, gen_out, gen_seed_hex = "00000000000000000000000000000001";
  std::size_t gen_universe = 16, gen_sq = 16, gen_sp = 1;
  std::uint32_t gen_depth = 3;
  std::size_t gen_branching = 2, gen_x = 4, gen_y = 4, gen_r = 1;
  double gen_margin = 0.95;
  auto* gen_cmd = app.add_subcommand("gen", "generate instances deterministically");
  gen_cmd->add_option("--kind", gen_kind, "uniform-subset | random-cpj | random-protocol | promise-cpj")
      ->required();
  gen_cmd->add_option("--out", gen_out, "output JSON path")->required();
  gen_cmd->add_option("--seed", gen_seed_hex, "generator seed, 32 hex characters");
  gen_cmd->add_option("--universe", gen_universe, "universe size (uniform-subset)");
  gen_cmd->add_option("--sq", gen_sq, "|S_Q| (uniform-subset)");
  gen_cmd->add_option("--sp", gen_sp, "|S_P| (uniform-subset)");
  gen_cmd->add_option("--depth", gen_depth, "tree depth");
  gen_cmd->add_option("--branching", gen_branching, "children per node (random-cpj)");
  gen_cmd->add_option("--x-size", gen_x, "input space size for A (random-protocol)");
  gen_cmd->add_option("--y-size", gen_y, "input space size for B (random-protocol)");
  gen_cmd->add_option("--r-size", gen_r, "public randomness support (random-protocol)");
  gen_cmd->add_option("--margin", gen_margin, "promise margin (promise-cpj)");

  // --- serve -------------------------------------------------------------------
  std::string serve_role, serve_listen, serve_connect, serve_engine_path;
  std::string serve_seed_hex = "00000000000000000000000000000001";
  auto* serve_cmd = app.add_subcommand("serve", "run one endpoint over TCP");
  serve_cmd->add_option("--role", serve_role, "A or B")->required();
  serve_cmd->add_option("--listen", serve_listen, "host:port to listen on");
  serve_cmd->add_option("--connect", serve_connect, "host:port to connect to");
  serve_cmd->add_option("--engine", serve_engine_path, "engine spec JSON")->required();
  serve_cmd->add_option("--seed", serve_seed_hex, "shared seed, 32 hex characters");

  // --- selftest ------------------------------------------------------------------
  auto* selftest_cmd = app.add_subcommand("selftest", "exact identities and hard bounds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample_cmd) {
      infocomp::SampleCampaign cfg;
      if (!pair_path.empty()) {
        cfg.p = load_dist_arg(pair_path, "p");
        const json j = infocomp::load_json_file(pair_path);
        cfg.q = infocomp::dist_from_json(j.at("q"));
      } else {
        if (p_path.empty() || q_path.empty())
          throw std::runtime_error("sample needs --p and --q (or --pair)");
        cfg.p = load_dist_arg(p_path, "p");
        cfg.q = load_dist_arg(q_path, "q");
      }
      cfg.eps = sample_opts.eps;
      cfg.trials = sample_opts.trials;
      cfg.seed = SharedSeed::from_hex(sample_opts.seed_hex);
      cfg.threads = sample_opts.threads;
      CampaignSummary summary;
      const auto rows = run_sample_campaign(cfg, &summary);
      emit(sample_opts, rows, [](std::ostream& o, const auto& r) { write_sample_csv(o, r); },
           summary_json(summary));
    } else if (*cpj_cmd) {
      infocomp::CpjCampaign cfg{infocomp::cpj_from_json(infocomp::load_json_file(instance_path)),
                                cpj_opts.eps,
                                cpj_opts.trials,
                                SharedSeed::from_hex(cpj_opts.seed_hex),
                                cpj_opts.threads};
      CampaignSummary summary;
      const auto rows = run_cpj_campaign(cfg, &summary);
      emit(cpj_opts, rows, [](std::ostream& o, const auto& r) { write_cpj_csv(o, r); },
           summary_json(summary));
    } else if (*compress_cmd) {
      infocomp::CompressCampaign cfg{
          infocomp::protocol_from_json(infocomp::load_json_file(protocol_path)),
          infocomp::joint_from_json(infocomp::load_json_file(mu_path)),
          compress_opts.eps,
          compress_opts.trials,
          SharedSeed::from_hex(compress_opts.seed_hex),
          compress_opts.threads};
      CampaignSummary summary;
      const auto rows = run_compress_campaign(cfg, &summary);
      emit(compress_opts, rows, [](std::ostream& o, const auto& r) { write_compress_csv(o, r); },
           summary_json(summary));
    } else if (*amortize_cmd) {
      infocomp::AmortizeCampaign cfg;
      cfg.protocol = infocomp::protocol_from_json(infocomp::load_json_file(am_protocol_path));
      cfg.mu = infocomp::joint_from_json(infocomp::load_json_file(am_mu_path));
      cfg.eps = amortize_opts.eps;
      cfg.trials = amortize_opts.trials;
      cfg.seed = SharedSeed::from_hex(amortize_opts.seed_hex);
      cfg.threads = amortize_opts.threads;
      cfg.n_list.clear();
      std::stringstream ss(n_list_str);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.n_list.push_back(std::stoull(tok));
      const auto rows = run_amortize_campaign(cfg);
      if (amortize_opts.out.empty()) {
        write_amortize_csv(std::cout, rows);
      } else {
        std::ofstream f(amortize_opts.out);
        write_amortize_csv(f, rows);
        write_amortize_csv(std::cout, rows);
      }
    } else if (*info_cmd) {
      const auto pi = infocomp::protocol_from_json(infocomp::load_json_file(info_protocol_path));
      const auto mu = infocomp::joint_from_json(infocomp::load_json_file(info_mu_path));
      const json out{{"internal_information_cost", infocomp::internal_info_cost(pi, mu)},
                     {"external_information_cost", infocomp::external_info_cost(pi, mu)},
                     {"communication_complexity", infocomp::comm_complexity(pi)},
                     {"expected_divergence", infocomp::expected_divergence(pi, mu)},
                     {"rounds", pi.rounds()}};
      std::cout << out.dump(2) << "\n";
    } else if (*gen_cmd) {
      const SharedSeed seed = SharedSeed::from_hex(gen_seed_hex);
      json out;
      if (gen_kind == "uniform-subset") {
        const auto pair = infocomp::gen_uniform_subset(gen_universe, gen_sq, gen_sp);
        out = json{{"p", infocomp::to_json(pair.p)}, {"q", infocomp::to_json(pair.q)}};
      } else if (gen_kind == "random-cpj") {
        out = infocomp::to_json(infocomp::gen_random_cpj(gen_depth, gen_branching, seed));
      } else if (gen_kind == "random-protocol") {
        out = infocomp::to_json(infocomp::gen_random_protocol(gen_depth, gen_x, gen_y, gen_r, seed));
      } else if (gen_kind == "promise-cpj") {
        out = infocomp::to_json(infocomp::gen_promise_cpj(gen_depth, gen_margin, seed));
      } else {
        throw std::runtime_error("unknown --kind " + gen_kind);
      }
      infocomp::save_json_file(gen_out, out);
      std::cout << "wrote " << gen_out << "\n";
    } else if (*serve_cmd) {
      if (serve_role != "A" && serve_role != "B")
        throw std::runtime_error("--role must be A or B");
      if (serve_listen.empty() == serve_connect.empty())
        throw std::runtime_error("exactly one of --listen/--connect required");
      const infocomp::Owner role =
          serve_role == "A" ? infocomp::Owner::a : infocomp::Owner::b;
      const auto spec = infocomp::engine_spec_from_json(
          infocomp::load_json_file(serve_engine_path), role);
      auto channel = serve_listen.empty() ? infocomp::tcp_connect(serve_connect)
                                          : infocomp::tcp_listen_accept(serve_listen);
      auto engine = infocomp::make_endpoint(spec, role, SharedSeed::from_hex(serve_seed_hex));
      const auto report = infocomp::run_endpoint_over_channel(*engine, *channel);
      json out{{"role", serve_role},
               {"phase", report.phase == infocomp::Phase::done ? "done" : "aborted"},
               {"outputs", report.outputs},
               {"bits_sent", report.bits_sent},
               {"bits_received", report.bits_received}};
      if (report.phase == infocomp::Phase::aborted)
        out["abort_reason"] = infocomp::to_string(report.abort_reason);
      std::cout << out.dump(2) << "\n";
    } else if (*selftest_cmd) {
      const auto report = infocomp::run_selftest();
      infocomp::print_selftest_report(std::cout, report);
      return report.pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
