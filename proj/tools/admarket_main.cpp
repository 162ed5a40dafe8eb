// Command-line front end: solve one market configuration, sweep
// comparative-statics grids, run the agent-level simulator, or run the
// self-verification suite. Exit codes: 0 success, 1 usage error,
// 2 numerical failure, 3 verification failure.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "admarket/mcsim.hpp"
#include "admarket/sweep.hpp"
#include "admarket/verify.hpp"

namespace {

using namespace admarket;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;
constexpr int kVerification = 3;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ADMARKET_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
    std::cerr << "warning: ignoring non-numeric ADMARKET_SEED\n";
  }
  return 12345;
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j;
  f >> j;
  return j;
}

// Flags win over config-file values: a key applies only when its flag was
// not given on the command line.
template <typename T>
void merge_key(const nlohmann::json& j, const char* key,
               const CLI::Option* opt, T& value) {
  if (opt->count() == 0 && j.contains(key)) value = j[key].get<T>();
}

void write_output(const std::string& out_path, const std::string& body) {
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file " + out_path);
  f << body;
}

struct MarketFlags {
  std::string dist = "uniform";
  double a = 0.75;
  double lambda = 0.5;
  int J = 2;
  double tol = 1e-9;

  CLI::Option* dist_opt = nullptr;
  CLI::Option* a_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* j_opt = nullptr;
  CLI::Option* tol_opt = nullptr;

  void attach(CLI::App* cmd) {
    dist_opt = cmd->add_option("--dist", dist, "Value distribution family")
                   ->check(CLI::IsMember({"uniform", "power"}));
    a_opt = cmd->add_option("--a", a, "Power-family exponent (F(v) = v^a)");
    lambda_opt =
        cmd->add_option("--lambda", lambda, "On-platform consumer share");
    j_opt = cmd->add_option("--J", J, "Number of firms");
    tol_opt = cmd->add_option("--tol", tol, "Quadrature tolerance");
  }

  void merge(const nlohmann::json& j) {
    merge_key(j, "dist", dist_opt, dist);
    merge_key(j, "a", a_opt, a);
    merge_key(j, "lambda", lambda_opt, lambda);
    merge_key(j, "J", j_opt, J);
    merge_key(j, "tol", tol_opt, tol);
  }

  MarketConfig build() const {
    MarketConfig c;
    c.lambda = lambda;
    c.J = J;
    c.dist = dist == "power" ? ValueDistribution::power(a)
                             : ValueDistribution::uniform();
    c.quad.abs_tol = tol;
    c.validate();
    return c;
  }
};

std::vector<Mechanism> select_mechanisms(const std::string& name) {
  if (name == "all") return all_mechanisms();
  return {mechanism_from_label(name)};
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int cmd_solve(const MarketFlags& mf, const std::string& mechanism,
              const std::string& out_path, const std::string& format) {
  const MarketConfig c = mf.build();
  const std::vector<Mechanism> mechs = select_mechanisms(mechanism);
  const bool need_cap =
      std::find(mechs.begin(), mechs.end(), Mechanism::IndependentManaged) !=
      mechs.end();
  const SolvedMarket solved = solve_market(c, need_cap);
  std::vector<EquilibriumOutcome> outcomes;
  outcomes.reserve(mechs.size());
  for (Mechanism m : mechs) outcomes.push_back(mechanism_outcome(m, c, solved));

  if (format == "json") {
    nlohmann::ordered_json j;
    j["family"] = c.dist.label();
    j["lambda"] = c.lambda;
    j["J"] = c.J;
    nlohmann::ordered_json prices;
    prices["monopoly"] = solved.prices.monopoly;
    prices["bidding"] = solved.prices.bidding;
    prices["best_value"] = solved.prices.best_value;
    prices["candidate"] = solved.prices.candidate;
    prices["independent"] = solved.prices.independent;
    prices["privacy"] = solved.prices.privacy;
    j["prices"] = std::move(prices);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& o : outcomes) {
      arr.push_back(nlohmann::ordered_json::parse(outcome_to_json(o)));
    }
    j["outcomes"] = std::move(arr);
    write_output(out_path, j.dump(2) + "\n");
    return kOk;
  }

  std::ostringstream os;
  os << "family=" << c.dist.label() << " lambda=" << fmt(c.lambda)
     << " J=" << c.J << "\n";
  os << "monopoly    " << fmt(solved.prices.monopoly) << "\n";
  os << "bidding     " << fmt(solved.prices.bidding) << "\n";
  os << "best_value  " << fmt(solved.prices.best_value) << "\n";
  os << "candidate   " << fmt(solved.prices.candidate) << "\n";
  os << "independent " << fmt(solved.prices.independent) << "\n";
  os << "privacy     " << fmt(solved.prices.privacy) << "\n";
  for (const auto& o : outcomes) {
    os << "\nmechanism=" << mechanism_label(o.mechanism) << "\n";
    os << "  posted_price      " << fmt(o.posted_price) << "\n";
    os << "  cap               " << fmt(o.on_platform_cap) << "\n";
    os << "  cs_on             " << fmt(o.cs_on) << "\n";
    os << "  cs_off            " << fmt(o.cs_off) << "\n";
    os << "  cs_total          " << fmt(o.cs_total) << "\n";
    os << "  profit_per_firm   " << fmt(o.profit_per_firm) << "\n";
    os << "  transfer_per_firm " << fmt(o.transfer_per_firm) << "\n";
    os << "  platform_revenue  " << fmt(o.platform_revenue) << "\n";
    os << "  producer_surplus  " << fmt(o.producer_surplus) << "\n";
    os << "  welfare_total     " << fmt(o.welfare_total) << "\n";
  }
  write_output(out_path, os.str());
  return kOk;
}

int cmd_sweep(SweepSpec spec, std::uint64_t seed, long long verify_mc,
              const std::string& out_path, const std::string& format) {
  auto rows = run_sweep(spec);
  if (verify_mc > 0) {
    double worst_z = 0.0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto& row = rows[i];
      if (!row.error.empty()) continue;
      MarketConfig c;
      c.lambda = row.lambda;
      c.J = row.J;
      c.dist = row.family.rfind("power", 0) == 0
                   ? ValueDistribution::power(
                         std::stod(row.family.substr(6)))  // "power(a)"
                   : ValueDistribution::uniform();
      const auto rep =
          estimate_outcome(row.mechanism, c, verify_mc, seed + i,
                           ChannelMode::Stratified, 0);
      worst_z = std::max(worst_z, rep.max_abs_z);
      ++checked;
      if (rep.max_abs_z > 4.0) {
        row.error = "simulation disagreement max|z|=" + fmt(rep.max_abs_z);
      }
    }
    std::cerr << "verify-mc: " << checked << " rows at n=" << verify_mc
              << ", worst |z|=" << fmt(worst_z) << "\n";
  }
  write_output(out_path, format == "json" ? to_json(rows) : to_csv(rows));
  return kOk;
}

int cmd_simulate(const MarketFlags& mf, const std::string& mechanism,
                 long long n, std::uint64_t seed, int threads,
                 const std::string& out_path) {
  const MarketConfig c = mf.build();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (Mechanism m : select_mechanisms(mechanism)) {
    const auto rep =
        estimate_outcome(m, c, n, seed, ChannelMode::Stratified, threads);
    arr.push_back(nlohmann::ordered_json::parse(report_to_json(rep)));
  }
  write_output(out_path,
               (arr.size() == 1 ? arr[0].dump(2) : arr.dump(2)) + "\n");
  return kOk;
}

int cmd_verify(bool quick, const std::string& out_path,
               const std::string& format) {
  VerifyOptions opt;
  opt.quick = quick;
  const auto results = run_verification(opt);
  write_output(out_path, format == "json"
                             ? verification_report_json(results)
                             : verification_report_text(results));
  return all_passed(results) ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium and simulation engine for digital-advertising "
               "market mechanisms"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv", mechanism = "all";
  std::uint64_t seed = default_seed();
  long long n = 1000000, verify_mc = 0;
  int threads = 0;
  bool quick = false;

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one configuration");
  MarketFlags solve_mf;
  solve_mf.attach(solve);
  auto* solve_mech =
      solve->add_option("--mechanism", mechanism, "Mechanism name or 'all'");
  auto* solve_out = solve->add_option("--out", out_path, "Output path");
  auto* solve_fmt = solve->add_option("--format", format, "Output format")
                        ->check(CLI::IsMember({"csv", "json", "text"}));
  auto* solve_cfg = solve->add_option("--config", config_path,
                                      "JSON config file (flags win)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a comparative-statics grid");
  std::string sweep_dist = "uniform";
  double sweep_a = 0.75;
  int sweep_j = 0;
  auto* sweep_dist_opt =
      sweep->add_option("--dist", sweep_dist, "Single family to sweep")
          ->check(CLI::IsMember({"uniform", "power"}));
  auto* sweep_a_opt = sweep->add_option("--a", sweep_a, "Power exponent");
  auto* sweep_j_opt =
      sweep->add_option("--J", sweep_j, "Single firm count (overrides list)");
  auto* sweep_mech =
      sweep->add_option("--mechanism", mechanism, "Mechanism name or 'all'");
  auto* sweep_threads =
      sweep->add_option("--threads", threads, "Worker threads (0 = auto)");
  auto* sweep_seed =
      sweep->add_option("--seed", seed, "Seed for --verify-mc");
  sweep->add_option("--verify-mc", verify_mc,
                    "Cross-check each row against a simulation of this size");
  auto* sweep_out = sweep->add_option("--out", out_path, "Output path");
  auto* sweep_fmt = sweep->add_option("--format", format, "Output format")
                        ->check(CLI::IsMember({"csv", "json"}));
  auto* sweep_cfg = sweep->add_option("--config", config_path,
                                      "JSON sweep spec (flags win)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the market simulator");
  MarketFlags sim_mf;
  sim_mf.attach(sim);
  auto* sim_mech =
      sim->add_option("--mechanism", mechanism, "Mechanism name or 'all'");
  auto* sim_n = sim->add_option("--n", n, "Number of simulated consumers");
  auto* sim_seed = sim->add_option("--seed", seed, "Simulation seed");
  auto* sim_threads =
      sim->add_option("--threads", threads, "Worker threads (0 = auto)");
  auto* sim_out = sim->add_option("--out", out_path, "Output path");
  auto* sim_cfg =
      sim->add_option("--config", config_path, "JSON config file (flags win)");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the verification suite");
  verify->add_flag("--quick", quick, "Coarse grids, skip simulator checks");
  verify->add_option("--out", out_path, "Output path");
  auto* verify_fmt = verify->add_option("--format", format, "Output format")
                         ->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) {
      if (solve_cfg->count() > 0) {
        const auto j = load_config(config_path);
        solve_mf.merge(j);
        merge_key(j, "mechanism", solve_mech, mechanism);
        merge_key(j, "out", solve_out, out_path);
        merge_key(j, "format", solve_fmt, format);
      }
      return cmd_solve(solve_mf, mechanism, out_path, format);
    }
    if (*sweep) {
      SweepSpec spec;
      if (sweep_cfg->count() > 0) {
        const auto j = load_config(config_path);
        spec = sweep_spec_from_json(j.dump());
        merge_key(j, "out", sweep_out, out_path);
        merge_key(j, "format", sweep_fmt, format);
        merge_key(j, "seed", sweep_seed, seed);
      }
      if (sweep_dist_opt->count() > 0 || sweep_a_opt->count() > 0) {
        FamilySpec fam;
        fam.kind = sweep_dist;
        fam.a = sweep_a;
        spec.families = {fam};
      }
      if (sweep_j_opt->count() > 0) spec.J_list = {sweep_j};
      if (sweep_mech->count() > 0) {
        spec.mechanisms = select_mechanisms(mechanism);
      }
      if (sweep_threads->count() > 0) spec.threads = threads;
      return cmd_sweep(spec, seed, verify_mc, out_path, format);
    }
    if (*sim) {
      if (sim_cfg->count() > 0) {
        const auto j = load_config(config_path);
        sim_mf.merge(j);
        merge_key(j, "mechanism", sim_mech, mechanism);
        merge_key(j, "n", sim_n, n);
        merge_key(j, "seed", sim_seed, seed);
        merge_key(j, "threads", sim_threads, threads);
        merge_key(j, "out", sim_out, out_path);
      }
      return cmd_simulate(sim_mf, mechanism, n, seed, threads, out_path);
    }
    if (*verify) {
      if (verify_fmt->count() == 0) format = "text";
      return cmd_verify(quick, out_path, format);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
