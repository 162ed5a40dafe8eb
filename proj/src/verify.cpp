// Self-verification suite. Each check sweeps a grid, tracks its worst
// margin, and reports one pass/fail line; grids shrink under --quick.
#include "admarket/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "admarket/mcsim.hpp"
#include "admarket/quad.hpp"
#include "json.hpp"

namespace admarket {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string config_tag(const MarketConfig& c) {
  return c.dist.label() + " lambda=" + fmt(c.lambda) +
         " J=" + std::to_string(c.J);
}

// Tracks the worst (smallest) margin seen across a grid; the check passes
// if even the worst margin clears the floor.
struct WorstMargin {
  double margin = std::numeric_limits<double>::infinity();
  std::string where;

  void update(double m, const std::string& tag) {
    if (m < margin) {
      margin = m;
      where = tag;
    }
  }
  CheckResult result(const std::string& name, double floor) const {
    CheckResult r;
    r.name = name;
    r.pass = margin >= floor;
    r.detail = "worst margin " + fmt(margin) +
               (where.empty() ? "" : " at " + where);
    return r;
  }
};

struct Grids {
  std::vector<double> lambdas;
  std::vector<int> J_ordering;       // price-ordering grid
  std::vector<int> J_outcomes;       // full-outcome grid (cap solves)
  std::vector<int> J_collapse;       // uniform large-J collapse probes
  std::vector<ValueDistribution> families;
  bool with_mc = false;
};

Grids make_grids(const VerifyOptions& opt) {
  Grids g;
  if (opt.quick) {
    g.lambdas = {0.1, 0.5, 0.9};
    g.J_ordering = {2, 5};
    g.J_outcomes = {2};
    g.J_collapse = {4, 7, 10};
  } else {
    g.lambdas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    g.J_ordering = {2, 3, 5, 7};
    g.J_outcomes = {2, 3};
    g.J_collapse = {4, 5, 6, 7, 8, 9, 10};
    g.with_mc = true;
  }
  g.families = {ValueDistribution::uniform(), ValueDistribution::power(0.75)};
  return g;
}

MarketConfig make_config(double lambda, int J, const ValueDistribution& d) {
  MarketConfig c;
  c.lambda = lambda;
  c.J = J;
  c.dist = d;
  return c;
}

// Monotonicity helper: returns the worst signed step of `values` in the
// stated direction (>= 0 everywhere means monotone).
double worst_step(const std::vector<double>& values, bool increasing) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double step = increasing ? values[i] - values[i - 1]
                                   : values[i - 1] - values[i];
    worst = std::min(worst, step);
  }
  return worst;
}

// Smallest J at which the posted bidding price is guaranteed monotone in
// the firm count: J > -1 / ln F(1 - p_M).
int firm_count_monotonicity_floor(const MarketConfig& base) {
  MarketConfig c = base;
  c.J = 2;
  const double p_m = solve_monopoly_price(c).price;
  const double Fm = c.dist.cdf(1.0 - p_m);
  if (Fm <= 0.0 || Fm >= 1.0) return 2;
  const double bound = -1.0 / std::log(Fm);
  int J = 2;
  while (static_cast<double>(J) <= bound) ++J;
  return J;
}

}  // namespace

std::vector<CheckResult> check_price_ordering(const PriceSet& p,
                                              const MarketConfig& c,
                                              double slack) {
  const std::string tag = config_tag(c);
  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, double margin) {
    CheckResult r;
    r.name = name;
    r.pass = margin >= -slack;
    r.detail = "margin " + fmt(margin) + " at " + tag;
    out.push_back(std::move(r));
  };
  add("prices/monopoly_not_above_bidding", p.bidding - p.monopoly);
  add("prices/bidding_not_above_best_value", p.best_value - p.bidding);
  add("prices/independent_not_above_best_value",
      p.best_value - p.independent);
  add("prices/privacy_above_monopoly", p.privacy - p.monopoly);
  add("prices/privacy_below_best_value", p.best_value - p.privacy);
  {
    CheckResult r;
    r.name = "prices/independent_is_max_of_monopoly_and_candidate";
    r.pass = p.independent == std::max(p.monopoly, p.candidate);
    r.detail = "independent " + fmt(p.independent) + " vs max(" +
               fmt(p.monopoly) + ", " + fmt(p.candidate) + ") at " + tag;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
  const Grids g = make_grids(opt);
  std::vector<CheckResult> results;

  // --- distribution and quadrature sanity -------------------------------
  {
    WorstMargin wm;
    for (const auto& d : g.families) {
      for (int i = 1; i < 20; ++i) {
        const double v = i / 20.0;
        wm.update(1e-9 - std::abs(d.quantile(d.cdf(v)) - v), d.label());
      }
    }
    results.push_back(wm.result("dist/quantile_inverts_cdf", 0.0));
  }
  {
    WorstMargin wm;
    for (const auto& d : g.families) {
      for (int J : {2, 3}) {
        for (double p : {0.1, 0.45, 0.8}) {
          for (double pp : {0.25, 0.6, 1.0}) {
            const double gap = std::abs(omega_casework(p, pp, d, J) -
                                        omega(p, pp, d, J));
            wm.update(1e-7 - gap,
                      d.label() + " p=" + fmt(p) + " p'=" + fmt(pp));
          }
        }
      }
    }
    results.push_back(wm.result("quad/omega_pipelines_agree", 0.0));
  }
  {
    WorstMargin wm;
    const double h = 1e-5;
    for (const auto& d : g.families) {
      for (double p : {0.15, 0.4, 0.65, 0.9}) {
        const int J = 2;
        const double fd = (omega(p + h, p, d, J) - omega(p - h, p, d, J)) /
                          (2.0 * h);
        wm.update(1e-4 - std::abs(fd - omega_deriv(p, d, J)),
                  d.label() + " p=" + fmt(p));
      }
    }
    results.push_back(
        wm.result("quad/omega_derivative_matches_finite_difference", 0.0));
  }

  // --- first-order conditions strictly decreasing -----------------------
  {
    WorstMargin wm;
    for (const auto& d : g.families) {
      for (int J : {2, 3}) {
        MarketConfig c = make_config(0.5, J, d);
        struct Named {
          const char* name;
          std::function<double(double)> f;
        };
        const std::vector<Named> focs = {
            {"monopoly", [&](double p) { return foc_monopoly(p, c.dist); }},
            {"bidding", [&](double p) { return foc_bidding(p, c); }},
            {"best_value", [&](double p) { return foc_best_value(p, c); }},
            {"candidate", [&](double p) { return foc_candidate(p, c); }},
            {"privacy", [&](double p) { return foc_privacy(p, c); }},
            {"top_order",
             [&](double p) { return foc_pdagger(p, c.dist, c.J); }},
        };
        const int n = opt.quick ? 21 : 51;
        for (const auto& foc : focs) {
          // The candidate condition can turn upward past its root while
          // staying negative (uniform, J=3 does); root uniqueness needs
          // monotonicity only until the sign settles, then a fixed sign.
          const bool until_root = std::string(foc.name) == "candidate";
          double prev = foc.f(0.0);
          for (int i = 1; i <= n; ++i) {
            const double p = static_cast<double>(i) / n;
            const double cur = foc.f(p);
            const std::string tag = d.label() + " " + foc.name +
                                    " J=" + std::to_string(J) +
                                    " p=" + fmt(p);
            if (until_root && prev < 0.0) {
              wm.update(-cur, tag);  // stays negative beyond the root
            } else {
              wm.update(prev - cur, tag);
            }
            prev = cur;
          }
        }
      }
    }
    results.push_back(wm.result("prices/foc_strictly_decreasing", 1e-12));
  }

  // --- price orderings over the grid -------------------------------------
  {
    std::map<std::string, WorstMargin> ordering;
    WorstMargin collapse, convexity;
    std::map<std::pair<std::string, int>, std::vector<double>> bidding_by_j;
    for (const auto& d : g.families) {
      for (int J : g.J_ordering) {
        std::vector<double> bidding_path;
        for (double lam : g.lambdas) {
          MarketConfig c = make_config(lam, J, d);
          const PriceSet ps = solve_all_prices(c);
          const std::string tag = config_tag(c);
          ordering["prices/monopoly_not_above_bidding"].update(
              ps.bidding - ps.monopoly, tag);
          ordering["prices/bidding_not_above_best_value"].update(
              ps.best_value - ps.bidding, tag);
          ordering["prices/independent_not_above_best_value"].update(
              ps.best_value - ps.independent, tag);
          ordering["prices/privacy_above_monopoly"].update(
              ps.privacy - ps.monopoly, tag);
          ordering["prices/privacy_below_best_value"].update(
              ps.best_value - ps.privacy, tag);
          ordering["prices/independent_is_max_of_monopoly_and_candidate"]
              .update(ps.independent == std::max(ps.monopoly, ps.candidate)
                          ? 0.0
                          : -1.0,
                      tag);
          bidding_path.push_back(ps.bidding);
          if (d.label() == "uniform" && J >= 4) {
            collapse.update(ps.independent == ps.monopoly ? 0.0 : -1.0,
                            config_tag(c));
          }
          if (d.label() == "power(0.75)") {
            // F^{J-1} convex (J=3) puts the candidate below the bidding
            // price; concave (J=2) reverses it.
            if (J == 3) convexity.update(ps.bidding - ps.independent,
                                         config_tag(c));
            if (J == 2) convexity.update(ps.independent - ps.bidding,
                                         config_tag(c));
          }
          if (d.label() == "uniform" && J == 2) {
            convexity.update(1e-9 - std::abs(ps.bidding - ps.candidate),
                             config_tag(c));
          }
        }
        bidding_by_j[{d.label(), J}] = bidding_path;
      }
    }
    for (auto& [name, wm] : ordering) {
      results.push_back(wm.result(name, name.find("max_of") != std::string::npos
                                            ? 0.0
                                            : -opt.slack));
    }
    // Uniform large-J collapse to the monopoly price.
    for (int J : g.J_collapse) {
      for (double lam : {0.3, 0.5, 0.7}) {
        MarketConfig c = make_config(lam, J, ValueDistribution::uniform());
        const PriceSet ps = solve_all_prices(c);
        collapse.update(ps.independent == ps.monopoly ? 0.0 : -1.0,
                        config_tag(c));
      }
    }
    results.push_back(collapse.result(
        "prices/independent_collapses_to_monopoly_uniform_many_firms", 0.0));
    results.push_back(convexity.result(
        "prices/candidate_vs_bidding_follows_top_order_convexity",
        -opt.slack));

    // Posted bidding price nondecreasing in lambda, per (family, J).
    WorstMargin lam_mono;
    for (auto& [key, path] : bidding_by_j) {
      lam_mono.update(worst_step(path, true),
                      key.first + " J=" + std::to_string(key.second));
    }
    results.push_back(lam_mono.result(
        "prices/bidding_price_nondecreasing_in_lambda", -1e-12));
  }

  // --- bidding price monotone in the firm count above the threshold ------
  {
    WorstMargin wm;
    for (const auto& d : g.families) {
      MarketConfig base = make_config(0.5, 2, d);
      const int j0 = std::max(2, firm_count_monotonicity_floor(base));
      std::vector<double> path;
      for (int J = j0; J <= (opt.quick ? j0 + 2 : j0 + 4); ++J) {
        MarketConfig c = make_config(0.5, J, d);
        path.push_back(solve_bidding_price(c).price);
      }
      wm.update(worst_step(path, false),
                d.label() + " from J=" + std::to_string(j0));
    }
    results.push_back(wm.result(
        "prices/bidding_price_nonincreasing_in_firm_count", -1e-12));
  }

  // --- welfare monotonicities along lambda at the bidding price ----------
  {
    WorstMargin wm;
    for (const auto& d : g.families) {
      const int J = 3;
      std::vector<double> v_cs_off, v_cs_on, v_prof_off, v_prof_on, v_rev,
          v_w_off;
      for (double lam : g.lambdas) {
        MarketConfig c = make_config(lam, J, d);
        const double pb = solve_bidding_price(c).price;
        v_cs_off.push_back(cs_off(pb, d));
        v_cs_on.push_back(cs_on(pb, d, J));
        v_prof_off.push_back(profit_off(pb, d));
        v_prof_on.push_back(profit_on(pb, d, J));
        v_rev.push_back(platform_revenue_bidding(pb, c));
        v_w_off.push_back(welfare_off(pb, d));
      }
      const std::string tag = d.label() + " J=3";
      wm.update(worst_step(v_cs_off, false), tag + " cs_off");
      wm.update(worst_step(v_cs_on, false), tag + " cs_on");
      wm.update(worst_step(v_prof_off, false), tag + " profit_off");
      wm.update(worst_step(v_prof_on, true), tag + " profit_on");
      wm.update(worst_step(v_rev, true), tag + " platform_revenue");
      wm.update(worst_step(v_w_off, false), tag + " welfare_off");
    }
    results.push_back(wm.result(
        "welfare/bidding_lambda_monotonicities", -1e-12));
  }

  // --- welfare monotone in the firm count above the threshold ------------
  {
    WorstMargin wm;
    for (const auto& d : g.families) {
      MarketConfig base = make_config(0.5, 2, d);
      const int j0 = std::max(2, firm_count_monotonicity_floor(base));
      std::vector<double> v_cs_off, v_cs_on, v_w;
      for (int J = j0; J <= (opt.quick ? j0 + 2 : j0 + 4); ++J) {
        MarketConfig c = make_config(0.5, J, d);
        const EquilibriumOutcome o =
            mechanism_outcome(Mechanism::Bidding, c, solve_market(c, false));
        v_cs_off.push_back(o.cs_off);
        v_cs_on.push_back(o.cs_on);
        v_w.push_back(o.welfare_total);
      }
      const std::string tag = d.label() + " from J=" + std::to_string(j0);
      wm.update(worst_step(v_cs_off, true), tag + " cs_off");
      wm.update(worst_step(v_cs_on, true), tag + " cs_on");
      wm.update(worst_step(v_w, true), tag + " welfare_total");
    }
    results.push_back(
        wm.result("welfare/firm_count_monotonicities", -1e-12));
  }

  // --- full-outcome grid: accounting and cross-mechanism comparisons -----
  {
    WorstMargin closure, weighting, transfers, outside, bv_vs_bidding,
        ind_vs_bv, rev_best, rev_sign;
    for (const auto& d : g.families) {
      for (int J : g.J_outcomes) {
        for (double lam : g.lambdas) {
          MarketConfig c = make_config(lam, J, d);
          const SolvedMarket solved = solve_market(c, true);
          std::map<Mechanism, EquilibriumOutcome> out;
          for (Mechanism m : all_mechanisms()) {
            out[m] = mechanism_outcome(m, c, solved);
          }
          const std::string tag = config_tag(c);
          for (const auto& [m, o] : out) {
            const std::string mtag = tag + " " + mechanism_label(m);
            closure.update(
                1e-6 - std::abs(o.cs_total + o.producer_surplus -
                                o.welfare_total),
                mtag);
            closure.update(
                1e-6 - std::abs(o.producer_surplus -
                                (o.profit_per_firm * J + o.platform_revenue)),
                mtag);
            weighting.update(
                1e-12 - std::abs(o.cs_total - ((1.0 - lam) * o.cs_off +
                                               lam * o.cs_on)),
                mtag);
            transfers.update(o.transfer_per_firm, mtag);
            if (m != Mechanism::NoPlatform && m != Mechanism::Bidding) {
              outside.update(
                  1e-6 - std::abs(o.profit_per_firm - solved.outside.profit),
                  mtag);
            }
          }
          const auto& bid = out[Mechanism::Bidding];
          const auto& fees = out[Mechanism::BiddingWithFees];
          const auto& bv = out[Mechanism::BestValueManaged];
          const auto& ind = out[Mechanism::IndependentManaged];
          bv_vs_bidding.update(bid.cs_total - bv.cs_total, tag + " cs");
          bv_vs_bidding.update(bid.welfare_total - bv.welfare_total,
                               tag + " welfare");
          ind_vs_bv.update(ind.cs_total - bv.cs_total, tag + " cs");
          ind_vs_bv.update(ind.welfare_total - bv.welfare_total,
                           tag + " welfare");
          rev_best.update(bv.platform_revenue - fees.platform_revenue,
                          tag + " vs fees");
          rev_best.update(bv.platform_revenue - ind.platform_revenue,
                          tag + " vs independent");
          const double price_gap =
              solved.prices.bidding - solved.prices.independent;
          const double rev_gap =
              fees.platform_revenue - ind.platform_revenue;
          if (std::abs(price_gap) <= 1e-9) {
            rev_sign.update(1e-6 - std::abs(rev_gap), tag);
          } else {
            rev_sign.update(price_gap > 0 ? rev_gap : -rev_gap, tag);
          }
        }
      }
    }
    results.push_back(closure.result("welfare/accounting_closure", 0.0));
    results.push_back(
        weighting.result("welfare/consumer_weighting_identity", 0.0));
    results.push_back(
        transfers.result("welfare/transfers_nonnegative", -1e-9));
    results.push_back(outside.result(
        "welfare/transfer_mechanisms_hold_firms_to_outside_option", 0.0));
    results.push_back(bv_vs_bidding.result(
        "welfare/best_value_not_above_bidding", -opt.slack));
    results.push_back(ind_vs_bv.result(
        "welfare/independent_at_least_best_value", -opt.slack));
    results.push_back(
        rev_best.result("revenue/best_value_weakly_highest", -opt.slack));
    results.push_back(rev_sign.result(
        "revenue/fees_vs_independent_matches_price_gap", -1e-7));
  }

  // --- simulator agreement (full mode only) ------------------------------
  if (g.with_mc) {
    WorstMargin agree, identity;
    MarketConfig c = make_config(0.5, 2, ValueDistribution::uniform());
    for (Mechanism m : {Mechanism::Bidding, Mechanism::BestValueManaged}) {
      const auto rep =
          estimate_outcome(m, c, 200000, 90210, ChannelMode::Stratified, 0);
      agree.update(4.0 - rep.max_abs_z, mechanism_label(m));
    }
    results.push_back(
        agree.result("mcsim/estimates_match_quadrature", 0.0));
    const auto r1 = estimate_outcome(Mechanism::Bidding, c, 60000, 11,
                                     ChannelMode::Stratified, 1);
    const auto r3 = estimate_outcome(Mechanism::Bidding, c, 60000, 11,
                                     ChannelMode::Stratified, 3);
    bool same = true;
    for (const auto& [name, est] : r1.quantities) {
      same = same && est.value == r3.quantities.at(name).value;
    }
    identity.update(same ? 0.0 : -1.0, "bidding n=60000");
    results.push_back(
        identity.result("mcsim/thread_count_invariance", 0.0));
  }

  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

std::string verification_report_text(const std::vector<CheckResult>& results) {
  std::string out;
  for (const auto& r : results) {
    out += r.pass ? "PASS " : "FAIL ";
    out += r.name;
    if (!r.detail.empty()) {
      out += ": ";
      out += r.detail;
    }
    out += '\n';
  }
  return out;
}

std::string verification_report_json(const std::vector<CheckResult>& results) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["pass"] = r.pass;
    j["detail"] = r.detail;
    arr.push_back(std::move(j));
  }
  nlohmann::ordered_json top;
  top["checks"] = std::move(arr);
  top["all_passed"] = all_passed(results);
  return top.dump(2) + "\n";
}

}  // namespace admarket
