// Welfare accounting: every object reduces by integration by parts to
// integrals of CDF powers, evaluated in closed form for the shipped
// families, so mechanism outcomes assemble from a handful of cheap terms.
#include "admarket/welfare.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace admarket {

namespace {

// E[min(highest of J values, cap)] = cap - integral of F^J below cap.
double expected_capped_max(double cap, const ValueDistribution& d, int J,
                           const QuadratureSettings& s) {
  return cap - top_order_cdf_integral(d, 0.0, cap, J, s);
}

}  // namespace

const std::vector<Mechanism>& all_mechanisms() {
  static const std::vector<Mechanism> order = {
      Mechanism::NoPlatform,       Mechanism::Bidding,
      Mechanism::BiddingWithFees,  Mechanism::BestValueManaged,
      Mechanism::IndependentManaged, Mechanism::CohortPrivacy,
  };
  return order;
}

std::string mechanism_label(Mechanism m) {
  switch (m) {
    case Mechanism::NoPlatform: return "no_platform";
    case Mechanism::Bidding: return "bidding";
    case Mechanism::BiddingWithFees: return "bidding_fees";
    case Mechanism::BestValueManaged: return "best_value";
    case Mechanism::IndependentManaged: return "independent";
    case Mechanism::CohortPrivacy: return "privacy";
  }
  throw std::logic_error("mechanism_label: unhandled mechanism");
}

Mechanism mechanism_from_label(const std::string& label) {
  for (Mechanism m : all_mechanisms()) {
    if (mechanism_label(m) == label) return m;
  }
  throw std::invalid_argument(
      "unknown mechanism '" + label +
      "'; expected one of no_platform, bidding, bidding_fees, best_value, "
      "independent, privacy");
}

double cs_off(double p, const ValueDistribution& d,
              const QuadratureSettings& s) {
  return (1.0 - p) - top_order_cdf_integral(d, p, 1.0, 1, s);
}

double cs_on(double p, const ValueDistribution& d, int J,
             const QuadratureSettings& s) {
  return (1.0 - p) - top_order_cdf_integral(d, p, 1.0, J, s);
}

double profit_off(double p, const ValueDistribution& d) {
  return p * (1.0 - d.cdf(p));
}

double profit_on(double p, const ValueDistribution& d, int J,
                 const QuadratureSettings& s) {
  return J * omega(p, p, d, J, s);
}

double platform_revenue_bidding(double p, const MarketConfig& c) {
  double paid = expected_capped_max(std::min(p, 1.0), c.dist, c.J, c.quad);
  return c.lambda * (paid - profit_on(p, c.dist, c.J, c.quad));
}

double welfare_off(double p, const ValueDistribution& d,
                   const QuadratureSettings& s) {
  return 1.0 - p * d.cdf(p) - top_order_cdf_integral(d, p, 1.0, 1, s);
}

double welfare_on(const ValueDistribution& d, int J,
                  const QuadratureSettings& s) {
  return 1.0 - top_order_cdf_integral(d, 0.0, 1.0, J, s);
}

double producer_surplus(double p, double cap, const MarketConfig& c) {
  return (1.0 - c.lambda) * profit_off(p, c.dist) +
         c.lambda * expected_capped_max(cap, c.dist, c.J, c.quad);
}

SolvedMarket solve_market(const MarketConfig& c, bool with_cap) {
  c.validate();
  SolvedMarket sm;
  sm.prices = solve_all_prices(c);
  sm.outside = outside_option(c);
  if (with_cap) {
    sm.cap = solve_price_cap(c);
    sm.has_cap = true;
  }
  return sm;
}

EquilibriumOutcome mechanism_outcome(Mechanism m, const MarketConfig& c) {
  return mechanism_outcome(m, c,
                           solve_market(c, m == Mechanism::IndependentManaged));
}

EquilibriumOutcome mechanism_outcome(Mechanism m, const MarketConfig& c,
                                     const SolvedMarket& solved) {
  c.validate();
  const ValueDistribution& d = c.dist;
  const QuadratureSettings& q = c.quad;
  const int J = c.J;
  const double lam = c.lambda;

  EquilibriumOutcome o;
  o.mechanism = m;
  switch (m) {
    case Mechanism::NoPlatform: {
      // Without the platform everyone is loyal to their one firm; the
      // shopper columns repeat the loyal ones so the lambda split reports
      // cleanly.
      double p = solved.prices.monopoly;
      o.posted_price = p;
      o.on_platform_cap = p;
      o.cs_off = cs_off(p, d, q);
      o.cs_on = o.cs_off;
      o.profit_per_firm = profit_off(p, d) / J;
      o.producer_surplus = profit_off(p, d);
      o.welfare_total = welfare_off(p, d, q);
      break;
    }
    case Mechanism::Bidding:
    case Mechanism::BiddingWithFees: {
      double p = solved.prices.bidding;
      o.posted_price = p;
      o.on_platform_cap = p;
      o.cs_off = cs_off(p, d, q);
      o.cs_on = cs_on(p, d, J, q);
      double gross =
          (1.0 - lam) / J * profit_off(p, d) + lam * omega(p, p, d, J, q);
      double payments = platform_revenue_bidding(p, c);
      if (m == Mechanism::Bidding) {
        o.profit_per_firm = gross;
        o.platform_revenue = payments;
      } else {
        o.profit_per_firm = solved.outside.profit;
        o.transfer_per_firm = gross - solved.outside.profit;
        o.platform_revenue = payments + J * o.transfer_per_firm;
      }
      o.producer_surplus = J * gross + payments;
      o.welfare_total =
          (1.0 - lam) * welfare_off(p, d, q) + lam * welfare_on(d, J, q);
      break;
    }
    case Mechanism::BestValueManaged: {
      double p = solved.prices.best_value;
      o.posted_price = p;
      o.on_platform_cap = p;
      o.cs_off = cs_off(p, d, q);
      // At symmetric posted prices the sponsored price simplifies to
      // min(v, p), so the shopper keeps (v - p)+.
      o.cs_on = cs_on(p, d, J, q);
      o.producer_surplus = producer_surplus(p, p, c);
      o.profit_per_firm = solved.outside.profit;
      o.transfer_per_firm =
          o.producer_surplus / J - solved.outside.profit;
      o.platform_revenue = o.producer_surplus - J * solved.outside.profit;
      o.welfare_total =
          (1.0 - lam) * welfare_off(p, d, q) + lam * welfare_on(d, J, q);
      break;
    }
    case Mechanism::IndependentManaged: {
      if (!solved.has_cap) {
        throw std::logic_error(
            "mechanism_outcome: independent campaign needs the price cap; "
            "call solve_market with with_cap = true");
      }
      double posted = solved.prices.independent;
      double cap = solved.cap.price;
      o.posted_price = posted;
      o.on_platform_cap = cap;
      o.cs_off = cs_off(posted, d, q);
      o.cs_on = cs_on(cap, d, J, q);
      o.producer_surplus = producer_surplus(posted, cap, c);
      o.profit_per_firm = solved.outside.profit;
      o.transfer_per_firm =
          o.producer_surplus / J - solved.outside.profit;
      o.platform_revenue = o.producer_surplus - J * solved.outside.profit;
      o.welfare_total =
          (1.0 - lam) * welfare_off(posted, d, q) + lam * welfare_on(d, J, q);
      break;
    }
    case Mechanism::CohortPrivacy: {
      double p = solved.prices.privacy;
      o.posted_price = p;
      o.on_platform_cap = p;
      o.cs_off = cs_off(p, d, q);
      o.cs_on = cs_on(p, d, J, q);
      // The cohort offer is the posted price itself, so shoppers below it
      // walk away and the on-platform trade truncates at p.
      o.producer_surplus = (1.0 - lam) * profit_off(p, d) +
                           lam * p * (1.0 - d.top_order_cdf(p, J));
      o.profit_per_firm = solved.outside.profit;
      o.transfer_per_firm =
          o.producer_surplus / J - solved.outside.profit;
      o.platform_revenue = o.producer_surplus - J * solved.outside.profit;
      double welfare_on_truncated = 1.0 - p * d.top_order_cdf(p, J) -
                                    top_order_cdf_integral(d, p, 1.0, J, q);
      o.welfare_total = (1.0 - lam) * welfare_off(p, d, q) +
                        lam * welfare_on_truncated;
      break;
    }
  }
  o.cs_total = (1.0 - lam) * o.cs_off + lam * o.cs_on;
  return o;
}

std::string outcome_to_json(const EquilibriumOutcome& o) {
  nlohmann::ordered_json j;
  j["mechanism"] = mechanism_label(o.mechanism);
  j["posted_price"] = o.posted_price;
  j["cap"] = o.on_platform_cap;
  j["cs_on"] = o.cs_on;
  j["cs_off"] = o.cs_off;
  j["cs_total"] = o.cs_total;
  j["profit_per_firm"] = o.profit_per_firm;
  j["transfer_per_firm"] = o.transfer_per_firm;
  j["platform_revenue"] = o.platform_revenue;
  j["producer_surplus"] = o.producer_surplus;
  j["welfare_total"] = o.welfare_total;
  return j.dump(2);
}

}  // namespace admarket
