// Surplus, profit, revenue, and welfare per consumer channel, and the
// assembly of the complete market outcome under each platform mechanism.
#pragma once

#include <string>
#include <vector>

#include "admarket/equilibria.hpp"

namespace admarket {

enum class Mechanism {
  NoPlatform,
  Bidding,
  BiddingWithFees,
  BestValueManaged,
  IndependentManaged,
  CohortPrivacy,
};

const std::vector<Mechanism>& all_mechanisms();
// Stable lowercase labels used by the CLI, CSV, and JSON surfaces.
std::string mechanism_label(Mechanism m);
Mechanism mechanism_from_label(const std::string& label);

// Expected surplus of a loyal consumer facing posted price p.
double cs_off(double p, const ValueDistribution& d,
              const QuadratureSettings& s = {});
// Expected surplus of a shopper who pays p when the best of J values
// clears it; at least cs_off for every p.
double cs_on(double p, const ValueDistribution& d, int J,
             const QuadratureSettings& s = {});
// Off-platform profit per unit of loyal mass: p (1 - F(p)).
double profit_off(double p, const ValueDistribution& d);
// Aggregate on-platform profit across the J firms at a common posted price.
double profit_on(double p, const ValueDistribution& d, int J,
                 const QuadratureSettings& s = {});
// Auction payments collected by the platform under data-augmented bidding:
// what shoppers pay, lambda E[min(top value, p)], net of what firms keep.
double platform_revenue_bidding(double p, const MarketConfig& c);
// Trade surplus per consumer in each channel. The on-platform allocation is
// efficient and always trades, so welfare_on does not depend on prices.
double welfare_off(double p, const ValueDistribution& d,
                   const QuadratureSettings& s = {});
double welfare_on(const ValueDistribution& d, int J,
                  const QuadratureSettings& s = {});
// Firm profits plus platform revenue when loyal consumers pay p and
// shoppers pay min(top value, cap); cap may sit below p.
double producer_surplus(double p, double cap, const MarketConfig& c);

struct EquilibriumOutcome {
  Mechanism mechanism = Mechanism::NoPlatform;
  double posted_price = 0.0;
  double on_platform_cap = 0.0;  // highest price ever charged on-platform
  double cs_on = 0.0;
  double cs_off = 0.0;
  double cs_total = 0.0;         // (1-lambda) cs_off + lambda cs_on
  double profit_per_firm = 0.0;  // net of any transfer
  double transfer_per_firm = 0.0;
  double platform_revenue = 0.0;  // auction payments plus transfers
  double producer_surplus = 0.0;
  double welfare_total = 0.0;
};

std::string outcome_to_json(const EquilibriumOutcome& o);

// Everything the outcome assembly needs from the solvers, computed once so
// a sweep can share it across the mechanisms of one configuration.
struct SolvedMarket {
  PriceSet prices;
  ProfitPoint outside;  // rejection profit every transfer is held against
  PriceSolution cap;    // independent-campaign cap; meaningful iff has_cap
  bool has_cap = false;
};
SolvedMarket solve_market(const MarketConfig& c, bool with_cap = true);

EquilibriumOutcome mechanism_outcome(Mechanism m, const MarketConfig& c);
// Requires solved.has_cap when m is IndependentManaged.
EquilibriumOutcome mechanism_outcome(Mechanism m, const MarketConfig& c,
                                     const SolvedMarket& solved);

}  // namespace admarket
