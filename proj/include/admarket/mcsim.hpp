// Consumer-level Monte Carlo: reconstructs equilibrium bids and each
// campaign's pricing policy draw by draw, and checks every analytic welfare
// quantity against its sample mean with standard errors.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "admarket/welfare.hpp"

namespace admarket {

struct ConsumerDraw {
  std::vector<double> values;  // one value per firm, iid from the family
  int loyal_to = -1;           // firm index, or -1 for an on-platform shopper
};

struct AuctionRecord {
  std::vector<double> bids;  // empty for managed campaigns
  int winner = 0;
  double payment = 0.0;  // second-highest bid; managed campaigns pay nothing
  double sponsored_price = 0.0;
  bool bought = false;
  // When the sponsored sale falls through the consumer keeps the best
  // posted offer, so consumer_surplus falls back to that utility.
  double consumer_surplus = 0.0;
  double firm_profit = 0.0;    // winner's take from this interaction
  double platform_take = 0.0;  // auction payment kept by the platform
};

// Equilibrium bids under data-augmented bidding: each firm concedes the
// consumer's best alternative offer and never bids above its posted price.
std::vector<double> bid_vector(const std::vector<double>& values,
                               const std::vector<double>& posted,
                               double reserve_floor = 0.0);

AuctionRecord run_bidding_auction(const ConsumerDraw& consumer,
                                  const std::vector<double>& posted);

// Managed-campaign policies: the platform steers the consumer to the
// highest-value firm and prices per the mechanism (best-value formula,
// value discrimination up to cap, or the lowest posted price).
AuctionRecord run_managed(const ConsumerDraw& consumer, Mechanism mech,
                          const std::vector<double>& posted, double cap);

enum class ChannelMode { Bernoulli, Stratified };

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  double analytic = 0.0;
  double z = 0.0;  // 0 whenever the standard error degenerates
};

struct SimulationReport {
  Mechanism mechanism = Mechanism::Bidding;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  ChannelMode mode = ChannelMode::Stratified;
  int threads = 1;
  std::int64_t n_on = 0;
  std::int64_t n_off = 0;
  std::map<std::string, Estimate> quantities;
  std::int64_t allocation_violations = 0;   // winner was not the top value
  std::int64_t showrooming_violations = 0;  // sponsored price above posted
  std::int64_t poaching_violations = 0;     // a posted offer beat the sale
  double max_abs_z = 0.0;
};

// Simulates n consumers against the mechanism's analytic outcome. Draws are
// keyed by (seed, consumer, firm) so the stream is order-independent, and
// accumulation is a fixed pairwise tree over blocks, so results are
// bit-identical across thread counts. threads <= 0 uses the hardware count.
SimulationReport estimate_outcome(Mechanism mech, const MarketConfig& c,
                                  std::int64_t n, std::uint64_t seed,
                                  ChannelMode mode = ChannelMode::Stratified,
                                  int threads = 0);

std::string report_to_json(const SimulationReport& r);

}  // namespace admarket
