// First-order conditions for every pricing mechanism, the root solvers that
// produce the equilibrium posted prices, the firm's outside option, and the
// on-platform price cap that deters undercutting.
#pragma once

#include <functional>
#include <utility>

#include "admarket/dist.hpp"
#include "admarket/quad.hpp"

namespace admarket {

struct MarketConfig {
  double lambda = 0.5;  // platform share of consumers, in [0,1)
  int J = 2;            // number of firms, >= 2
  ValueDistribution dist = ValueDistribution::uniform();
  QuadratureSettings quad{};

  // Throws std::invalid_argument naming the violated constraint. lambda = 1
  // is excluded: the off-platform condition carries weight (1 - lambda) and
  // the pricing equations divide by it.
  void validate() const;
};

struct PriceSolution {
  double price = 0.0;
  double foc_residual = 0.0;  // for solve_price_cap: the profit gap at price
  int iterations = 0;
  std::pair<double, double> bracket{0.0, 1.0};
  enum class Flag {
    none,                  // interior root
    corner,                // no sign change; price pinned to a bracket end
    cap_equals_candidate,  // price cap short-circuit: candidate >= monopoly
    cap_at_monopoly,       // undercutting never profitable up to monopoly
  };
  Flag flag = Flag::none;
  int crossings = 0;  // sign changes seen by the price-cap grid scan
};

// The firm's first-order conditions as explicit functions of price. All are
// strictly decreasing in p for log-concave densities, so their roots are
// unique. The p f(p) products are evaluated as 0 at p = 0, where unbounded
// densities would otherwise produce 0 * inf.
double foc_monopoly(double p, const ValueDistribution& d);
double foc_bidding(double p, const MarketConfig& c);
double foc_best_value(double p, const MarketConfig& c);
double foc_candidate(double p, const MarketConfig& c);
double foc_privacy(double p, const MarketConfig& c);
// On-platform monopoly condition against the law of the maximum of J values;
// J = 1 is allowed here (it reduces to foc_monopoly) though MarketConfig
// requires J >= 2.
double foc_pdagger(double p, const ValueDistribution& d, int J);

// Bisection on a decreasing function with f(lo) >= 0 >= f(hi); stops at
// argument tolerance tol, exits early on an exact zero, and returns a corner
// flag instead of failing when there is no sign change.
PriceSolution bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, double tol = 1e-10, int max_iter = 200);

PriceSolution solve_monopoly_price(const MarketConfig& c);
PriceSolution solve_bidding_price(const MarketConfig& c);
PriceSolution solve_best_value_price(const MarketConfig& c);
PriceSolution solve_candidate_price(const MarketConfig& c);
// max(candidate, monopoly): the posted price of the independent campaign.
PriceSolution solve_independent_price(const MarketConfig& c);
PriceSolution solve_privacy_price(const MarketConfig& c);
PriceSolution solve_pdagger(const MarketConfig& c);

struct PriceSet {
  double monopoly = 0, bidding = 0, best_value = 0, candidate = 0,
         independent = 0, privacy = 0, pdagger = 0;
};
PriceSet solve_all_prices(const MarketConfig& c);

struct ProfitPoint {
  double profit = 0.0;
  double price = 0.0;  // argmax
};

// Coarse grid plus golden-section refinement to xtol in the argument; grid
// cells tying within 1e-12 of the best are each refined and the larger
// maximum wins (the objectives are continuous but not proven unimodal).
ProfitPoint maximize_on_grid(const std::function<double(double)>& f,
                             double lo, double hi, int grid = 256,
                             double xtol = 1e-8);

// Largest profit available to a firm that rejects the platform's mechanism,
// optimizing its posted price while rivals stay enrolled.
ProfitPoint outside_option(const MarketConfig& c);

// Largest profit from undercutting an on-platform cap p_hat with a posted
// price p <= p_hat, capturing shoppers whose best sponsored offer loses to
// the undercutter's posted offer.
ProfitPoint undercut_profit(double p_hat, const MarketConfig& c);

// Profit from holding the monopoly posted price while the platform caps
// sponsored prices at p_hat.
double loyal_profit_at_cap(double p_hat, const MarketConfig& c);

// Largest cap in [candidate, monopoly] at which staying loyal weakly beats
// undercutting: 1024-point scan for the sign structure (crossings recorded),
// then bisection on the largest crossing.
PriceSolution solve_price_cap(const MarketConfig& c);

}  // namespace admarket
