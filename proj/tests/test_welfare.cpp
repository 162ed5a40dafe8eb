// Welfare accounting tests: channel-level surplus, profit, and revenue
// operators against closed forms, the full per-mechanism outcome table for
// the uniform benchmark, and the accounting identities that tie them.
#include <cmath>
#include <stdexcept>
#include <string>

#include "admarket/welfare.hpp"
#include "doctest.h"

using namespace admarket;

namespace {

MarketConfig uniform_cfg(double lambda, int J) {
  MarketConfig c;
  c.lambda = lambda;
  c.J = J;
  return c;
}

// field-by-field comparison with a common tolerance
void check_outcome(const EquilibriumOutcome& got,
                   const EquilibriumOutcome& want, double tol = 1e-9) {
  CAPTURE(mechanism_label(want.mechanism));
  CHECK(got.posted_price == doctest::Approx(want.posted_price).epsilon(tol));
  CHECK(got.on_platform_cap ==
        doctest::Approx(want.on_platform_cap).epsilon(tol));
  CHECK(got.cs_on == doctest::Approx(want.cs_on).epsilon(tol));
  CHECK(got.cs_off == doctest::Approx(want.cs_off).epsilon(tol));
  CHECK(got.profit_per_firm ==
        doctest::Approx(want.profit_per_firm).epsilon(tol));
  CHECK(got.transfer_per_firm ==
        doctest::Approx(want.transfer_per_firm).epsilon(tol));
  CHECK(got.platform_revenue ==
        doctest::Approx(want.platform_revenue).epsilon(tol));
  CHECK(got.producer_surplus ==
        doctest::Approx(want.producer_surplus).epsilon(tol));
  CHECK(got.welfare_total == doctest::Approx(want.welfare_total).epsilon(tol));
}

}  // namespace

TEST_CASE("mechanism labels round-trip and reject junk") {
  for (Mechanism m : all_mechanisms()) {
    CHECK(mechanism_from_label(mechanism_label(m)) == m);
  }
  CHECK(mechanism_label(Mechanism::BestValueManaged) == "best_value");
  CHECK(mechanism_label(Mechanism::NoPlatform) == "no_platform");
  CHECK_THROWS_AS(mechanism_from_label("second_price"), std::invalid_argument);
}

TEST_CASE("loyal-consumer surplus") {
  auto u = ValueDistribution::uniform();
  CHECK(cs_off(0.5, u) == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(cs_off(1.0, u) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cs_off(0.0, u) == doctest::Approx(0.5).epsilon(1e-10));
  auto p75 = ValueDistribution::power(0.75);
  CHECK(cs_off(0.5, p75) ==
        doctest::Approx(0.09845815928610302).epsilon(1e-9));
}

TEST_CASE("shopper surplus dominates loyal surplus") {
  auto u = ValueDistribution::uniform();
  // uniform J=2 at p=0.5: E[max - 0.5 | max > 0.5] P(max > 0.5) = 5/24
  CHECK(cs_on(0.5, u, 2) == doctest::Approx(5.0 / 24).epsilon(1e-10));
  auto p75 = ValueDistribution::power(0.75);
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CHECK(cs_on(p, u, 2) >= cs_off(p, u) - 1e-12);
    CHECK(cs_on(p, p75, 3) >= cs_off(p, p75) - 1e-12);
  }
}

TEST_CASE("channel welfare") {
  auto u = ValueDistribution::uniform();
  // trade happens iff v > p, at no allocation loss beyond exclusion
  CHECK(welfare_off(0.5, u) == doctest::Approx(0.375).epsilon(1e-10));
  // shoppers always trade at the top value: E[max of J]
  CHECK(welfare_on(u, 2) == doctest::Approx(2.0 / 3).epsilon(1e-10));
  CHECK(welfare_on(ValueDistribution::power(0.75), 3) ==
        doctest::Approx(2.25 / 3.25).epsilon(1e-9));
}

TEST_CASE("aggregate on-platform profit") {
  auto u = ValueDistribution::uniform();
  CHECK(profit_on(0.5, u, 2) == doctest::Approx(7.0 / 24).epsilon(1e-10));
  // a cap at or above the support maximum never binds: E[max]
  CHECK(profit_on(1.0, u, 2) == doctest::Approx(1.0 / 3).epsilon(1e-10));
  CHECK(profit_on(1.7, u, 2) == doctest::Approx(1.0 / 3).epsilon(1e-10));
  CHECK(profit_off(0.5, u) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("auction revenue under data-augmented bidding") {
  auto c = uniform_cfg(0.5, 2);
  const double p_b = 2.0 - std::sqrt(2.0);
  CHECK(platform_revenue_bidding(p_b, c) ==
        doctest::Approx(0.10456949966157672).epsilon(1e-9));
  CHECK(platform_revenue_bidding(0.0, c) == doctest::Approx(0.0));
  // price above the support: shoppers pay their full best value
  CHECK(platform_revenue_bidding(1.0, c) ==
        doctest::Approx(1.0 / 6).epsilon(1e-9));
  CHECK(platform_revenue_bidding(1.3, c) ==
        doctest::Approx(1.0 / 6).epsilon(1e-9));
}

TEST_CASE("producer surplus mixes channels without NaN at corners") {
  auto c = uniform_cfg(0.5, 2);
  const double p_b = 2.0 - std::sqrt(2.0);
  CHECK(producer_surplus(p_b, p_b, c) ==
        doctest::Approx(0.3807118746).epsilon(1e-9));
  CHECK(std::isfinite(producer_surplus(0.0, 0.0, c)));
  CHECK(std::isfinite(producer_surplus(1.0, 1.0, c)));
}

// The complete outcome table for the uniform benchmark (lambda = 0.5,
// J = 2), frozen from hand derivations: monopoly 1/2, bidding 2 - sqrt(2),
// best-value sqrt(3) - 1, privacy (sqrt(7) - 1)/3, and the surplus splits
// that follow from them.
TEST_CASE("uniform benchmark outcome table") {
  auto c = uniform_cfg(0.5, 2);

  SUBCASE("no platform") {
    EquilibriumOutcome want;
    want.mechanism = Mechanism::NoPlatform;
    want.posted_price = 0.5;
    want.on_platform_cap = 0.5;
    want.cs_on = 0.125;
    want.cs_off = 0.125;
    want.profit_per_firm = 0.125;
    want.transfer_per_firm = 0.0;
    want.platform_revenue = 0.0;
    want.producer_surplus = 0.25;
    want.welfare_total = 0.375;
    check_outcome(mechanism_outcome(Mechanism::NoPlatform, c), want);
  }

  SUBCASE("bidding") {
    EquilibriumOutcome want;
    want.mechanism = Mechanism::Bidding;
    want.posted_price = 0.5857864376;
    want.on_platform_cap = 0.5857864376;
    want.cs_on = 0.1478836046;
    want.cs_off = 0.0857864376;
    want.profit_per_firm = 0.1380711875;
    want.transfer_per_firm = 0.0;
    want.platform_revenue = 0.1045694997;
    want.producer_surplus = 0.3807118746;
    want.welfare_total = 0.4975468957;
    check_outcome(mechanism_outcome(Mechanism::Bidding, c), want);
  }

  SUBCASE("bidding with fees strips firms to the outside option") {
    auto got = mechanism_outcome(Mechanism::BiddingWithFees, c);
    EquilibriumOutcome want;
    want.mechanism = Mechanism::BiddingWithFees;
    want.posted_price = 0.5857864376;
    want.on_platform_cap = 0.5857864376;
    want.cs_on = 0.1478836046;
    want.cs_off = 0.0857864376;
    want.profit_per_firm = 0.0962250449;
    want.transfer_per_firm = 0.0418461426;
    want.platform_revenue = 0.1882617849;
    want.producer_surplus = 0.3807118746;
    want.welfare_total = 0.4975468957;
    check_outcome(got, want);
    // consumer side identical to plain bidding; only the split moves
    auto plain = mechanism_outcome(Mechanism::Bidding, c);
    CHECK(got.cs_total == doctest::Approx(plain.cs_total).epsilon(1e-12));
  }

  SUBCASE("best-value managed") {
    EquilibriumOutcome want;
    want.mechanism = Mechanism::BestValueManaged;
    want.posted_price = 0.7320508076;
    want.on_platform_cap = 0.7320508076;
    want.cs_on = 0.0653841409;
    want.cs_off = 0.0358983849;
    want.profit_per_firm = 0.0962250449;
    want.transfer_per_firm = 0.1031336923;
    want.platform_revenue = 0.2062673845;
    want.producer_surplus = 0.3987174742;
    want.welfare_total = 0.4493587371;
    check_outcome(mechanism_outcome(Mechanism::BestValueManaged, c), want);
  }

  SUBCASE("independent managed") {
    EquilibriumOutcome want;
    want.mechanism = Mechanism::IndependentManaged;
    want.posted_price = 0.5857864376;
    want.on_platform_cap = 0.5857864376;
    want.cs_on = 0.1478836046;
    want.cs_off = 0.0857864376;
    want.profit_per_firm = 0.0962250449;
    want.transfer_per_firm = 0.0941308924;
    want.platform_revenue = 0.1882617849;
    want.producer_surplus = 0.3807118746;
    want.welfare_total = 0.4975468957;
    check_outcome(mechanism_outcome(Mechanism::IndependentManaged, c), want);
  }

  SUBCASE("cohort privacy") {
    EquilibriumOutcome want;
    want.mechanism = Mechanism::CohortPrivacy;
    want.posted_price = 0.5485837704;
    want.on_platform_cap = 0.5485837704;
    want.cs_on = 0.1731139224;
    want.cs_off = 0.1018883062;
    want.profit_per_firm = 0.0962250449;
    want.transfer_per_firm = 0.0615575325;
    want.platform_revenue = 0.1231150650;
    want.producer_surplus = 0.3155651547;
    want.welfare_total = 0.4530662690;
    check_outcome(mechanism_outcome(Mechanism::CohortPrivacy, c), want);
  }
}

TEST_CASE("accounting identities close across mechanisms and families") {
  for (double lambda : {0.2, 0.6}) {
    for (int J : {2, 3}) {
      for (auto dist :
           {ValueDistribution::uniform(), ValueDistribution::power(0.75)}) {
        MarketConfig c;
        c.lambda = lambda;
        c.J = J;
        c.dist = dist;
        SolvedMarket solved = solve_market(c);
        for (Mechanism m : all_mechanisms()) {
          auto o = mechanism_outcome(m, c, solved);
          CAPTURE(mechanism_label(m));
          CAPTURE(lambda);
          CAPTURE(J);
          CAPTURE(dist.label());
          // consumers + producers exhaust trade surplus
          CHECK(o.cs_total + o.producer_surplus ==
                doctest::Approx(o.welfare_total).epsilon(1e-10));
          // producer surplus splits into net firm profits and revenue
          CHECK(J * o.profit_per_firm + o.platform_revenue ==
                doctest::Approx(o.producer_surplus).epsilon(1e-10));
          // channel mix of consumer surplus
          CHECK(o.cs_total ==
                doctest::Approx((1 - lambda) * o.cs_off + lambda * o.cs_on)
                    .epsilon(1e-12));
          CHECK(o.transfer_per_firm >= -1e-12);
        }
      }
    }
  }
}

TEST_CASE("transfer mechanisms pin net profit to the rejection payoff") {
  auto c = uniform_cfg(0.5, 2);
  SolvedMarket solved = solve_market(c);
  for (Mechanism m : {Mechanism::BiddingWithFees, Mechanism::BestValueManaged,
                      Mechanism::IndependentManaged,
                      Mechanism::CohortPrivacy}) {
    auto o = mechanism_outcome(m, c, solved);
    CAPTURE(mechanism_label(m));
    CHECK(o.profit_per_firm ==
          doctest::Approx(solved.outside.profit).epsilon(1e-9));
  }
}

TEST_CASE("independent outcome needs a solved cap") {
  auto c = uniform_cfg(0.5, 2);
  SolvedMarket no_cap = solve_market(c, /*with_cap=*/false);
  CHECK_FALSE(no_cap.has_cap);
  CHECK_THROWS_AS(
      mechanism_outcome(Mechanism::IndependentManaged, c, no_cap),
      std::logic_error);
  // every other mechanism works from the cap-free solve
  for (Mechanism m : all_mechanisms()) {
    if (m == Mechanism::IndependentManaged) continue;
    CHECK_NOTHROW(mechanism_outcome(m, c, no_cap));
  }
}

TEST_CASE("outcome serializes with stable keys") {
  auto o = mechanism_outcome(Mechanism::Bidding, uniform_cfg(0.5, 2));
  std::string j = outcome_to_json(o);
  for (const char* key :
       {"\"mechanism\"", "\"posted_price\"", "\"cap\"", "\"cs_on\"",
        "\"cs_off\"", "\"cs_total\"", "\"profit_per_firm\"",
        "\"transfer_per_firm\"", "\"platform_revenue\"",
        "\"producer_surplus\"", "\"welfare_total\""}) {
    CAPTURE(key);
    CHECK(j.find(key) != std::string::npos);
  }
  CHECK(j.find("\"bidding\"") != std::string::npos);
}
