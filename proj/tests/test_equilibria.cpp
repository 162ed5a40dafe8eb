// Equilibrium solver tests: first-order conditions, bisection behavior,
// every posted-price solver against independently derived roots, outside
// option, undercut profits, and the on-platform price cap.
#include <cmath>
#include <stdexcept>

#include "admarket/equilibria.hpp"
#include "doctest.h"

using namespace admarket;

namespace {

MarketConfig uniform_cfg(double lambda, int J) {
  MarketConfig c;
  c.lambda = lambda;
  c.J = J;
  return c;
}

MarketConfig power_cfg(double lambda, int J, double a = 0.75) {
  MarketConfig c;
  c.lambda = lambda;
  c.J = J;
  c.dist = ValueDistribution::power(a);
  return c;
}

}  // namespace

TEST_CASE("config validation names the violated constraint") {
  MarketConfig c;
  c.lambda = 1.0;
  CHECK_THROWS_WITH_AS(c.validate(),
                       "MarketConfig: lambda must lie in [0, 1)",
                       std::invalid_argument);
  c.lambda = -0.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.lambda = 0.5;
  c.J = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("bisection finds roots and flags corners") {
  auto sol = bisect_root([](double x) { return 0.25 - x; }, 0.0, 1.0);
  CHECK(sol.price == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(sol.flag == PriceSolution::Flag::none);
  CHECK(sol.iterations <= 200);

  // no sign change: corner at the endpoint with the smaller residual
  auto corner = bisect_root([](double x) { return -1.0 - x; }, 0.0, 1.0);
  CHECK(corner.flag == PriceSolution::Flag::corner);
  CHECK(corner.price == 0.0);

  // an exact zero at the midpoint is returned bitwise
  auto exact = bisect_root([](double x) { return 0.5 - x; }, 0.0, 1.0);
  CHECK(exact.price == 0.5);
  CHECK(exact.foc_residual == 0.0);
}

TEST_CASE("monopoly price: uniform hits one half exactly") {
  auto sol = solve_monopoly_price(uniform_cfg(0.5, 2));
  CHECK(sol.price == 0.5);  // 1 - F - pf vanishes exactly at the midpoint
  CHECK(std::abs(sol.foc_residual) < 1e-12);
}

TEST_CASE("monopoly price: power family") {
  auto sol = solve_monopoly_price(power_cfg(0.5, 2));
  // root of 1 - v^a - a v^a, i.e. v = (1+a)^{-1/a}, a = 0.75
  const double want = std::pow(1.75, -1.0 / 0.75);
  CHECK(sol.price == doctest::Approx(want).epsilon(1e-10));
  CHECK(sol.price == doctest::Approx(0.4741865904951387).epsilon(1e-10));
}

TEST_CASE("bidding price solves the platform-share-weighted condition") {
  // lambda = 0 collapses to the monopoly price without touching quadrature
  CHECK(solve_bidding_price(uniform_cfg(0.0, 2)).price == 0.5);

  // uniform, lambda = 0.5: J=2 root of p^2 - 4p + 2 = 0, J=3 independently
  // solved root of its cubic
  CHECK(solve_bidding_price(uniform_cfg(0.5, 2)).price ==
        doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
  CHECK(solve_bidding_price(uniform_cfg(0.5, 3)).price ==
        doctest::Approx(0.5466023484835895).epsilon(1e-8));

  // near the upper end of the platform share: 10/11 for uniform J=2
  CHECK(solve_bidding_price(uniform_cfg(0.99, 2)).price ==
        doctest::Approx(10.0 / 11).epsilon(1e-6));

  CHECK(solve_bidding_price(power_cfg(0.5, 2)).price ==
        doctest::Approx(0.5942459173690073).epsilon(1e-8));
  CHECK(solve_bidding_price(power_cfg(0.5, 3)).price ==
        doctest::Approx(0.5540894544169116).epsilon(1e-8));
}

TEST_CASE("best-value price") {
  CHECK(solve_best_value_price(uniform_cfg(0.5, 2)).price ==
        doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-9));
  CHECK(solve_best_value_price(power_cfg(0.5, 2)).price ==
        doctest::Approx(0.7278591217856918).epsilon(1e-8));
  CHECK(solve_best_value_price(power_cfg(0.5, 3)).price ==
        doctest::Approx(0.7720205679032343).epsilon(1e-8));
}

TEST_CASE("privacy price and the top-order condition") {
  CHECK(solve_privacy_price(uniform_cfg(0.5, 2)).price ==
        doctest::Approx((std::sqrt(7.0) - 1.0) / 3).epsilon(1e-9));
  CHECK(solve_privacy_price(uniform_cfg(0.0, 2)).price == 0.5);
  CHECK(solve_privacy_price(power_cfg(0.5, 2)).price ==
        doctest::Approx(0.5178664877745959).epsilon(1e-8));
  CHECK(solve_privacy_price(power_cfg(0.5, 3)).price ==
        doctest::Approx(0.5571207457943452).epsilon(1e-8));

  // p-dagger solves 1 - F^J - J p F^{J-1} f = 0; uniform J=2 gives 1/sqrt(3)
  CHECK(solve_pdagger(uniform_cfg(0.5, 2)).price ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
  // J = 1 reduces to the monopoly condition
  CHECK(foc_pdagger(0.3, ValueDistribution::uniform(), 1) ==
        doctest::Approx(foc_monopoly(0.3, ValueDistribution::uniform()))
            .epsilon(1e-14));
  // privacy price sits strictly between monopoly and best-value
  const double pp = solve_privacy_price(uniform_cfg(0.5, 2)).price;
  CHECK(pp > 0.5);
  CHECK(pp < std::sqrt(3.0) - 1.0);
}

TEST_CASE("candidate price and the independent posted price") {
  // uniform J=2: candidate coincides with the bidding price
  CHECK(solve_candidate_price(uniform_cfg(0.5, 2)).price ==
        doctest::Approx(solve_bidding_price(uniform_cfg(0.5, 2)).price)
            .epsilon(1e-9));

  // uniform J=3: the condition reduces to 5p - 2p^3 = 2
  const double root = solve_candidate_price(uniform_cfg(0.5, 3)).price;
  CHECK(root == doctest::Approx(0.4323204433477053).epsilon(1e-8));
  CHECK(5 * root - 2 * root * root * root == doctest::Approx(2.0).epsilon(1e-9));

  // the independent campaign posts max(candidate, monopoly), bitwise
  auto cfg3 = uniform_cfg(0.5, 3);
  PriceSet ps = solve_all_prices(cfg3);
  CHECK(ps.independent == 0.5);  // candidate 0.432 < monopoly 0.5
  CHECK(ps.independent == std::max(ps.monopoly, ps.candidate));

  auto cfg2 = uniform_cfg(0.5, 2);
  PriceSet ps2 = solve_all_prices(cfg2);
  CHECK(ps2.independent == doctest::Approx(ps2.candidate));
  CHECK(ps2.independent > ps2.monopoly);

  CHECK(solve_candidate_price(power_cfg(0.5, 2)).price ==
        doctest::Approx(0.6166760350178089).epsilon(1e-8));
  CHECK(solve_candidate_price(power_cfg(0.5, 3)).price ==
        doctest::Approx(0.4876318289467144).epsilon(1e-8));
}

TEST_CASE("uniform candidate collapses below monopoly for many firms") {
  const double expected[] = {0.340016, 0.286824, 0.250153, 0.222240,
                             0.200002, 0.181818, 0.166667};
  for (int J = 4; J <= 10; ++J) {
    auto c = uniform_cfg(0.5, J);
    const double cand = solve_candidate_price(c).price;
    CHECK(cand == doctest::Approx(expected[J - 4]).epsilon(1e-5));
    CHECK(solve_all_prices(c).independent == 0.5);
  }
}

TEST_CASE("grid maximization refines ties and validates input") {
  auto peak = maximize_on_grid(
      [](double x) { return -(x - 0.37) * (x - 0.37); }, 0.0, 1.0);
  CHECK(peak.price == doctest::Approx(0.37).epsilon(1e-6));
  CHECK(peak.profit == doctest::Approx(0.0));
  CHECK_THROWS_AS(maximize_on_grid([](double) { return 0.0; }, 0.0, 1.0, 1),
                  std::invalid_argument);
  auto degenerate = maximize_on_grid([](double x) { return x; }, 0.4, 0.4);
  CHECK(degenerate.price == 0.4);
}

TEST_CASE("outside option profit") {
  auto off = outside_option(uniform_cfg(0.0, 2));
  CHECK(off.profit == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(off.price == doctest::Approx(0.5).epsilon(1e-6));

  auto on = outside_option(uniform_cfg(0.5, 2));
  CHECK(on.profit == doctest::Approx(0.09622504486493763).epsilon(1e-9));
  CHECK(on.price == doctest::Approx(0.42264973076738754).epsilon(1e-5));
}

TEST_CASE("undercut profit against a posted cap") {
  auto c = uniform_cfg(0.5, 3);
  auto u = undercut_profit(0.5, c);
  CHECK(u.profit == doctest::Approx(0.1232824586807782).epsilon(1e-8));
  CHECK(u.price == doctest::Approx(0.45787169828151864).epsilon(1e-4));
  // undercutting at the monopoly cap beats staying loyal there, so the cap
  // solver must move below the monopoly price for uniform J=3
  CHECK(u.profit > loyal_profit_at_cap(0.5, c));

  auto zero = undercut_profit(0.0, c);
  CHECK(zero.profit == 0.0);
  CHECK(zero.price == 0.0);
  CHECK_THROWS_AS(undercut_profit(1.5, c), std::invalid_argument);
}

TEST_CASE("loyal profit at a platform cap") {
  auto c = uniform_cfg(0.5, 2);
  CHECK(loyal_profit_at_cap(1.0, c) == doctest::Approx(11.0 / 48).epsilon(1e-9));
  CHECK(loyal_profit_at_cap(0.0, c) == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK_THROWS_AS(loyal_profit_at_cap(-0.2, c), std::invalid_argument);
}

TEST_CASE("price cap: interior crossing for uniform J=3") {
  auto sol = solve_price_cap(uniform_cfg(0.5, 3));
  CHECK(sol.price == doctest::Approx(0.4647848977055709).epsilon(1e-6));
  CHECK(sol.flag == PriceSolution::Flag::none);
  CHECK(sol.crossings == 1);
}

TEST_CASE("price cap short-circuits when the candidate clears monopoly") {
  auto sol2 = solve_price_cap(uniform_cfg(0.5, 2));
  CHECK(sol2.flag == PriceSolution::Flag::cap_equals_candidate);
  CHECK(sol2.price ==
        doctest::Approx(solve_candidate_price(uniform_cfg(0.5, 2)).price));

  auto sol0 = solve_price_cap(uniform_cfg(0.0, 2));
  CHECK(sol0.price == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol0.flag == PriceSolution::Flag::cap_equals_candidate);

  // power(0.75): candidate exceeds monopoly at lambda = 0.5 for both J
  for (int J : {2, 3}) {
    auto sol = solve_price_cap(power_cfg(0.5, J));
    CHECK(sol.flag == PriceSolution::Flag::cap_equals_candidate);
  }
}

TEST_CASE("solver bookkeeping stays within contract") {
  for (auto c : {uniform_cfg(0.3, 2), power_cfg(0.7, 3)}) {
    auto sol = solve_bidding_price(c);
    CHECK(sol.iterations <= 200);
    CHECK(sol.bracket.first >= 0.0);
    CHECK(sol.bracket.second <= 1.0);
    CHECK(std::abs(sol.foc_residual) < 1e-8);
  }
}
