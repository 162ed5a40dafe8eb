// Self-verification suite tests: the quick run passes on a healthy build,
// a deliberately corrupted price set trips the ordering checks, and the
// reports render both ways.
#include <cmath>
#include <string>

#include "admarket/equilibria.hpp"
#include "admarket/verify.hpp"
#include "doctest.h"

using namespace admarket;

TEST_CASE("quick verification passes on a healthy build") {
  VerifyOptions opt;
  opt.quick = true;
  auto results = run_verification(opt);
  CHECK(results.size() >= 20);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
  CHECK(all_passed(results));
}

TEST_CASE("ordering checks accept a correctly solved price set") {
  MarketConfig c;
  c.lambda = 0.4;
  auto checks = check_price_ordering(solve_all_prices(c), c);
  CHECK(all_passed(checks));
}

TEST_CASE("a corrupted bidding price trips the ordering checks") {
  MarketConfig c;
  c.lambda = 0.4;
  PriceSet prices = solve_all_prices(c);

  // solve a sign-flipped sponsored-channel condition: the root lands below
  // the monopoly price, which the ordering suite must reject
  auto flipped = [&](double p) {
    return (1 - c.lambda) / c.J * foc_monopoly(p, c.dist) -
           c.lambda * omega_deriv(p, c.dist, c.J, c.quad);
  };
  prices.bidding = bisect_root(flipped, 0.0, 1.0).price;
  REQUIRE(prices.bidding < prices.monopoly);

  auto checks = check_price_ordering(prices, c);
  CHECK_FALSE(all_passed(checks));
  bool found = false;
  for (const auto& r : checks) {
    if (!r.pass) {
      found = true;
      CHECK(r.name.find("bidding") != std::string::npos);
    }
  }
  CHECK(found);

  std::string text = verification_report_text(checks);
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(text.find("PASS") != std::string::npos);
}

TEST_CASE("reports carry every check with its verdict") {
  VerifyOptions opt;
  opt.quick = true;
  auto results = run_verification(opt);

  std::string text = verification_report_text(results);
  size_t lines = 0;
  for (char ch : text) {
    if (ch == '\n') ++lines;
  }
  CHECK(lines >= results.size());
  for (const auto& r : results) {
    CAPTURE(r.name);
    CHECK(text.find(r.name) != std::string::npos);
  }

  std::string json = verification_report_json(results);
  CHECK(json.find("\"name\"") != std::string::npos);
  CHECK(json.find("\"pass\"") != std::string::npos);
  CHECK(json.find("\"detail\"") != std::string::npos);
  CHECK(json.find("\"all_passed\"") != std::string::npos);
}
