// Self-verification suite: the model's provable properties (price
// orderings, monotone comparative statics, accounting identities,
// simulator agreement) evaluated on a standard grid and reported as
// machine-readable pass/fail results.
#pragma once

#include <string>
#include <vector>

#include "admarket/welfare.hpp"

namespace admarket {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // worst margin and where it occurred, or the failure
};

struct VerifyOptions {
  bool quick = false;    // coarser grids, skips the simulator checks
  double slack = 1e-7;   // tolerance for the price-ordering inequalities
};

// Ordering checks for one already-solved price set. Taking the prices as
// an argument (rather than solving internally) lets tests feed a
// deliberately corrupted set and watch the suite fail.
std::vector<CheckResult> check_price_ordering(const PriceSet& prices,
                                              const MarketConfig& c,
                                              double slack = 1e-7);

std::vector<CheckResult> run_verification(const VerifyOptions& opt = {});

bool all_passed(const std::vector<CheckResult>& results);

// One line per check: "PASS name: detail" / "FAIL name: detail".
std::string verification_report_text(const std::vector<CheckResult>& results);
std::string verification_report_json(const std::vector<CheckResult>& results);

}  // namespace admarket
