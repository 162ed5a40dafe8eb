// Consumer value distributions on [0,1]: the uniform and power-law families
// used by the solvers, plus an extension point for user-supplied laws.
// Instances are immutable, cheap to copy, and safe to share across threads.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace admarket {

// splitmix64 finalizer; stateless 64-bit scrambler.
std::uint64_t mix64(std::uint64_t x);

// Small splittable pseudo-random stream (splitmix64). Stream i under master
// seed s starts at mix64(s ^ i), so consumers addressed by fixed index draw
// identical values no matter how work is distributed over threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}
  static RngStream derive(std::uint64_t master, std::uint64_t index) {
    return RngStream(mix64(master ^ index));
  }
  std::uint64_t next_u64();
  double next_unit();  // uniform on [0,1), 53-bit resolution
 private:
  std::uint64_t state_;
};

class ValueDistribution {
 public:
  using RealFn = std::function<double(double)>;

  static ValueDistribution uniform();
  // F(v) = v^a on [0,1], a > 0. The density a v^{a-1} is unbounded at 0
  // when a < 1; pdf(0) then reports +infinity.
  static ValueDistribution power(double a);
  // User-supplied (cdf, pdf) pair on [0,1]. quantile may be omitted, in
  // which case sampling inverts the cdf by bisection. The pair is not
  // validated for log-concavity; see log_concavity_defect.
  static ValueDistribution custom(std::string label, RealFn cdf, RealFn pdf,
                                  RealFn quantile = nullptr);

  double cdf(double v) const;       // F(v)
  double pdf(double v) const;      // f(v); +inf sentinel where unbounded
  double quantile(double u) const;  // F^{-1}(u) for u in [0,1]
  double top_order_cdf(double v, int m) const;  // F(v)^m, law of max of m draws
  double sample(RngStream& rng) const;          // inverse-transform draw

  // Closed-form antiderivative of F^m where the family admits one:
  // returns integral of F(t)^m dt over [0, x], or nullopt (custom family).
  std::optional<double> top_order_integral(double x, int m) const;

  bool pdf_unbounded_at_zero() const;
  const std::string& label() const;

  std::string to_json() const;  // {"family":"uniform"} or {"family":"power","a":..}
  static ValueDistribution from_json(const std::string& text);

 private:
  struct Model;
  explicit ValueDistribution(std::shared_ptr<const Model> m);
  std::shared_ptr<const Model> model_;
};

// Largest second difference of ln f(v) over an interior grid; values <= 1e-9
// certify a log-concave density at the grid's resolution. Power(a < 1) fails
// the check (its density is log-convex); policy is to warn, never reject.
double log_concavity_defect(const ValueDistribution& d, int grid_points = 1001);

}  // namespace admarket
