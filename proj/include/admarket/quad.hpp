// Adaptive Gauss-Legendre quadrature on subintervals of [0,1], plus the
// kinked expected-profit integrals for the on-platform auction: omega (the
// simplified form), its raw casework counterpart, and its price derivative.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "admarket/dist.hpp"

namespace admarket {

struct QuadratureSettings {
  double abs_tol = 1e-9;  // global absolute error target
  int max_depth = 30;     // bisection depth per branch
  int base_nodes = 15;    // Gauss-Legendre points per panel
};

// Raised when refinement exhausts max_depth with the error estimate still
// above abs_tol; carries the best estimate computed so far.
class ToleranceError : public std::runtime_error {
 public:
  ToleranceError(const std::string& what, double best_estimate,
                 double error_bound)
      : std::runtime_error(what), best_(best_estimate), err_(error_bound) {}
  double best_estimate() const { return best_; }
  double error_bound() const { return err_; }

 private:
  double best_, err_;
};

// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1], computed
// on first use and cached. Nodes are interior, so integrands may blow up at
// interval endpoints.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(
    int n);

// Integral of f over [a, b] to within s.abs_tol, by worst-panel-first
// adaptive refinement of per-panel Gauss-Legendre estimates.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSettings& s = {});

// Integral of F(t)^m dt over [lo, hi] (hi <= lo gives 0): closed form for
// the shipped families, adaptive quadrature for custom ones. Many surplus
// expressions reduce to this after integration by parts.
double top_order_cdf_integral(const ValueDistribution& d, double lo,
                              double hi, int m,
                              const QuadratureSettings& s = {});

// Expected profit of one firm from an on-platform consumer when all J firms
// post price p: the double integral of min(v - v', p) over the firm's own
// value v and the best rival value v' <= v. p_other is accepted only for
// signature symmetry with omega_casework; the simplified integrand does not
// depend on it. Values of p above 1 behave as p = 1 (the cap never binds).
double omega(double p, double p_other, const ValueDistribution& d, int J,
             const QuadratureSettings& s = {});

// The same quantity evaluated from the unsimplified bid-concession
// expression: own bid min(v - (v'-p_other)_+, p) minus the best rival bid
// (min(v' - (v-p)_+, p_other))_+, integrated over the same region. Follows
// an entirely separate evaluation path (panel-wise slopes of the raw
// integrand) and must agree with omega.
double omega_casework(double p, double p_other, const ValueDistribution& d,
                      int J, const QuadratureSettings& s = {});

// d omega / dp = integral of F^{J-1}(v - p) dF(v) over v in [p, 1].
double omega_deriv(double p, const ValueDistribution& d, int J,
                   const QuadratureSettings& s = {});

}  // namespace admarket
