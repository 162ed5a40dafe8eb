// Quadrature tests: adaptive integration accuracy, the F^m antiderivative
// helper, and the on-platform profit integral omega with its two
// independent evaluation pipelines and price derivative.
#include <cmath>

#include "admarket/quad.hpp"
#include "doctest.h"

using namespace admarket;

TEST_CASE("gauss-legendre nodes are symmetric and weights sum to 2") {
  const auto& [nodes, weights] = gauss_legendre(15);
  REQUIRE(nodes.size() == 15);
  REQUIRE(weights.size() == 15);
  double wsum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    wsum += weights[i];
    CHECK(nodes[i] == doctest::Approx(-nodes[nodes.size() - 1 - i])
                          .epsilon(1e-13));
  }
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("integrate handles polynomials to near machine precision") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 3).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, 1.0) ==
        doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-13));
  CHECK(integrate([](double) { return 1.0; }, 0.3, 0.3) == 0.0);
}

TEST_CASE("integrate refines through kinks") {
  const double got =
      integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0);
  // split integral: 0.3^2/2 + 0.7^2/2
  CHECK(got == doctest::Approx(0.045 + 0.245).epsilon(1e-9));
}

TEST_CASE("integrate reports tolerance exhaustion with its best estimate") {
  QuadratureSettings tight;
  tight.abs_tol = 1e-30;
  tight.max_depth = 3;
  try {
    integrate([](double x) { return std::sqrt(std::abs(x - 0.37)); }, 0.0,
              1.0, tight);
    FAIL("expected ToleranceError");
  } catch (const ToleranceError& e) {
    // exact value (2/3)(0.37^1.5 + 0.63^1.5) = 0.483408...
    CHECK(e.best_estimate() == doctest::Approx(0.4834).epsilon(0.05));
    CHECK(e.error_bound() > 1e-30);
  }
}

TEST_CASE("antiderivative of F^m agrees with closed forms") {
  auto u = ValueDistribution::uniform();
  // integral of t^2 over [0, 0.5]
  CHECK(top_order_cdf_integral(u, 0.0, 0.5, 2) ==
        doctest::Approx(0.125 / 3).epsilon(1e-13));
  CHECK(top_order_cdf_integral(u, 0.5, 0.2, 2) == 0.0);

  auto p = ValueDistribution::power(0.75);
  // integral of v^{0.75*3} over [0.2, 0.9]
  const double a = 0.75 * 3 + 1;
  const double want = (std::pow(0.9, a) - std::pow(0.2, a)) / a;
  CHECK(top_order_cdf_integral(p, 0.2, 0.9, 3) ==
        doctest::Approx(want).epsilon(1e-12));

  // custom distribution goes through adaptive quadrature
  auto c = ValueDistribution::custom(
      "quadratic", [](double v) { return v * v; },
      [](double v) { return 2 * v; });
  CHECK(top_order_cdf_integral(c, 0.0, 1.0, 2) ==
        doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("omega reproduces hand-computed uniform values") {
  auto u = ValueDistribution::uniform();
  CHECK(omega(0.5, 0.5, u, 2) == doctest::Approx(7.0 / 48).epsilon(1e-10));
  CHECK(omega(1.0, 1.0, u, 2) == doctest::Approx(1.0 / 6).epsilon(1e-10));
  CHECK(omega(0.3, 0.3, u, 2) == doctest::Approx(0.1095).epsilon(1e-9));
  CHECK(omega(0.0, 0.5, u, 2) == doctest::Approx(0.0));
  // caps above the support behave like p = 1
  CHECK(omega(1.7, 1.7, u, 2) ==
        doctest::Approx(omega(1.0, 1.0, u, 2)).epsilon(1e-12));
}

TEST_CASE("omega matches independently derived power-family values") {
  auto p = ValueDistribution::power(0.75);
  CHECK(omega(0.4, 0.4, p, 2) ==
        doctest::Approx(0.13132758552597287).epsilon(1e-9));
  CHECK(omega(0.6, 0.6, p, 3) ==
        doctest::Approx(0.08875293142989645).epsilon(1e-9));
}

TEST_CASE("the casework pipeline agrees with the simplified integrand") {
  for (auto d : {ValueDistribution::uniform(), ValueDistribution::power(0.75)}) {
    for (int J : {2, 3}) {
      for (double p : {0.0, 0.2, 0.55, 1.0}) {
        for (double pp : {0.1, 0.5, 0.9}) {
          CAPTURE(d.label());
          CAPTURE(J);
          CAPTURE(p);
          CAPTURE(pp);
          CHECK(std::abs(omega_casework(p, pp, d, J) - omega(p, pp, d, J)) <
                1e-8);
        }
      }
    }
  }
}

TEST_CASE("omega_deriv matches closed form and finite differences") {
  auto u = ValueDistribution::uniform();
  // J=2 uniform: integral of (v-p) over [p,1] = (1-p)^2/2
  CHECK(omega_deriv(0.5, u, 2) == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(omega_deriv(1.0, u, 2) == 0.0);
  CHECK(omega_deriv(1.3, u, 2) == 0.0);

  const double h = 1e-5;
  for (auto d : {ValueDistribution::uniform(), ValueDistribution::power(0.75)}) {
    for (int J : {2, 3}) {
      for (double p : {0.2, 0.5, 0.8}) {
        const double fd =
            (omega(p + h, p, d, J) - omega(p - h, p, d, J)) / (2 * h);
        CAPTURE(d.label());
        CHECK(omega_deriv(p, d, J) == doctest::Approx(fd).epsilon(5e-5));
      }
    }
  }
}
