// Adaptive quadrature and the on-platform profit integrals.
#include "admarket/quad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace admarket {

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(
    int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on the Legendre polynomial from the usual cosine guess
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double step = p1 / dp;
      xi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[i] = -xi;
    x[n - 1 - i] = xi;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w)))
      .first->second;
}

namespace {

using Fn = std::function<double(double)>;

double gl_panel(const Fn& f, double a, double b,
                const std::vector<double>& x, const std::vector<double>& w) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) sum += w[i] * f(c + h * x[i]);
  if (!std::isfinite(sum))
    throw std::domain_error("integrate: integrand not finite inside (" +
                            std::to_string(a) + "," + std::to_string(b) + ")");
  return sum * h;
}

struct Panel {
  double err;   // |coarse - fine|
  double a, b;
  double fine;  // contributed value: sum of the two half-panel estimates
  double left_half, right_half;  // reused as the children's coarse values
  int depth;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel make_panel(const Fn& f, double a, double b, double coarse, int depth,
                 const std::vector<double>& x, const std::vector<double>& w) {
  const double mid = 0.5 * (a + b);
  Panel p;
  p.a = a;
  p.b = b;
  p.depth = depth;
  p.left_half = gl_panel(f, a, mid, x, w);
  p.right_half = gl_panel(f, mid, b, x, w);
  p.fine = p.left_half + p.right_half;
  p.err = std::abs(coarse - p.fine);
  return p;
}

}  // namespace

double integrate(const Fn& f, double a, double b,
                 const QuadratureSettings& s) {
  if (!(a <= b)) throw std::invalid_argument("integrate: need a <= b");
  if (!(s.abs_tol > 0) || s.max_depth < 1 || s.base_nodes < 1)
    throw std::invalid_argument("integrate: bad settings");
  if (a == b) return 0.0;
  const auto& [x, w] = gauss_legendre(s.base_nodes);

  // Worst-panel-first refinement. Each split reuses the parent's half-panel
  // values as the children's coarse estimates, costing four new evaluations.
  std::vector<Panel> heap;
  heap.push_back(make_panel(f, a, b, gl_panel(f, a, b, x, w), 0, x, w));
  double frozen_val = 0.0, frozen_err = 0.0;  // panels stuck at max_depth
  double active_err = heap.front().err;
  constexpr size_t kMaxPanels = 200000;  // runaway guard for hostile inputs

  auto best_estimate = [&] {
    double v = frozen_val;
    for (const Panel& p : heap) v += p.fine;
    return v;
  };

  while (active_err + frozen_err > s.abs_tol) {
    if (heap.empty() || heap.size() > kMaxPanels)
      throw ToleranceError("integrate: tolerance not reached", best_estimate(),
                           active_err + frozen_err);
    std::pop_heap(heap.begin(), heap.end());
    Panel worst = heap.back();
    heap.pop_back();
    active_err -= worst.err;
    if (worst.depth >= s.max_depth) {
      frozen_val += worst.fine;
      frozen_err += worst.err;
      if (frozen_err > s.abs_tol)  // no amount of further splitting can help
        throw ToleranceError("integrate: max depth exhausted", best_estimate(),
                             active_err + frozen_err);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    for (const Panel& child :
         {make_panel(f, worst.a, mid, worst.left_half, worst.depth + 1, x, w),
          make_panel(f, mid, worst.b, worst.right_half, worst.depth + 1, x,
                     w)}) {
      active_err += child.err;
      heap.push_back(child);
      std::push_heap(heap.begin(), heap.end());
    }
  }
  return best_estimate();
}

namespace {

QuadratureSettings tighter(const QuadratureSettings& s, double factor) {
  QuadratureSettings t = s;
  t.abs_tol = std::max(s.abs_tol * factor, 1e-13);
  return t;
}

// Splits [0,1] at the given interior cut points and integrates each piece to
// a proportional share of the tolerance.
double integrate_unit_split(const Fn& f, std::vector<double> cuts,
                            const QuadratureSettings& s) {
  cuts.push_back(0.0);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-12; }),
             cuts.end());
  std::vector<std::pair<double, double>> segs;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i] >= 0.0 && cuts[i + 1] <= 1.0)
      segs.emplace_back(cuts[i], cuts[i + 1]);
  QuadratureSettings per = tighter(s, 1.0 / std::max<size_t>(segs.size(), 1));
  double total = 0.0;
  for (auto [lo, hi] : segs) total += integrate(f, lo, hi, per);
  return total;
}

double clamp_cap(double p, const char* op) {
  if (!(p >= -1e-9))
    throw std::domain_error(std::string(op) + ": negative price cap");
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double top_order_cdf_integral(const ValueDistribution& d, double lo,
                              double hi, int m, const QuadratureSettings& s) {
  if (hi <= lo) return 0.0;
  if (auto anti = d.top_order_integral(hi, m))
    return *anti - *d.top_order_integral(lo, m);
  return integrate([&](double t) { return d.top_order_cdf(t, m); }, lo, hi,
                   tighter(s, 0.1));
}

double omega(double p, double /*p_other*/, const ValueDistribution& d, int J,
             const QuadratureSettings& s) {
  if (J < 2) throw std::invalid_argument("omega: need J >= 2");
  p = clamp_cap(p, "omega");
  if (p == 0.0) return 0.0;
  // Inner integral by parts: min(v - v', p) is piecewise linear in v' with
  // boundary terms vanishing, so the inner reduces to the integral of
  // F^{J-1} over [(v-p)_+, v] and no density is evaluated inside it.
  auto outer = [&](double v) {
    return top_order_cdf_integral(d, std::max(v - p, 0.0), v, J - 1, s) *
           d.pdf(v);
  };
  return integrate_unit_split(outer, {p}, s);
}

double omega_casework(double p, double p_other, const ValueDistribution& d,
                      int J, const QuadratureSettings& s) {
  if (J < 2) throw std::invalid_argument("omega_casework: need J >= 2");
  p = clamp_cap(p, "omega_casework");
  const double pp = clamp_cap(p_other, "omega_casework");

  // Raw integrand: own bid minus best rival bid, both after concessions.
  auto g = [&](double vp, double v) {
    double own = std::min(v - std::max(vp - pp, 0.0), p);
    double rival = std::max(std::min(vp - std::max(v - p, 0.0), pp), 0.0);
    return own - rival;
  };
  // g is piecewise linear in v' on [0, v] and vanishes at v' = v, so
  // integrating by parts against F^{J-1} leaves only the panel slopes.
  auto inner = [&](double v) {
    const double w0 = std::max(v - p, 0.0);
    const double candidates[] = {pp, v - p, w0, w0 + pp, v - p + pp};
    std::vector<double> cuts = {0.0, v};
    for (double k : candidates)
      if (k > 0.0 && k < v) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i], hi = cuts[i + 1];
      if (hi - lo < 1e-14) continue;
      const double slope = (g(hi, v) - g(lo, v)) / (hi - lo);
      if (slope == 0.0) continue;
      total -= slope * top_order_cdf_integral(d, lo, hi, J - 1, s);
    }
    return total;
  };
  auto outer = [&](double v) { return inner(v) * d.pdf(v); };
  return integrate_unit_split(
      outer, {p, pp, std::abs(p - pp), std::min(p + pp, 1.0)}, s);
}

double omega_deriv(double p, const ValueDistribution& d, int J,
                   const QuadratureSettings& s) {
  if (J < 2) throw std::invalid_argument("omega_deriv: need J >= 2");
  p = clamp_cap(p, "omega_deriv");
  if (p >= 1.0) return 0.0;
  return integrate(
      [&](double v) {
        return d.top_order_cdf(std::max(v - p, 0.0), J - 1) * d.pdf(v);
      },
      p, 1.0, s);
}

}  // namespace admarket
