// Value distribution families and the sampling stream.
#include "admarket/dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace admarket {

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

struct ValueDistribution::Model {
  enum class Family { Uniform, Power, Custom };
  Family family = Family::Uniform;
  double a = 1.0;  // power exponent
  std::string label;
  RealFn cdf_fn, pdf_fn, quantile_fn;
};

namespace {

// Arguments a hair outside [0,1] are accumulated round-off from the
// integrators; clamp those, reject anything farther out.
constexpr double kDomainSlack = 1e-9;

double checked(double v, const char* op) {
  if (!(v >= -kDomainSlack && v <= 1.0 + kDomainSlack))
    throw std::domain_error(std::string(op) + ": argument " +
                            std::to_string(v) + " outside [0,1]");
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

ValueDistribution::ValueDistribution(std::shared_ptr<const Model> m)
    : model_(std::move(m)) {}

ValueDistribution ValueDistribution::uniform() {
  auto m = std::make_shared<Model>();
  m->family = Model::Family::Uniform;
  m->label = "uniform";
  return ValueDistribution(std::move(m));
}

ValueDistribution ValueDistribution::power(double a) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("power exponent must be positive");
  auto m = std::make_shared<Model>();
  m->family = Model::Family::Power;
  m->a = a;
  char buf[48];
  std::snprintf(buf, sizeof buf, "power(%g)", a);
  m->label = buf;
  return ValueDistribution(std::move(m));
}

ValueDistribution ValueDistribution::custom(std::string label, RealFn cdf,
                                            RealFn pdf, RealFn quantile) {
  if (!cdf || !pdf)
    throw std::invalid_argument("custom distribution needs cdf and pdf");
  auto m = std::make_shared<Model>();
  m->family = Model::Family::Custom;
  m->label = std::move(label);
  m->cdf_fn = std::move(cdf);
  m->pdf_fn = std::move(pdf);
  m->quantile_fn = std::move(quantile);
  return ValueDistribution(std::move(m));
}

double ValueDistribution::cdf(double v) const {
  v = checked(v, "cdf");
  switch (model_->family) {
    case Model::Family::Uniform: return v;
    case Model::Family::Power: return std::pow(v, model_->a);
    case Model::Family::Custom: return model_->cdf_fn(v);
  }
  return 0.0;
}

double ValueDistribution::pdf(double v) const {
  v = checked(v, "pdf");
  switch (model_->family) {
    case Model::Family::Uniform: return 1.0;
    case Model::Family::Power:
      // a v^{a-1}; pow(0, negative) yields the documented +inf sentinel
      return model_->a * std::pow(v, model_->a - 1.0);
    case Model::Family::Custom: return model_->pdf_fn(v);
  }
  return 0.0;
}

double ValueDistribution::quantile(double u) const {
  u = checked(u, "quantile");
  switch (model_->family) {
    case Model::Family::Uniform: return u;
    case Model::Family::Power: return std::pow(u, 1.0 / model_->a);
    case Model::Family::Custom: break;
  }
  if (model_->quantile_fn) return model_->quantile_fn(u);
  // invert the cdf by bisection; cdf is nondecreasing on [0,1]
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100 && hi - lo > 1e-14; ++i) {
    double mid = 0.5 * (lo + hi);
    (model_->cdf_fn(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ValueDistribution::top_order_cdf(double v, int m) const {
  if (m < 0) throw std::invalid_argument("top_order_cdf: negative order");
  if (m == 0) return 1.0;
  return std::pow(cdf(v), m);
}

double ValueDistribution::sample(RngStream& rng) const {
  return quantile(rng.next_unit());
}

std::optional<double> ValueDistribution::top_order_integral(double x,
                                                            int m) const {
  if (m < 0) throw std::invalid_argument("top_order_integral: negative order");
  x = checked(x, "top_order_integral");
  if (m == 0) return x;
  switch (model_->family) {
    case Model::Family::Uniform:
      return std::pow(x, m + 1) / (m + 1);
    case Model::Family::Power: {
      double e = model_->a * m + 1.0;  // integral of t^{am} is t^{am+1}/(am+1)
      return std::pow(x, e) / e;
    }
    case Model::Family::Custom: return std::nullopt;
  }
  return std::nullopt;
}

bool ValueDistribution::pdf_unbounded_at_zero() const {
  return model_->family == Model::Family::Power && model_->a < 1.0;
}

const std::string& ValueDistribution::label() const { return model_->label; }

std::string ValueDistribution::to_json() const {
  nlohmann::json j;
  switch (model_->family) {
    case Model::Family::Uniform:
      j["family"] = "uniform";
      break;
    case Model::Family::Power:
      j["family"] = "power";
      j["a"] = model_->a;
      break;
    case Model::Family::Custom:
      throw std::invalid_argument("custom distributions have no JSON form");
  }
  return j.dump();
}

ValueDistribution ValueDistribution::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const std::string family = j.at("family").get<std::string>();
  if (family == "uniform") return uniform();
  if (family == "power") return power(j.at("a").get<double>());
  throw std::invalid_argument("unknown distribution family: " + family);
}

double log_concavity_defect(const ValueDistribution& d, int grid_points) {
  if (grid_points < 3) throw std::invalid_argument("grid too small");
  // interior grid keeps unbounded endpoints out of reach
  const double h = 1.0 / (grid_points + 1);
  double worst = -HUGE_VAL;
  double lf_prev = std::log(d.pdf(h));
  double lf_cur = std::log(d.pdf(2 * h));
  for (int i = 2; i <= grid_points; ++i) {
    double lf_next = std::log(d.pdf((i + 1) * h));
    worst = std::max(worst, lf_next - 2 * lf_cur + lf_prev);
    lf_prev = lf_cur;
    lf_cur = lf_next;
  }
  return worst;
}

}  // namespace admarket
