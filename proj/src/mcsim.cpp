// Simulator internals: per-block tallies of channel sums and squares,
// reduced over a fixed pairwise tree so the estimate is a pure function of
// (seed, n) no matter how many workers ran the blocks.
#include "admarket/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace admarket {

namespace {

constexpr std::int64_t kBlock = std::int64_t{1} << 14;
constexpr double kTieSlack = 1e-12;  // absorbs roundoff in v - (v - u)

int argmax_value(const std::vector<double>& v) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(v.size()); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best;
}

double best_posted_utility(const std::vector<double>& values,
                           const std::vector<double>& posted) {
  double best = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    best = std::max(best, values[k] - posted[k]);
  }
  return best;
}

// On-channel slots: cs, firm gain, platform take, consumer outlay, welfare.
// Off-channel slots: cs, firm revenue, welfare.
struct Tally {
  double on[5] = {};
  double on2[5] = {};
  double off[3] = {};
  double off2[3] = {};
  std::int64_t n_on = 0;
  std::int64_t n_off = 0;
  std::int64_t misallocated = 0;
  std::int64_t showroomed = 0;
  std::int64_t poached = 0;

  void add_on(const double x[5]) {
    for (int i = 0; i < 5; ++i) {
      on[i] += x[i];
      on2[i] += x[i] * x[i];
    }
    ++n_on;
  }
  void add_off(const double x[3]) {
    for (int i = 0; i < 3; ++i) {
      off[i] += x[i];
      off2[i] += x[i] * x[i];
    }
    ++n_off;
  }
  void merge(const Tally& t) {
    for (int i = 0; i < 5; ++i) {
      on[i] += t.on[i];
      on2[i] += t.on2[i];
    }
    for (int i = 0; i < 3; ++i) {
      off[i] += t.off[i];
      off2[i] += t.off2[i];
    }
    n_on += t.n_on;
    n_off += t.n_off;
    misallocated += t.misallocated;
    showroomed += t.showroomed;
    poached += t.poached;
  }
};

struct ChannelStat {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t n = 0;
};

ChannelStat channel_stat(double sum, double sumsq, std::int64_t n) {
  ChannelStat s;
  s.n = n;
  if (n <= 0) return s;
  s.mean = sum / n;
  if (n >= 2) {
    double var = std::max(0.0, sumsq / n - s.mean * s.mean);
    s.se = std::sqrt(var / (n - 1));
  }
  return s;
}

Estimate make_estimate(double value, double se, double analytic) {
  Estimate e;
  e.value = value;
  e.se = se;
  e.analytic = analytic;
  e.z = se > 0.0 ? (value - analytic) / se : 0.0;
  return e;
}

}  // namespace

std::vector<double> bid_vector(const std::vector<double>& values,
                               const std::vector<double>& posted,
                               double reserve_floor) {
  if (values.empty() || values.size() != posted.size()) {
    throw std::invalid_argument(
        "bid_vector: values and posted prices must have equal nonzero size");
  }
  const int J = static_cast<int>(values.size());
  std::vector<double> bids(J);
  for (int j = 0; j < J; ++j) {
    double conceded = 0.0;  // best utility some rival's posted offer gives
    for (int k = 0; k < J; ++k) {
      if (k != j) conceded = std::max(conceded, values[k] - posted[k]);
    }
    bids[j] = std::max(std::min(posted[j], values[j] - conceded),
                       reserve_floor);
  }
  return bids;
}

AuctionRecord run_bidding_auction(const ConsumerDraw& consumer,
                                  const std::vector<double>& posted) {
  if (consumer.loyal_to >= 0) {
    throw std::invalid_argument(
        "run_bidding_auction: consumer must be on-platform");
  }
  AuctionRecord r;
  r.bids = bid_vector(consumer.values, posted);
  const int J = static_cast<int>(r.bids.size());
  for (int j = 1; j < J; ++j) {
    if (r.bids[j] > r.bids[r.winner]) r.winner = j;
  }
  for (int j = 0; j < J; ++j) {
    if (j != r.winner) r.payment = std::max(r.payment, r.bids[j]);
  }
  r.sponsored_price = r.bids[r.winner];
  double vw = consumer.values[r.winner];
  double conceded = 0.0;
  for (int k = 0; k < J; ++k) {
    if (k != r.winner) {
      conceded = std::max(conceded, consumer.values[k] - posted[k]);
    }
  }
  r.bought = vw - r.sponsored_price >= conceded - kTieSlack;
  if (r.bought) {
    r.consumer_surplus = vw - r.sponsored_price;
    r.firm_profit = r.sponsored_price - r.payment;
    r.platform_take = r.payment;
  } else {
    r.consumer_surplus = best_posted_utility(consumer.values, posted);
    r.payment = 0.0;
  }
  return r;
}

AuctionRecord run_managed(const ConsumerDraw& consumer, Mechanism mech,
                          const std::vector<double>& posted, double cap) {
  if (consumer.loyal_to >= 0) {
    throw std::invalid_argument("run_managed: consumer must be on-platform");
  }
  if (consumer.values.empty() || consumer.values.size() != posted.size()) {
    throw std::invalid_argument(
        "run_managed: values and posted prices must have equal nonzero size");
  }
  const std::vector<double>& v = consumer.values;
  const int J = static_cast<int>(v.size());
  AuctionRecord r;
  r.winner = argmax_value(v);
  double vw = v[r.winner];
  double price = 0.0;
  switch (mech) {
    case Mechanism::BestValueManaged: {
      // min over rivals of (vw, own posted, vw - v_k + posted_k): the
      // dearest price that still leaves the consumer their best deal.
      double rival_gap = -1.0;  // posted offers never beat utility -1
      for (int k = 0; k < J; ++k) {
        if (k != r.winner) rival_gap = std::max(rival_gap, v[k] - posted[k]);
      }
      price = std::min({vw, posted[r.winner], vw - rival_gap});
      break;
    }
    case Mechanism::IndependentManaged:
      price = std::min(vw, cap);
      break;
    case Mechanism::CohortPrivacy:
      price = *std::min_element(posted.begin(), posted.end());
      break;
    default:
      throw std::invalid_argument("run_managed: " + mechanism_label(mech) +
                                  " is not a managed campaign");
  }
  r.sponsored_price = price;
  double fallback = best_posted_utility(v, posted);
  r.bought = vw >= price && vw - price >= fallback - kTieSlack;
  if (r.bought) {
    r.consumer_surplus = vw - price;
    r.firm_profit = price;
  } else {
    r.consumer_surplus = fallback;
  }
  return r;
}

SimulationReport estimate_outcome(Mechanism mech, const MarketConfig& c,
                                  std::int64_t n, std::uint64_t seed,
                                  ChannelMode mode, int threads) {
  c.validate();
  if (n < 1) {
    throw std::invalid_argument("estimate_outcome: n must be at least 1");
  }
  const EquilibriumOutcome target = mechanism_outcome(mech, c);
  const int J = c.J;
  const ValueDistribution& d = c.dist;
  const std::vector<double> posted(J, target.posted_price);
  const double cap = target.on_platform_cap;
  const bool all_loyal = mech == Mechanism::NoPlatform;
  const std::int64_t stratified_on =
      mode == ChannelMode::Stratified ? std::llround(c.lambda * n) : 0;
  const std::uint64_t stride = static_cast<std::uint64_t>(J) + 1;

  const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<Tally> tallies(nblocks);

  auto run_block = [&](std::int64_t b) {
    Tally tally;
    ConsumerDraw consumer;
    consumer.values.resize(J);
    const std::int64_t stop = std::min(n, (b + 1) * kBlock);
    for (std::int64_t i = b * kBlock; i < stop; ++i) {
      const std::uint64_t base = static_cast<std::uint64_t>(i) * stride;
      RngStream channel_rng = RngStream::derive(seed, base);
      if (all_loyal) {
        consumer.loyal_to = static_cast<int>(i % J);
      } else if (mode == ChannelMode::Stratified) {
        consumer.loyal_to =
            i < stratified_on ? -1 : static_cast<int>((i - stratified_on) % J);
      } else {
        if (channel_rng.next_unit() < c.lambda) {
          consumer.loyal_to = -1;
        } else {
          consumer.loyal_to = std::min(
              J - 1, static_cast<int>(channel_rng.next_unit() * J));
        }
      }
      for (int j = 0; j < J; ++j) {
        RngStream value_rng = RngStream::derive(seed, base + 1 + j);
        consumer.values[j] = d.sample(value_rng);
      }
      if (consumer.loyal_to >= 0) {
        double v = consumer.values[consumer.loyal_to];
        bool buys = v >= target.posted_price;
        double x[3] = {buys ? v - target.posted_price : 0.0,
                       buys ? target.posted_price : 0.0, buys ? v : 0.0};
        tally.add_off(x);
        continue;
      }
      AuctionRecord r = mech == Mechanism::Bidding ||
                                mech == Mechanism::BiddingWithFees
                            ? run_bidding_auction(consumer, posted)
                            : run_managed(consumer, mech, posted, cap);
      if (r.winner != argmax_value(consumer.values)) ++tally.misallocated;
      if (r.sponsored_price > posted[r.winner] + kTieSlack) ++tally.showroomed;
      if (r.bought && r.consumer_surplus <
                          best_posted_utility(consumer.values, posted) -
                              kTieSlack) {
        ++tally.poached;
      }
      double outlay = r.bought ? r.sponsored_price : 0.0;
      double x[5] = {r.consumer_surplus, r.firm_profit, r.platform_take,
                     outlay, r.bought ? consumer.values[r.winner] : 0.0};
      tally.add_on(x);
    }
    tallies[b] = tally;
  };

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int workers = threads > 0 ? threads : hw;
  workers = static_cast<int>(
      std::min<std::int64_t>(workers, nblocks));
  if (workers <= 1) {
    for (std::int64_t b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t b = next.fetch_add(1); b < nblocks;
             b = next.fetch_add(1)) {
          run_block(b);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // Pairwise tree: the combination order depends only on the block count.
  std::vector<Tally> layer = std::move(tallies);
  while (layer.size() > 1) {
    std::vector<Tally> up((layer.size() + 1) / 2);
    for (std::size_t i = 0; i < up.size(); ++i) {
      up[i] = layer[2 * i];
      if (2 * i + 1 < layer.size()) up[i].merge(layer[2 * i + 1]);
    }
    layer = std::move(up);
  }
  const Tally& total = layer.front();

  SimulationReport rep;
  rep.mechanism = mech;
  rep.n = n;
  rep.seed = seed;
  rep.mode = mode;
  rep.threads = workers;
  rep.n_on = total.n_on;
  rep.n_off = total.n_off;
  rep.allocation_violations = total.misallocated;
  rep.showrooming_violations = total.showroomed;
  rep.poaching_violations = total.poached;

  ChannelStat on[5], off[3];
  for (int i = 0; i < 5; ++i) {
    on[i] = channel_stat(total.on[i], total.on2[i], total.n_on);
  }
  for (int i = 0; i < 3; ++i) {
    off[i] = channel_stat(total.off[i], total.off2[i], total.n_off);
  }

  auto& q = rep.quantities;
  if (all_loyal) {
    q["cs_off"] = make_estimate(off[0].mean, off[0].se, target.cs_off);
    q["cs_on"] = make_estimate(off[0].mean, off[0].se, target.cs_on);
    q["cs_total"] = make_estimate(off[0].mean, off[0].se, target.cs_total);
    q["profit_per_firm"] = make_estimate(off[1].mean / J, off[1].se / J,
                                         target.profit_per_firm);
    q["platform_revenue"] =
        make_estimate(0.0, 0.0, target.platform_revenue);
    q["producer_surplus"] =
        make_estimate(off[1].mean, off[1].se, target.producer_surplus);
    q["welfare_total"] =
        make_estimate(off[2].mean, off[2].se, target.welfare_total);
    q["transfer_per_firm"] = make_estimate(0.0, 0.0, 0.0);
  } else {
    const double w_on = mode == ChannelMode::Stratified
                            ? c.lambda
                            : static_cast<double>(total.n_on) / n;
    const double w_off = 1.0 - w_on;
    auto mix = [&](const ChannelStat& a, const ChannelStat& b,
                   double analytic, double scale = 1.0) {
      double value = (w_off * a.mean + w_on * b.mean) * scale;
      double se = std::sqrt(w_off * w_off * a.se * a.se +
                            w_on * w_on * b.se * b.se) *
                  scale;
      return make_estimate(value, se, analytic);
    };
    q["cs_off"] = make_estimate(off[0].mean, off[0].se, target.cs_off);
    q["cs_on"] = make_estimate(on[0].mean, on[0].se, target.cs_on);
    q["cs_total"] = mix(off[0], on[0], target.cs_total);
    // Transfers are deterministic, so the per-firm estimate nets them off
    // the simulated gross and the platform adds them back.
    ChannelStat gross = on[1];
    q["profit_per_firm"] =
        make_estimate((w_off * off[1].mean + w_on * gross.mean) / J -
                          target.transfer_per_firm,
                      std::sqrt(w_off * w_off * off[1].se * off[1].se +
                                w_on * w_on * gross.se * gross.se) /
                          J,
                      target.profit_per_firm);
    q["platform_revenue"] = make_estimate(
        w_on * on[2].mean + J * target.transfer_per_firm, w_on * on[2].se,
        target.platform_revenue);
    q["producer_surplus"] = mix(off[1], on[3], target.producer_surplus);
    q["welfare_total"] = mix(off[2], on[4], target.welfare_total);
    q["transfer_per_firm"] = make_estimate(
        target.transfer_per_firm, 0.0, target.transfer_per_firm);
  }
  for (const auto& kv : q) {
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(kv.second.z));
  }
  return rep;
}

std::string report_to_json(const SimulationReport& r) {
  nlohmann::ordered_json j;
  j["mechanism"] = mechanism_label(r.mechanism);
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["mode"] = r.mode == ChannelMode::Stratified ? "stratified" : "bernoulli";
  j["threads"] = r.threads;
  j["n_on"] = r.n_on;
  j["n_off"] = r.n_off;
  nlohmann::ordered_json qs;
  for (const auto& [name, e] : r.quantities) {
    qs[name] = {{"estimate", e.value},
                {"se", e.se},
                {"analytic", e.analytic},
                {"z", e.z}};
  }
  j["quantities"] = qs;
  j["allocation_violations"] = r.allocation_violations;
  j["showrooming_violations"] = r.showrooming_violations;
  j["poaching_violations"] = r.poaching_violations;
  j["max_abs_z"] = r.max_abs_z;
  return j.dump(2);
}

}  // namespace admarket
