// Comparative-statics sweeps: parallel grid evaluation with deterministic
// ordering, CSV/JSON emission, and CSV parsing for round-trip checks.
#include "admarket/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace admarket {

ValueDistribution FamilySpec::make() const {
  if (kind == "uniform") return ValueDistribution::uniform();
  if (kind == "power") return ValueDistribution::power(a);
  throw std::invalid_argument("FamilySpec: unknown kind '" + kind +
                              "' (expected uniform or power)");
}

std::string FamilySpec::label() const { return make().label(); }

void SweepSpec::validate() const {
  if (!(lambda_step > 0.0)) {
    throw std::invalid_argument("SweepSpec: lambda_step must be positive");
  }
  if (lambda_start < 0.0 || lambda_stop >= 1.0 || lambda_start > lambda_stop) {
    throw std::invalid_argument(
        "SweepSpec: lambda grid must satisfy 0 <= start <= stop < 1");
  }
  if (J_list.empty()) {
    throw std::invalid_argument("SweepSpec: J_list must be nonempty");
  }
  for (int J : J_list) {
    if (J < 2) throw std::invalid_argument("SweepSpec: J entries must be >= 2");
  }
  if (families.empty()) {
    throw std::invalid_argument("SweepSpec: families must be nonempty");
  }
  if (mechanisms.empty()) {
    throw std::invalid_argument("SweepSpec: mechanisms must be nonempty");
  }
  for (const auto& fam : families) fam.make();
}

std::vector<double> SweepSpec::lambda_grid() const {
  const int count = static_cast<int>(
      std::floor((lambda_stop - lambda_start) / lambda_step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = lambda_start + i * lambda_step;
  return grid;
}

namespace {

// One (lambda, J, family) cell; all requested mechanisms share its solve.
struct Cell {
  double lambda;
  int J;
  std::size_t family_index;
};

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<double> lambdas = spec.lambda_grid();

  std::vector<Cell> cells;
  for (double lam : lambdas) {
    for (int J : spec.J_list) {
      for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
        cells.push_back({lam, J, fi});
      }
    }
  }

  const bool need_cap =
      std::find(spec.mechanisms.begin(), spec.mechanisms.end(),
                Mechanism::IndependentManaged) != spec.mechanisms.end();

  std::vector<std::vector<SweepRow>> results(cells.size());
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      MarketConfig c;
      c.lambda = cell.lambda;
      c.J = cell.J;
      c.dist = spec.families[cell.family_index].make();
      auto& rows = results[i];
      rows.reserve(spec.mechanisms.size());

      std::string cell_error;
      SolvedMarket solved;
      try {
        solved = solve_market(c, need_cap);
      } catch (const std::exception& e) {
        cell_error = e.what();
      }
      for (Mechanism m : spec.mechanisms) {
        SweepRow row;
        row.lambda = cell.lambda;
        row.J = cell.J;
        row.family = c.dist.label();
        row.mechanism = m;
        if (!cell_error.empty()) {
          row.error = cell_error;
        } else {
          try {
            row.outcome = mechanism_outcome(m, c, solved);
          } catch (const std::exception& e) {
            row.error = e.what();
          }
        }
        rows.push_back(std::move(row));
      }
    }
  };

  unsigned workers = spec.threads > 0
                         ? static_cast<unsigned>(spec.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, cells.size() == 0 ? 1 : cells.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::vector<SweepRow> rows;
  for (auto& cell_rows : results) {
    for (auto& r : cell_rows) rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.J != b.J) return a.J < b.J;
    if (a.family != b.family) return a.family < b.family;
    return static_cast<int>(a.mechanism) < static_cast<int>(b.mechanism);
  });
  return rows;
}

const char* const kSweepCsvHeader =
    "lambda,J,family,mechanism,posted_price,cap,cs_on,cs_off,cs_total,"
    "profit_per_firm,transfer_per_firm,platform_revenue,producer_surplus,"
    "welfare_total,error";

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string sanitize_error(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

void require_rows(const std::vector<SweepRow>& rows, const char* who) {
  if (rows.empty()) {
    throw std::invalid_argument(std::string(who) + ": no rows to emit");
  }
}

}  // namespace

std::string to_csv(const std::vector<SweepRow>& rows) {
  require_rows(rows, "to_csv");
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    const auto& o = r.outcome;
    out += fmt(r.lambda);
    out += ',';
    out += std::to_string(r.J);
    out += ',';
    out += r.family;
    out += ',';
    out += mechanism_label(r.mechanism);
    for (double x : {o.posted_price, o.on_platform_cap, o.cs_on, o.cs_off,
                     o.cs_total, o.profit_per_firm, o.transfer_per_firm,
                     o.platform_revenue, o.producer_surplus, o.welfare_total}) {
      out += ',';
      out += fmt(x);
    }
    out += ',';
    out += sanitize_error(r.error);
    out += '\n';
  }
  return out;
}

std::string to_json(const std::vector<SweepRow>& rows) {
  require_rows(rows, "to_json");
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["lambda"] = r.lambda;
    j["J"] = r.J;
    j["family"] = r.family;
    j["mechanism"] = mechanism_label(r.mechanism);
    const auto& o = r.outcome;
    j["posted_price"] = o.posted_price;
    j["cap"] = o.on_platform_cap;
    j["cs_on"] = o.cs_on;
    j["cs_off"] = o.cs_off;
    j["cs_total"] = o.cs_total;
    j["profit_per_firm"] = o.profit_per_firm;
    j["transfer_per_firm"] = o.transfer_per_firm;
    j["platform_revenue"] = o.platform_revenue;
    j["producer_surplus"] = o.producer_surplus;
    j["welfare_total"] = o.welfare_total;
    j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

namespace {

void write_file(const std::string& path, const std::string& body,
                const char* who) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error(std::string(who) + ": cannot open " + path);
  }
  f << body;
  if (!f) {
    throw std::runtime_error(std::string(who) + ": write failed for " + path);
  }
}

}  // namespace

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  write_file(path, to_csv(rows), "emit_csv");
}

void emit_json(const std::vector<SweepRow>& rows, const std::string& path) {
  write_file(path, to_json(rows), "emit_json");
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("parse_csv: empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) {
    throw std::invalid_argument("parse_csv: unexpected header: " + line);
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) parts.push_back(field);
    if (line.back() == ',') parts.push_back("");  // trailing empty error
    if (parts.size() != 15) {
      throw std::invalid_argument("parse_csv: bad field count in: " + line);
    }
    SweepRow r;
    r.lambda = std::stod(parts[0]);
    r.J = std::stoi(parts[1]);
    r.family = parts[2];
    r.mechanism = mechanism_from_label(parts[3]);
    auto& o = r.outcome;
    o.mechanism = r.mechanism;
    o.posted_price = std::stod(parts[4]);
    o.on_platform_cap = std::stod(parts[5]);
    o.cs_on = std::stod(parts[6]);
    o.cs_off = std::stod(parts[7]);
    o.cs_total = std::stod(parts[8]);
    o.profit_per_firm = std::stod(parts[9]);
    o.transfer_per_firm = std::stod(parts[10]);
    o.platform_revenue = std::stod(parts[11]);
    o.producer_surplus = std::stod(parts[12]);
    o.welfare_total = std::stod(parts[13]);
    r.error = parts[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

SweepSpec sweep_spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SweepSpec spec;
  if (j.contains("lambda_start")) spec.lambda_start = j["lambda_start"];
  if (j.contains("lambda_stop")) spec.lambda_stop = j["lambda_stop"];
  if (j.contains("lambda_step")) spec.lambda_step = j["lambda_step"];
  if (j.contains("J_list")) {
    spec.J_list = j["J_list"].get<std::vector<int>>();
  }
  if (j.contains("families")) {
    spec.families.clear();
    for (const auto& f : j["families"]) {
      FamilySpec fam;
      fam.kind = f.value("kind", std::string("uniform"));
      fam.a = f.value("a", 1.0);
      spec.families.push_back(fam);
    }
  }
  if (j.contains("mechanisms")) {
    spec.mechanisms.clear();
    for (const auto& m : j["mechanisms"]) {
      spec.mechanisms.push_back(
          mechanism_from_label(m.get<std::string>()));
    }
  }
  if (j.contains("threads")) spec.threads = j["threads"];
  return spec;
}

}  // namespace admarket
