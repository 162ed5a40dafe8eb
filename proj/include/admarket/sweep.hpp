// Comparative-statics engine: grids over (lambda, J, family, mechanism)
// with CSV/JSON emission. Rows carry per-row errors instead of aborting,
// and output bytes are deterministic for a fixed spec.
#pragma once

#include <string>
#include <vector>

#include "admarket/welfare.hpp"

namespace admarket {

// Serializable stand-in for ValueDistribution so specs can round-trip
// through JSON config files.
struct FamilySpec {
  std::string kind = "uniform";  // "uniform" or "power"
  double a = 1.0;                // exponent, power family only

  ValueDistribution make() const;
  std::string label() const;
};

struct SweepSpec {
  double lambda_start = 0.0;
  double lambda_stop = 0.95;
  double lambda_step = 0.05;
  std::vector<int> J_list = {3, 5, 7};
  std::vector<FamilySpec> families = {FamilySpec{}};
  std::vector<Mechanism> mechanisms = all_mechanisms();
  int threads = 0;  // 0: use available parallelism

  void validate() const;                // throws std::invalid_argument
  std::vector<double> lambda_grid() const;
};

struct SweepRow {
  double lambda = 0.0;
  int J = 0;
  std::string family;
  Mechanism mechanism = Mechanism::NoPlatform;
  EquilibriumOutcome outcome;
  std::string error;  // empty on success
};

// One row per (lambda, J, family, mechanism), sorted by exactly that key.
// Solver failures land in the row's error field, never abort the sweep.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

extern const char* const kSweepCsvHeader;

// Serializers throw std::invalid_argument on an empty row set.
std::string to_csv(const std::vector<SweepRow>& rows);
std::string to_json(const std::vector<SweepRow>& rows);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);
void emit_json(const std::vector<SweepRow>& rows, const std::string& path);

// Inverse of to_csv, for round-trip checks and downstream tooling.
std::vector<SweepRow> parse_csv(const std::string& text);

// Builds a spec from a JSON object; absent keys keep their defaults.
SweepSpec sweep_spec_from_json(const std::string& text);

}  // namespace admarket
