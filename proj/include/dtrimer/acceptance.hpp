#pragma once

// Programmatic acceptance suite. Each criterion returns one pass/fail record;
// tolerances are fixed in the implementation.

#include "dtrimer/model.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dtrimer {

enum class Scope { Formulas, Oracle, Spectrum, All };
Scope scope_from_string(const std::string& name);

struct CriterionResult {
  std::string id;    // "C1".."C12" for the numbered criteria, "X-..." for extra invariants
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240917;
  int workers = 1;
};

// Ids run for a scope, in report order.
std::vector<std::string> criteria_in_scope(Scope scope);
CriterionResult run_criterion(const std::string& id, const AcceptanceOptions& options = {});
std::vector<CriterionResult> run_acceptance(Scope scope, const AcceptanceOptions& options = {});

// "PASS C1  name  detail  (0.12 s)"
std::string format_result(const CriterionResult& result);

// One interior point of each region, used for the sequence and transition checks.
struct RegionPoint {
  int region;
  double J1, J2;
};
const std::vector<RegionPoint>& region_samples();

// Uniform draw of (J1, J2) in (-0.45, 0.45)^2 restricted to one region.
std::array<double, 2> sample_region(std::mt19937_64& rng, int region);

}  // namespace dtrimer
