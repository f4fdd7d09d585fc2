#pragma once

// Brute-force reference for the mean-field problem: a dense grid over the
// whole domain of x, local descent from every grid-local minimum, and
// transition detection from finite differences of the resulting energy.

#include "dtrimer/meanfield.hpp"
#include "dtrimer/model.hpp"

#include <vector>

namespace dtrimer {

struct OracleConfig {
  int grid_points_per_axis = 41;
  double refine_tolerance = 1e-10;  // max-norm of the gradient after descent
  double cluster_radius = 1e-6;
  double derivative_step = 1e-4;    // node spacing in g for transition detection
  double energy_tolerance = 1e-10;  // minima this close to the lowest count as degenerate
  int workers = 1;
};

void validate(const OracleConfig& config);

struct LocalMinimum {
  Vec3 x = Vec3::Zero();
  double energy = 0.0;
};

// Every distinct local minimum, sorted by energy then lexicographically.
std::vector<LocalMinimum> local_minima(const ModelParams& params, const OracleConfig& config = {});

// NP if all x_n vanish, NSP if all are equal, FSP otherwise.
Phase pattern_label(const Vec3& x, double tol = 1e-6);

PhaseResult brute_force_minimize(const ModelParams& params, const OracleConfig& config = {});

enum class TransitionOrder { First, Second };
std::string to_string(TransitionOrder order);

struct Transition {
  double g_star = 0.0;
  TransitionOrder order = TransitionOrder::Second;
  bool inconclusive = false;
  double jump = 0.0;         // estimated jump of dE/dg (first) or d2E/dg2 (second)
  double noise_floor = 0.0;
  Phase from = Phase::NP;
  Phase to = Phase::NP;
};

struct EnergyCurve {
  std::vector<double> g;
  std::vector<double> energy;
  std::vector<Phase> label;
};

// Oracle energies on g_min, g_min + step, ... up to g_max.
EnergyCurve oracle_energy_curve(const ModelParams& base, double g_min, double g_max,
                                const OracleConfig& config = {});

// Transitions along g in [g_min, g_max] at fixed J1, J2 (the g of base is ignored).
std::vector<Transition> detect_transitions(const ModelParams& base, double g_min, double g_max,
                                           const OracleConfig& config = {});

}  // namespace dtrimer
