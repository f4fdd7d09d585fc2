#pragma once

// Mean-field ground states of the trimer. All energies are the rescaled
// ground-state energy per atom ensemble, in units of N_a * Omega.

#include "dtrimer/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace dtrimer {

// theta is the Bloch polar angle in (pi/2, pi] (cos theta < 0) and phi is 0 or pi;
// sin(theta) cos(phi) = -2 x / g, so the sign of each site lives in phi and alpha.
struct MeanFieldState {
  Vec3 alpha = Vec3::Zero();
  Vec3 theta = Vec3::Constant(3.14159265358979323846);
  Vec3 phi = Vec3::Zero();
  Vec3 x = Vec3::Zero();
};

MeanFieldState make_state(const Vec3& x, const ModelParams& params);

struct PhaseResult {
  Phase label = Phase::NP;
  double energy = -1.5;
  int degeneracy = 1;
  MeanFieldState representative;
  std::vector<MeanFieldState> all_minima;
  bool coexistence = false;
  // Non-canonical (x1, x2 = x3) form returned by the frustrated solver.
  std::optional<Eigen::Vector2d> fsp_pair;
};

// Energy functional of the transformed variables. Throws DomainError if any |x_n| >= g/2.
double energy(const Vec3& x, const ModelParams& params);
Vec3 gradient(const Vec3& x, const ModelParams& params);
Mat3 hessian(const Vec3& x, const ModelParams& params);

// Energy of the un-eliminated functional of (alpha, theta, phi) and its partial
// derivatives; used to check that a state is stationary in every variable.
double energy_full(const MeanFieldState& state, const ModelParams& params);
Vec3 d_energy_d_alpha(const MeanFieldState& state, const ModelParams& params);
Vec3 d_energy_d_theta(const MeanFieldState& state, const ModelParams& params);

// Lower bound on the energy valid when B~ < 0:
// (C~ + 2 B~) sum x^2 - 3/2 sqrt(1 - 4 sum x^2 / (3 g^2)); tight on x1 = x2 = x3.
double cauchy_schwarz_bound(const Vec3& x, const ModelParams& params);

// Images of x under cyclic site shifts and a global sign flip, with duplicates
// (within tol) removed.
std::vector<Vec3> symmetry_orbit(const Vec3& x, double tol = 1e-12);

// Orders the orbit lexicographically and fills representative / all_minima.
PhaseResult make_result(Phase label, const Vec3& x, const ModelParams& params);

PhaseResult normal_phase(const ModelParams& params);

// Uniform branch in closed form. Returns the normal phase when g is at or below onset.
PhaseResult solve_nsp(const ModelParams& params);

struct FspOptions {
  std::optional<Eigen::Vector2d> seed;  // (x1, x2) from a neighbouring solution
  int max_iterations = 200;
  int max_halvings = 50;
  double tolerance = 1e-12;
  // Follow the frustrated branch where B~ <= 0 (metastable or saddle side).
  bool allow_metastable = false;
};

// Half-gradient of the energy restricted to x = (x1, x2, x2).
Eigen::Vector2d fsp_residual(double x1, double x2, const ModelParams& params);

// Requires g > g_c+ and B~ > 0 unless allow_metastable is set.
PhaseResult solve_fsp(const ModelParams& params, const FspOptions& options = {});

// Leading-order frustrated configuration above g_c+ (zero at or below it).
MeanFieldState asymptotic_fsp(const ModelParams& params);

inline constexpr double kCoexistenceTolerance = 1e-12;

PhaseResult solve_ground_state(const ModelParams& params, const FspOptions& options = {});

// f(x) = (g^2 + J2 - J1 J2) x / (1 - J1) - x / sqrt(1 - 4 x^2 / g^2) and the roots of f(x) = k.
double monotonic_function(double x, const ModelParams& params);
double monotonic_function_slope(double x, const ModelParams& params);

struct RootStructure {
  bool monotonic = true;
  std::vector<double> turning_points;  // empty when monotonic
  std::vector<double> roots;           // ascending
};

RootStructure root_structure(const ModelParams& params, double k);

// Ground state of the atom-hopping-only lattice (J1 = 0), solved through the
// self-consistent roots of f(x) = J2 (x1 + x2 + x3) instead of Newton iteration.
PhaseResult solve_atom_only(const ModelParams& params);

// Energy of the J1 = 0 functional written directly in the coherences.
double atom_only_energy(const Vec3& alpha, const ModelParams& params);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  std::vector<double> deltas;
  std::vector<double> values;
};

// Least squares fit of log(values) against log(deltas).
PowerLawFit power_law_fit(const std::vector<double>& deltas, const std::vector<double>& values);

// Geometric grid of n distances in [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, int n);

enum class OnsetBranch { Active, Plus, Minus };

// max_n |alpha_n| against g - g_c over g - g_c in [1e-6, 1e-3].
PowerLawFit fit_order_parameter(const ModelParams& params, OnsetBranch branch = OnsetBranch::Active,
                                int points = 13);

}  // namespace dtrimer
