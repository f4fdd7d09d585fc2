#pragma once

// Quadratic fluctuations about a mean-field background and their normal-mode
// energies. Quadratures are ordered (q1..q3, p1..p3, Q1..Q3, P1..P3): photon
// position/momentum first, then the atomic pair; the symplectic form pairs
// q_n with p_n and Q_n with P_n.

#include "dtrimer/meanfield.hpp"
#include "dtrimer/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>

namespace dtrimer {

inline constexpr int kQuadratures = 12;
using Mat12 = Eigen::Matrix<double, kQuadratures, kQuadratures>;

struct QuadraticForm {
  Mat12 M = Mat12::Zero();  // H2 = 1/2 xi^T M xi
  MeanFieldState background;
  ModelParams params;
};

// Momentum in units of 2 pi / 3 (0, +1, -1) and the upper (+1) or lower (-1) branch.
struct ModeLabel {
  int momentum = 0;
  int branch = 1;
};

struct SpectrumResult {
  std::array<double, 6> energies{};  // ascending, in units of omega
  std::optional<std::array<ModeLabel, 6>> labels;
  double soft_mode_gap = 0.0;
  bool critical = false;  // soft mode below kCriticalGap
};

inline constexpr double kCriticalGap = 1e-10;
inline constexpr double kPairingTolerance = 1e-9;
inline constexpr double kStationarityTolerance = 1e-8;

// Standard symplectic form for the quadrature ordering above.
Mat12 symplectic_form();

// Throws PreconditionError if the background is not stationary in alpha and theta.
QuadraticForm build_quadratic(const MeanFieldState& background, const ModelParams& params);

// Positive imaginary parts of the eigenvalues of J M. Throws UnstableBackground
// if M has a negative eigenvalue and SolverError if the eigenvalues do not pair.
SpectrumResult symplectic_eigenvalues(const QuadraticForm& form);

// Closed-form normal-phase energies per momentum. Throws UnstableBackground past criticality.
SpectrumResult analytic_np_spectrum(const ModelParams& params);

// Spectrum about the ground state returned by solve_ground_state.
SpectrumResult ground_state_spectrum(const ModelParams& params, const PhaseResult& ground);

// Smallest g at which the numerically diagonalised normal-phase gap falls below
// kGapThreshold, found by bisection from g = 0.
inline constexpr double kGapThreshold = 1e-8;
double numeric_critical_coupling(const ModelParams& params, double tolerance = 1e-12);

enum class Side { Below, Above };

// Slope of log(soft gap) against log|g - g_c| over |g - g_c| in [1e-6, 1e-3].
PowerLawFit fit_critical_exponent(const ModelParams& params, Side side,
                                  OnsetBranch branch = OnsetBranch::Active, int points = 13);

}  // namespace dtrimer
