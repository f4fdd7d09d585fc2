#pragma once

// Parameters of the three-site Dicke lattice and the closed-form quantities that
// depend on them: energy coefficients, the hopping matrix linking cavity
// coherences to the transformed variables x, critical couplings and the
// classification of the (J1, J2) plane by the g-driven phase sequence.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace dtrimer {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kSites = 3;

// omega and Omega are in energy units; g, J1 and J2 are dimensionless
// (g = 2 lambda / sqrt(omega Omega), J1 = photon hopping / omega, J2 = atom hopping / Omega).
struct ModelParams {
  double omega = 1.0;
  double Omega = 1.0;
  double g = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;

  double lambda() const;        // bare light-matter coupling
  double photon_hopping() const { return J1 * omega; }
  double atom_hopping() const { return J2 * Omega; }
};

// Throws ParameterError naming the first invalid field.
void validate(const ModelParams& params);
ModelParams make_params(double g, double J1, double J2, double omega = 1.0, double Omega = 1.0);
ModelParams with_g(ModelParams params, double g);

struct Coefficients {
  double C_tilde = 0.0;
  double B_tilde = 0.0;
  double A_tilde = 0.0;
};

double c_tilde(double J1);
// Throws DomainError at g = 0.
double b_tilde(double J1, double J2, double g);
double a_tilde(double J1, double J2, double g);
Coefficients coefficients(const ModelParams& params);

// Unit diagonal, J1 off the diagonal.
Mat3 hopping_matrix(double J1);
Vec3 x_from_alpha(const Vec3& alpha, const ModelParams& params);
Vec3 alpha_from_x(const Vec3& x, const ModelParams& params);

enum class Momentum { Zero, Finite };  // k = 0 or k = +-2 pi / 3

struct CriticalCouplings {
  double g_c_plus = 0.0;   // finite momentum
  double g_c_minus = 0.0;  // zero momentum
  double g_c = 0.0;
  Momentum k_star = Momentum::Zero;
};

// sqrt((1 + 2 J1 cos k)(1 + 2 J2 cos k)) for cos k in {1, -1/2}.
double critical_coupling_at(double J1, double J2, Momentum k);
CriticalCouplings critical_couplings(const ModelParams& params);

// J1 on the curve where both critical couplings coincide. Requires J2 > -1.
double dividing_curve(double J2);

// g at which B~ changes sign; absent when J1 = 0 or J1, J2 share a sign.
std::optional<double> first_order_point(const ModelParams& params);
std::optional<double> first_order_point(double J1, double J2);

enum class Phase { NP, NSP, FSP };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);
std::string sequence_to_string(const std::vector<Phase>& sequence);

struct RegionLabel {
  int region = 0;  // 1..6, 0 when on a boundary
  std::vector<Phase> expected_sequence;
  bool boundary = false;
  std::vector<int> adjacent;  // regions touching the boundary point
  std::optional<double> g_L;
  double g_c = 0.0;
};

// Tolerance used to decide that (J1, J2) lies on an axis or on the dividing curve.
inline constexpr double kBoundaryTolerance = 1e-12;

RegionLabel classify_region(double J1, double J2);

// Phase sequence listed for a region (1..6).
std::vector<Phase> region_sequence(int region);

// Region reached from a quadrant and an observed sequence; 0 if no region of that quadrant has it.
int region_from_sequence(double J1, double J2, const std::vector<Phase>& sequence);

}  // namespace dtrimer
