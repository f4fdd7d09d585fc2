#include "dtrimer/spectrum.hpp"

#include "dtrimer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dtrimer {

namespace {

constexpr int q(int n) { return n; }
constexpr int p(int n) { return 3 + n; }
constexpr int Q(int n) { return 6 + n; }
constexpr int P(int n) { return 9 + n; }

}  // namespace

Mat12 symplectic_form() {
  Mat12 J = Mat12::Zero();
  for (int n = 0; n < kSites; ++n) {
    J(q(n), p(n)) = 1.0;
    J(p(n), q(n)) = -1.0;
    J(Q(n), P(n)) = 1.0;
    J(P(n), Q(n)) = -1.0;
  }
  return J;
}

QuadraticForm build_quadratic(const MeanFieldState& s, const ModelParams& params) {
  validate(params);
  const double da = d_energy_d_alpha(s, params).cwiseAbs().maxCoeff();
  const double dt = d_energy_d_theta(s, params).cwiseAbs().maxCoeff();
  if (!(da < kStationarityTolerance) || !(dt < kStationarityTolerance)) {
    std::ostringstream os;
    os << "background is not stationary (|dE/dalpha| = " << da << ", |dE/dtheta| = " << dt << ")";
    throw PreconditionError(os.str());
  }

  const double w = params.omega, W = params.Omega;
  const double lam = params.lambda();
  const double t1 = params.photon_hopping(), t2 = params.atom_hopping();
  Mat12 M = Mat12::Zero();
  for (int n = 0; n < kSites; ++n) {
    const double ct = std::cos(s.theta[n]), cp = std::cos(s.phi[n]);
    M(q(n), q(n)) = w;
    M(p(n), p(n)) = w;
    M(Q(n), Q(n)) = -W / ct;
    M(P(n), P(n)) = -W / ct;
    M(q(n), Q(n)) = M(Q(n), q(n)) = 2.0 * lam * ct * cp;
    for (int m = 0; m < kSites; ++m) {
      if (m == n) continue;
      const double ctm = std::cos(s.theta[m]), cpm = std::cos(s.phi[m]);
      M(q(n), q(m)) = t1;
      M(p(n), p(m)) = t1;
      M(P(n), P(m)) = t2 * cp * cpm;
      M(Q(n), Q(m)) = t2 * cp * cpm * ct * ctm;
    }
  }
  return {M, s, params};
}

SpectrumResult symplectic_eigenvalues(const QuadraticForm& form) {
  const Mat12& M = form.M;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw PreconditionError("quadratic form is not symmetric");

  Eigen::SelfAdjointEigenSolver<Mat12> sym(M, Eigen::EigenvaluesOnly);
  const double min_eval = sym.eigenvalues().minCoeff();
  const double scale = std::max(1.0, sym.eigenvalues().cwiseAbs().maxCoeff());
  if (min_eval < -1e-12 * scale)
    throw UnstableBackground("unstable background: quadratic form has a negative direction", min_eval);

  Eigen::EigenSolver<Mat12> es(symplectic_form() * M, false);
  std::array<double, kQuadratures> mags;
  for (int i = 0; i < kQuadratures; ++i) mags[i] = std::abs(es.eigenvalues()[i].imag());
  std::sort(mags.begin(), mags.end());

  SpectrumResult r;
  for (int j = 0; j < 6; ++j) {
    const double a = mags[2 * j], b = mags[2 * j + 1];
    if (std::abs(a - b) > kPairingTolerance * std::max(1.0, b)) {
      std::ostringstream os;
      os << "symplectic eigenvalues do not pair: " << a << " vs " << b;
      throw SolverError(os.str(), std::abs(a - b), 0);
    }
    r.energies[j] = 0.5 * (a + b) / form.params.omega;
  }
  r.soft_mode_gap = r.energies[0];
  r.critical = r.soft_mode_gap < kCriticalGap;
  return r;
}

SpectrumResult analytic_np_spectrum(const ModelParams& params) {
  validate(params);
  const double lam = params.lambda();
  struct Mode {
    double energy;
    ModeLabel label;
  };
  std::vector<Mode> modes;
  for (int k : {0, 1, -1}) {
    const double cosk = k == 0 ? 1.0 : -0.5;
    const double wk = params.omega + 2.0 * params.photon_hopping() * cosk;
    const double Wk = params.Omega + 2.0 * params.atom_hopping() * cosk;
    const double disc = std::sqrt((wk * wk - Wk * Wk) * (wk * wk - Wk * Wk) + 16.0 * lam * lam * wk * Wk);
    const double plus2 = 0.5 * (wk * wk + Wk * Wk + disc);
    // product of the two roots, free of cancellation near the zero of the lower branch
    const double minus2 = wk * Wk * (wk * Wk - 4.0 * lam * lam) / plus2;
    if (minus2 < 0.0)
      throw UnstableBackground("past criticality: lower normal-phase branch is imaginary", minus2);
    modes.push_back({std::sqrt(plus2), {k, 1}});
    modes.push_back({std::sqrt(minus2), {k, -1}});
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& a, const Mode& b) { return a.energy < b.energy; });
  SpectrumResult r;
  std::array<ModeLabel, 6> labels;
  for (int i = 0; i < 6; ++i) {
    r.energies[i] = modes[i].energy / params.omega;
    labels[i] = modes[i].label;
  }
  r.labels = labels;
  r.soft_mode_gap = r.energies[0];
  r.critical = r.soft_mode_gap < kCriticalGap;
  return r;
}

SpectrumResult ground_state_spectrum(const ModelParams& params, const PhaseResult& ground) {
  return symplectic_eigenvalues(build_quadratic(ground.representative, params));
}

namespace {

bool np_gap_open(const ModelParams& params, double g) {
  try {
    const ModelParams p = with_g(params, g);
    const SpectrumResult s = symplectic_eigenvalues(build_quadratic(normal_phase(p).representative, p));
    return s.soft_mode_gap >= kGapThreshold;
  } catch (const UnstableBackground&) {
    return false;
  }
}

}  // namespace

double numeric_critical_coupling(const ModelParams& params, double tolerance) {
  validate(params);
  double lo = 0.0, hi = 1.0;
  while (np_gap_open(params, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 64.0) throw SolverError("normal-phase gap never closes", 0.0, 0);
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (np_gap_open(params, mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

PowerLawFit fit_critical_exponent(const ModelParams& params, Side side, OnsetBranch branch,
                                  int points) {
  validate(params);
  const CriticalCouplings cc = critical_couplings(params);
  double gc = cc.g_c;
  if (branch == OnsetBranch::Plus) gc = cc.g_c_plus;
  if (branch == OnsetBranch::Minus) gc = cc.g_c_minus;
  if (gc > cc.g_c) throw PreconditionError("requested onset is not where the normal phase ends");
  constexpr double lo = 1e-6, hi = 1e-3;
  if (side == Side::Below && gc - hi <= 0.0)
    throw PreconditionError("fit window extends below g = 0");
  if (auto gL = first_order_point(params)) {
    const bool crosses = side == Side::Above ? (*gL > gc && *gL <= gc + hi) : false;
    if (crosses) throw PreconditionError("fit window crosses the first-order point");
  }

  const std::vector<double> deltas = geometric_grid(lo, hi, points);
  std::vector<double> gaps;
  for (double d : deltas) {
    const ModelParams p = with_g(params, side == Side::Above ? gc + d : gc - d);
    const PhaseResult ground = side == Side::Above ? solve_ground_state(p) : normal_phase(p);
    gaps.push_back(ground_state_spectrum(p, ground).soft_mode_gap);
  }
  return power_law_fit(deltas, gaps);
}

}  // namespace dtrimer
