#include "dtrimer/meanfield.hpp"

#include "dtrimer/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dtrimer {

namespace {

constexpr double kPi = std::numbers::pi;

void require_domain(const Vec3& x, double g) {
  if (!(g > 0.0)) throw DomainError("the energy functional requires g > 0");
  for (int n = 0; n < kSites; ++n) {
    if (!(std::abs(x[n]) < 0.5 * g)) {
      std::ostringstream os;
      os << "|x_" << n + 1 << "| = " << std::abs(x[n]) << " is not below g/2 = " << 0.5 * g;
      throw DomainError(os.str());
    }
  }
}

bool in_domain(double v, double g) { return std::abs(v) < 0.5 * g; }

// 1 / sqrt(1 - 4 x^2 / g^2)
double inv_root(double v, double g) { return 1.0 / std::sqrt(1.0 - 4.0 * v * v / (g * g)); }

bool lex_less(const Vec3& a, const Vec3& b) {
  return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

}  // namespace

MeanFieldState make_state(const Vec3& x, const ModelParams& p) {
  MeanFieldState s;
  if (p.g == 0.0) {
    if (x.cwiseAbs().maxCoeff() != 0.0) throw DomainError("only x = 0 is admissible at g = 0");
    return s;
  }
  require_domain(x, p.g);
  s.x = x;
  s.alpha = alpha_from_x(x, p);
  for (int n = 0; n < kSites; ++n) {
    const double sin_cos = -2.0 * x[n] / p.g;
    s.theta[n] = kPi - std::asin(std::abs(sin_cos));
    s.phi[n] = sin_cos < 0.0 ? kPi : 0.0;
  }
  return s;
}

double energy(const Vec3& x, const ModelParams& p) {
  require_domain(x, p.g);
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  double e = 0.0;
  for (int n = 0; n < kSites; ++n) {
    const double xn = x[n];
    const double xnext = x[(n + 1) % kSites];
    e += C * xn * xn - 0.5 * std::sqrt(1.0 - 4.0 * xn * xn / (p.g * p.g)) + 2.0 * B * xn * xnext;
  }
  return e;
}

Vec3 gradient(const Vec3& x, const ModelParams& p) {
  require_domain(x, p.g);
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  const double g2 = p.g * p.g;
  Vec3 grad;
  for (int n = 0; n < kSites; ++n) {
    const double neighbours = x[(n + 2) % kSites] + x[(n + 1) % kSites];
    grad[n] = 2.0 * C * x[n] + 2.0 * x[n] / g2 * inv_root(x[n], p.g) + 2.0 * B * neighbours;
  }
  return grad;
}

Mat3 hessian(const Vec3& x, const ModelParams& p) {
  require_domain(x, p.g);
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  Mat3 H = Mat3::Constant(2.0 * B);
  for (int n = 0; n < kSites; ++n) {
    const double r = inv_root(x[n], p.g);
    H(n, n) = 2.0 * C + 2.0 / (p.g * p.g) * r * r * r;
  }
  return H;
}

double cauchy_schwarz_bound(const Vec3& x, const ModelParams& p) {
  require_domain(x, p.g);
  const double s2 = x.squaredNorm();
  return (c_tilde(p.J1) + 2.0 * b_tilde(p.J1, p.J2, p.g)) * s2 -
         1.5 * std::sqrt(1.0 - 4.0 * s2 / (3.0 * p.g * p.g));
}

double energy_full(const MeanFieldState& s, const ModelParams& p) {
  double e = 0.0;
  for (int n = 0; n < kSites; ++n) {
    const int m = (n + 1) % kSites;
    const double sn = std::sin(s.theta[n]) * std::cos(s.phi[n]);
    const double sm = std::sin(s.theta[m]) * std::cos(s.phi[m]);
    e += s.alpha[n] * s.alpha[n] + 0.5 * std::cos(s.theta[n]) + p.g * s.alpha[n] * sn +
         2.0 * p.J1 * s.alpha[n] * s.alpha[m] + 0.5 * p.J2 * sn * sm;
  }
  return e;
}

Vec3 d_energy_d_alpha(const MeanFieldState& s, const ModelParams& p) {
  Vec3 d;
  for (int n = 0; n < kSites; ++n) {
    const double sn = std::sin(s.theta[n]) * std::cos(s.phi[n]);
    d[n] = 2.0 * s.alpha[n] + p.g * sn +
           2.0 * p.J1 * (s.alpha[(n + 2) % kSites] + s.alpha[(n + 1) % kSites]);
  }
  return d;
}

Vec3 d_energy_d_theta(const MeanFieldState& s, const ModelParams& p) {
  auto sc = [&](int n) { return std::sin(s.theta[n]) * std::cos(s.phi[n]); };
  Vec3 d;
  for (int n = 0; n < kSites; ++n) {
    const double cn = std::cos(s.theta[n]) * std::cos(s.phi[n]);
    d[n] = -0.5 * std::sin(s.theta[n]) + p.g * s.alpha[n] * cn +
           0.5 * p.J2 * cn * (sc((n + 2) % kSites) + sc((n + 1) % kSites));
  }
  return d;
}

std::vector<Vec3> symmetry_orbit(const Vec3& x, double tol) {
  std::vector<Vec3> orbit;
  for (int shift = 0; shift < kSites; ++shift) {
    Vec3 y;
    for (int n = 0; n < kSites; ++n) y[n] = x[(n + shift) % kSites];
    for (double sign : {1.0, -1.0}) {
      const Vec3 candidate = sign * y;
      const bool seen = std::any_of(orbit.begin(), orbit.end(), [&](const Vec3& o) {
        return (o - candidate).cwiseAbs().maxCoeff() <= tol;
      });
      if (!seen) orbit.push_back(candidate);
    }
  }
  std::sort(orbit.begin(), orbit.end(), lex_less);
  return orbit;
}

PhaseResult make_result(Phase label, const Vec3& x, const ModelParams& p) {
  PhaseResult r;
  r.label = label;
  r.energy = energy(x, p);
  for (const Vec3& y : symmetry_orbit(x)) r.all_minima.push_back(make_state(y, p));
  r.degeneracy = static_cast<int>(r.all_minima.size());
  r.representative = r.all_minima.front();
  return r;
}

PhaseResult normal_phase(const ModelParams& p) {
  validate(p);
  PhaseResult r;
  r.label = Phase::NP;
  r.energy = -1.5;
  r.degeneracy = 1;
  r.representative = MeanFieldState{};
  r.all_minima = {r.representative};
  return r;
}

PhaseResult solve_nsp(const ModelParams& p) {
  validate(p);
  if (p.g == 0.0) return normal_phase(p);
  const double g2 = p.g * p.g;
  const double shifted = g2 - 2.0 * (p.J2 + 2.0 * p.J1 * p.J2);
  const double radicand =
      1.0 / ((1.0 + 2.0 * p.J1) * (1.0 + 2.0 * p.J1)) - 1.0 / (shifted * shifted);
  // shifted <= 1 + 2 J1 means g is at or below the zero-momentum onset.
  if (!(shifted > 1.0 + 2.0 * p.J1) || !(radicand > 0.0)) return normal_phase(p);
  const double alpha = 0.5 * p.g * std::sqrt(radicand);
  const double x = (1.0 + 2.0 * p.J1) * alpha;
  PhaseResult r = make_result(Phase::NSP, Vec3::Constant(x), p);
  // Build the states from the closed-form coherence so alpha is bit-identical
  // to the formula; x = S alpha up to rounding.
  for (auto& state : r.all_minima) {
    const double sign = state.x[0] > 0 ? 1.0 : -1.0;
    state.alpha = Vec3::Constant(sign * alpha);
  }
  r.representative = r.all_minima.front();
  return r;
}

Eigen::Vector2d fsp_residual(double x1, double x2, const ModelParams& p) {
  const Vec3 x(x1, x2, x2);
  require_domain(x, p.g);
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  const double g2 = p.g * p.g;
  return {C * x1 + x1 / g2 * inv_root(x1, p.g) + 2.0 * B * x2,
          C * x2 + x2 / g2 * inv_root(x2, p.g) + B * (x1 + x2)};
}

namespace {

// Frustrated equations in t = tan(u) with x = (g/2) sin u: the square root
// becomes 1 / sqrt(1 + t^2), there is no domain edge, and the equations turn
// nearly linear in t where |x| approaches g/2.
double x_of_t(double t, double g) { return 0.5 * g * t / std::sqrt(1.0 + t * t); }
double dx_dt(double t, double g) { return 0.5 * g / std::pow(1.0 + t * t, 1.5); }

Eigen::Vector2d tan_residual(const Eigen::Vector2d& t, const ModelParams& p) {
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  const double x1 = x_of_t(t[0], p.g), x2 = x_of_t(t[1], p.g);
  return {C * x1 + t[0] / (2.0 * p.g) + 2.0 * B * x2,
          C * x2 + t[1] / (2.0 * p.g) + B * (x1 + x2)};
}

Eigen::Matrix2d tan_jacobian(const Eigen::Vector2d& t, const ModelParams& p) {
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  const double d1 = dx_dt(t[0], p.g), d2 = dx_dt(t[1], p.g);
  Eigen::Matrix2d J;
  J << C * d1 + 0.5 / p.g, 2.0 * B * d2,
       B * d1, C * d2 + 0.5 / p.g + B * d2;
  return J;
}

double angle_energy(const Eigen::Vector2d& u, const ModelParams& p) {
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  const double x1 = 0.5 * p.g * std::sin(u[0]), x2 = 0.5 * p.g * std::sin(u[1]);
  return C * (x1 * x1 + 2.0 * x2 * x2) - 0.5 * (std::cos(u[0]) + 2.0 * std::cos(u[1])) +
         2.0 * B * (2.0 * x1 * x2 + x2 * x2);
}

// Lowest point of the reduced energy on an angle grid inside x1 < 0 < x2.
Eigen::Vector2d scan_seed(const ModelParams& p) {
  constexpr int n = 64;
  const double h = 0.5 * kPi / (n + 1);
  Eigen::Vector2d best(-h, h);
  double best_e = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const Eigen::Vector2d u(-i * h, j * h);
      const double e = angle_energy(u, p);
      if (e < best_e) {
        best_e = e;
        best = u;
      }
    }
  }
  return {0.5 * p.g * std::sin(best[0]), 0.5 * p.g * std::sin(best[1])};
}

}  // namespace

MeanFieldState asymptotic_fsp(const ModelParams& p) {
  validate(p);
  const double gcp = critical_coupling_at(p.J1, p.J2, Momentum::Finite);
  MeanFieldState s;
  if (!(p.g > gcp)) return s;
  const double amplitude = std::sqrt((1.0 - p.J2) * gcp) / std::sqrt(3.0);
  const double root = std::sqrt(std::abs(p.g - gcp));
  const Vec3 x(-2.0 * amplitude * root, amplitude * root, amplitude * root);
  s = make_state(x, p);
  s.alpha = Vec3(2.0 * amplitude / (-1.0 + p.J1) * root, amplitude / (1.0 - p.J1) * root,
                 amplitude / (1.0 - p.J1) * root);
  return s;
}

namespace {

double t_of_x(double x, double g) {
  const double s = 2.0 * x / g;
  return s / std::sqrt(1.0 - s * s);
}

// Damped Newton on the frustrated equations in t, starting from t.
Eigen::Vector2d fsp_newton(Eigen::Vector2d t, const ModelParams& p, const FspOptions& opt) {
  // residual terms grow like g, so the tolerance is relative above g = 1
  const double tol = opt.tolerance * std::max(1.0, p.g);
  if (t[0] > 0.0 && t[1] < 0.0) t = -t;
  if (!(t[0] < 0.0 && t[1] > 0.0)) throw SolverError("frustrated seed needs x1 < 0 < x2", 0.0, 0);
  Eigen::Vector2d F = tan_residual(t, p);
  double res = F.cwiseAbs().maxCoeff();
  int it = 0;
  int polish = 0;
  for (; it < opt.max_iterations; ++it) {
    if (res < tol) {
      // a couple of extra full steps take the residual to rounding level
      if (polish++ >= 2) break;
    }
    const Eigen::Vector2d step = tan_jacobian(t, p).partialPivLu().solve(-F);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
      const Eigen::Vector2d trial = t + lambda * step;
      // stay inside the frustrated sector so the uniform roots cannot capture the iteration
      if (!(trial[0] < 0.0 && trial[1] > 0.0)) continue;
      const Eigen::Vector2d Ft = tan_residual(trial, p);
      const double rt = Ft.cwiseAbs().maxCoeff();
      if (rt < res || (res < tol && rt <= res)) {
        t = trial;
        F = Ft;
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (res < tol) break;
      throw SolverError("damped Newton stalled on the frustrated equations", res, it);
    }
  }
  if (!(res < tol))
    throw SolverError("damped Newton did not converge on the frustrated equations", res, it);

  const Eigen::Vector2d v(x_of_t(t[0], p.g), x_of_t(t[1], p.g));
  if (!(v[0] < 0.0 && v[1] > 0.0))
    throw SolverError("Newton iteration converged to a non-frustrated root", res, it);
  if (!opt.allow_metastable) {
    // full Hessian with the cosines taken from t, which stays accurate near |x| = g/2
    const double C = c_tilde(p.J1), B = b_tilde(p.J1, p.J2, p.g);
    auto cosine = [](double tt) { return 1.0 / std::sqrt(1.0 + tt * tt); };
    const Vec3 cosines(cosine(t[0]), cosine(t[1]), cosine(t[1]));
    Mat3 H = Mat3::Constant(2.0 * B);
    for (int n = 0; n < kSites; ++n)
      H(n, n) = 2.0 * C + 2.0 / (p.g * p.g * std::pow(cosines[n], 3));
    Eigen::SelfAdjointEigenSolver<Mat3> es(H, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw SolverError("frustrated root is not a local minimum", res, it);
  }
  return v;
}

}  // namespace

PhaseResult solve_fsp(const ModelParams& p, const FspOptions& opt) {
  validate(p);
  const double gcp = critical_coupling_at(p.J1, p.J2, Momentum::Finite);
  if (!(p.g > gcp)) throw PreconditionError("frustrated branch requires g > g_c+");
  const double B = b_tilde(p.J1, p.J2, p.g);
  if (!(B > 0.0) && !opt.allow_metastable) throw PreconditionError("frustrated branch requires B~ > 0");

  // Seeds in t = tan(u), in order of preference; the first that lands on a
  // frustrated minimum wins.
  std::vector<Eigen::Vector2d> seeds;
  auto add_x_seed = [&](const Eigen::Vector2d& x) {
    if (in_domain(x[0], p.g) && in_domain(x[1], p.g))
      seeds.emplace_back(t_of_x(x[0], p.g), t_of_x(x[1], p.g));
  };
  if (opt.seed) add_x_seed(*opt.seed);
  if ((p.g - gcp) < 0.02 * gcp) {
    const MeanFieldState a = asymptotic_fsp(p);
    add_x_seed(Eigen::Vector2d(a.x[0], a.x[1]));
  }
  add_x_seed(scan_seed(p));
  // saturated sites, |x| close to g/2, for large g
  const double C = c_tilde(p.J1);
  seeds.emplace_back(p.g * p.g * (C - 2.0 * B), -p.g * p.g * C);

  std::optional<SolverError> last;
  for (const Eigen::Vector2d& seed : seeds) {
    try {
      const Eigen::Vector2d v = fsp_newton(seed, p, opt);
      PhaseResult r = make_result(Phase::FSP, Vec3(v[0], v[1], v[1]), p);
      r.fsp_pair = v;
      return r;
    } catch (const SolverError& e) {
      last = e;
    }
  }
  if (last) throw *last;
  throw SolverError("no usable frustrated seed", 0.0, 0);
}

PhaseResult solve_ground_state(const ModelParams& p, const FspOptions& opt) {
  validate(p);
  if (p.g == 0.0) return normal_phase(p);
  const CriticalCouplings cc = critical_couplings(p);
  if (!(p.g > cc.g_c)) return normal_phase(p);

  const double B = b_tilde(p.J1, p.J2, p.g);
  const bool frustrated_possible = p.g > cc.g_c_plus;

  if (std::abs(B) < kCoexistenceTolerance) {
    PhaseResult nsp = solve_nsp(p);
    if (frustrated_possible) {
      FspOptions forced = opt;
      forced.allow_metastable = true;
      if (!forced.seed) {
        const PhaseResult probe = nsp.label == Phase::NSP ? nsp : normal_phase(p);
        // separable limit: |x1| = |x2| = |x3|
        const double m = probe.representative.x.cwiseAbs().maxCoeff();
        forced.seed = Eigen::Vector2d(-std::max(m, 1e-3 * p.g), std::max(m, 1e-3 * p.g));
      }
      PhaseResult fsp = solve_fsp(p, forced);
      PhaseResult& best = (nsp.label == Phase::NSP && nsp.energy <= fsp.energy) ? nsp : fsp;
      best.coexistence = true;
      // a tie merges both orbits (all sign patterns when the sites decouple)
      const double tie = 1e-12 * std::max(1.0, std::abs(best.energy));
      if (nsp.label == Phase::NSP && std::abs(nsp.energy - fsp.energy) <= tie) {
        std::vector<Vec3> xs;
        for (const auto* r : {&nsp, &fsp})
          for (const auto& m : r->all_minima) xs.push_back(m.x);
        std::sort(xs.begin(), xs.end(), lex_less);
        best.all_minima.clear();
        for (const Vec3& x : xs) best.all_minima.push_back(make_state(x, p));
        best.degeneracy = static_cast<int>(xs.size());
      }
      return best;
    }
    nsp.coexistence = true;
    return nsp;
  }

  if (B < 0.0) {
    PhaseResult nsp = solve_nsp(p);
    if (nsp.label == Phase::NSP || !frustrated_possible) return nsp;
    // Rounding right at the triple point: only the frustrated branch has left the origin.
    FspOptions forced = opt;
    forced.allow_metastable = true;
    if (!forced.seed) {
      const MeanFieldState a = asymptotic_fsp(p);
      forced.seed = Eigen::Vector2d(a.x[0], a.x[1]);
    }
    return solve_fsp(p, forced);
  }

  if (!frustrated_possible) return solve_nsp(p);
  return solve_fsp(p, opt);
}

double monotonic_function(double x, const ModelParams& p) {
  const double slope = (p.g * p.g + p.J2 - p.J1 * p.J2) / (1.0 - p.J1);
  return slope * x - x * inv_root(x, p.g);
}

double monotonic_function_slope(double x, const ModelParams& p) {
  const double slope = (p.g * p.g + p.J2 - p.J1 * p.J2) / (1.0 - p.J1);
  const double r = inv_root(x, p.g);
  return slope - r * r * r;
}

namespace {

// Root of f(x) = k on an open interval where f is monotone; the endpoint values
// may be infinite and are never evaluated.
double bisect_monotone(const ModelParams& p, double k, double lo, double hi, bool increasing) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = monotonic_function(mid, p) - k;
    if ((v < 0.0) == increasing) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RootStructure root_structure(const ModelParams& p, double k) {
  validate(p);
  if (!(p.g > 0.0)) throw DomainError("root structure requires g > 0");
  const double half = 0.5 * p.g;
  const double a = (p.g * p.g + p.J2 - p.J1 * p.J2) / (1.0 - p.J1);
  RootStructure rs;
  constexpr double inf = std::numeric_limits<double>::infinity();

  if (a <= 1.0) {
    rs.monotonic = true;
    rs.roots.push_back(bisect_monotone(p, k, -half, half, false));
    return rs;
  }

  rs.monotonic = false;
  const double xt = half * std::sqrt(1.0 - std::pow(a, -2.0 / 3.0));
  rs.turning_points = {-xt, xt};
  const double m = monotonic_function(xt, p);

  struct Piece {
    double lo, hi, v_lo, v_hi;
    bool increasing;
  };
  const std::array<Piece, 3> pieces{{{-half, -xt, inf, -m, false},
                                     {-xt, xt, -m, m, true},
                                     {xt, half, m, -inf, false}}};
  for (const Piece& pc : pieces) {
    const double vmin = std::min(pc.v_lo, pc.v_hi), vmax = std::max(pc.v_lo, pc.v_hi);
    if (k < vmin || k > vmax) continue;
    double root;
    if (k == pc.v_lo) root = pc.lo;
    else if (k == pc.v_hi) root = pc.hi;
    else root = bisect_monotone(p, k, pc.lo, pc.hi, pc.increasing);
    if (rs.roots.empty() || std::abs(root - rs.roots.back()) > 1e-14 * p.g)
      rs.roots.push_back(root);
  }
  return rs;
}

double atom_only_energy(const Vec3& alpha, const ModelParams& p) {
  require_domain(alpha, p.g);
  const double g2 = p.g * p.g;
  double e = 0.0;
  for (int n = 0; n < kSites; ++n) {
    const double an = alpha[n], am = alpha[(n + 1) % kSites];
    e += -an * an - 0.5 * std::sqrt(1.0 - 4.0 * an * an / g2) + 2.0 * p.J2 / g2 * an * am;
  }
  return e;
}

PhaseResult solve_atom_only(const ModelParams& p) {
  validate(p);
  if (p.J1 != 0.0) throw PreconditionError("atom-only solver requires J1 = 0");
  if (p.g == 0.0) return normal_phase(p);

  // Every stationary point has each alpha_n among the roots of f(alpha) = k
  // with the common value k = J2 (alpha_1 + alpha_2 + alpha_3). Enumerate the
  // three site patterns (all equal, two equal, all distinct) and keep the lowest.
  std::vector<Vec3> candidates{Vec3::Zero()};
  const double half = 0.5 * p.g;

  // all equal: f(c) - 3 J2 c = 0 with c > 0
  {
    auto h = [&](double c) { return monotonic_function(c, p) - 3.0 * p.J2 * c; };
    // c = (g/2) tanh(u) resolves roots right up against the domain edge
    constexpr int samples = 4000;
    constexpr double u_max = 17.0;
    double prev_c = 0.0, prev_h = std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i <= samples; ++i) {
      const double c = half * std::tanh(u_max * i / samples);
      const double hc = h(c);
      if (i > 1 && (hc > 0.0) != (prev_h > 0.0)) {
        double lo = prev_c, hi = c;
        const bool lo_pos = prev_h > 0.0;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          ((h(mid) > 0.0) == lo_pos ? lo : hi) = mid;
        }
        const double root = 0.5 * (lo + hi);
        candidates.push_back(Vec3::Constant(root));
        candidates.push_back(Vec3::Constant(-root));
      }
      prev_c = c;
      prev_h = hc;
    }
  }

  const double a = p.g * p.g + p.J2;  // slope of f at the origin plus one
  if (a > 1.0) {
    const double xt = half * std::sqrt(1.0 - std::pow(a, -2.0 / 3.0));
    const double m = monotonic_function(xt, p);
    auto roots_at = [&](double k) { return root_structure(p, k).roots; };

    // mismatch(k) for a chosen root assignment; NaN when fewer than three roots exist
    using Pick = std::array<int, 3>;
    const std::vector<Pick> picks{{0, 1, 1}, {0, 2, 2}, {1, 0, 0}, {1, 2, 2},
                                  {2, 0, 0}, {2, 1, 1}, {0, 1, 2}};
    auto mismatch = [&](double k, const Pick& pick, Vec3* out) {
      const auto r = roots_at(k);
      if (r.size() != 3) return std::numeric_limits<double>::quiet_NaN();
      const Vec3 v(r[pick[0]], r[pick[1]], r[pick[2]]);
      if (out) *out = v;
      return p.J2 * v.sum() - k;
    };

    constexpr int samples = 2000;
    for (const Pick& pick : picks) {
      double prev_k = 0.0, prev_h = std::numeric_limits<double>::quiet_NaN();
      // Chebyshev spacing in k: the window ends, where two roots merge, are sampled densely
      for (int i = 0; i <= samples; ++i) {
        const double k = -m * (1.0 - 1e-14) * std::cos(kPi * i / samples);
        const double hk = mismatch(k, pick, nullptr);
        if (std::isfinite(hk) && std::isfinite(prev_h) && (hk > 0.0) != (prev_h > 0.0)) {
          double lo = prev_k, hi = k;
          const bool lo_pos = prev_h > 0.0;
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            ((mismatch(mid, pick, nullptr) > 0.0) == lo_pos ? lo : hi) = mid;
          }
          Vec3 v;
          mismatch(0.5 * (lo + hi), pick, &v);
          candidates.push_back(v);
        }
        prev_k = k;
        prev_h = hk;
      }
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& c : candidates) best = std::min(best, atom_only_energy(c, p));

  // collect every site placement of the lowest candidates
  std::vector<Vec3> minima;
  const double energy_tol = 1e-12;
  for (const Vec3& c : candidates) {
    if (atom_only_energy(c, p) > best + energy_tol) continue;
    for (const Vec3& y : symmetry_orbit(c)) {
      const bool seen = std::any_of(minima.begin(), minima.end(), [&](const Vec3& o) {
        return (o - y).cwiseAbs().maxCoeff() < 1e-9;
      });
      if (!seen) minima.push_back(y);
    }
  }
  std::sort(minima.begin(), minima.end(), lex_less);

  PhaseResult r;
  r.energy = best;
  // a uniform minimum wins a tie, as in solve_ground_state
  auto pattern = [](const Vec3& v) {
    if (v.cwiseAbs().maxCoeff() < 1e-12) return Phase::NP;
    return v.maxCoeff() - v.minCoeff() < 1e-9 ? Phase::NSP : Phase::FSP;
  };
  r.label = Phase::FSP;
  for (const Vec3& m : minima) {
    const Phase ph = pattern(m);
    if (ph == Phase::NP || (ph == Phase::NSP && r.label == Phase::FSP)) r.label = ph;
  }
  for (const Vec3& m : minima) r.all_minima.push_back(make_state(m, p));
  r.degeneracy = static_cast<int>(minima.size());
  for (std::size_t i = 0; i < minima.size(); ++i)
    if (pattern(minima[i]) == r.label) {
      r.representative = r.all_minima[i];
      break;
    }
  return r;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  if (n == 1) return {lo};
  const double ratio = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out.push_back(lo * std::exp(ratio * i));
  return out;
}

PowerLawFit power_law_fit(const std::vector<double>& deltas, const std::vector<double>& values) {
  if (deltas.size() != values.size() || deltas.size() < 2)
    throw std::invalid_argument("power-law fit needs at least two matched samples");
  const std::size_t n = deltas.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(deltas[i] > 0.0) || !(values[i] > 0.0))
      throw DomainError("power-law fit needs strictly positive samples");
    lx[i] = std::log(deltas[i]);
    ly[i] = std::log(values[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.deltas = deltas;
  fit.values = values;
  return fit;
}

PowerLawFit fit_order_parameter(const ModelParams& p, OnsetBranch branch, int points) {
  validate(p);
  const CriticalCouplings cc = critical_couplings(p);
  double gc = cc.g_c;
  if (branch == OnsetBranch::Plus) gc = cc.g_c_plus;
  if (branch == OnsetBranch::Minus) gc = cc.g_c_minus;
  if (gc > cc.g_c) throw PreconditionError("requested onset is not where the normal phase ends");
  constexpr double lo = 1e-6, hi = 1e-3;
  if (auto gL = first_order_point(p); gL && *gL > gc && *gL <= gc + hi)
    throw PreconditionError("fit window crosses the first-order point");

  const std::vector<double> deltas = geometric_grid(lo, hi, points);
  std::vector<double> amplitude;
  for (double d : deltas) {
    const PhaseResult r = solve_ground_state(with_g(p, gc + d));
    amplitude.push_back(r.representative.alpha.cwiseAbs().maxCoeff());
  }
  return power_law_fit(deltas, amplitude);
}

}  // namespace dtrimer
