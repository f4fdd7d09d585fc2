#include "dtrimer/acceptance.hpp"

#include "dtrimer/errors.hpp"
#include "dtrimer/meanfield.hpp"
#include "dtrimer/oracle.hpp"
#include "dtrimer/spectrum.hpp"
#include "dtrimer/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace dtrimer {

namespace {

// Pinned tolerances.
constexpr double kTolCritical = 1e-6;        // C1
constexpr double kTolHalfExponent = 0.02;    // C2, C3 (NSP side)
constexpr double kTolLinearExponent = 0.05;  // C3 (FSP side)
constexpr double kTolTransition = 1e-4;      // C4, X-transitions
constexpr double kTolDegenerate = 1e-10;     // C5
constexpr double kTolRatio = 0.01;           // C6 (relative)
constexpr double kTolBound = 1e-12;          // C8
constexpr double kTolSpectrum = 1e-10;       // C9
constexpr double kTolGradient = 1e-6;        // C10
constexpr double kFdStep = 1e-6;             // C10
constexpr double kTolTriple = 1e-3;          // C11
constexpr double kTolBoundary = 1e-3;        // C11
constexpr double kTolAtomOnly = 1e-8;        // C12
constexpr double kTolIdentity = 1e-12;       // X-identities
constexpr double kTolOracleEnergy = 1e-9;    // X-oracle

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool passed;
  std::string detail;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<Phase> distinct_sequence(const std::vector<Phase>& labels) {
  std::vector<Phase> out;
  for (Phase p : labels)
    if (out.empty() || out.back() != p) out.push_back(p);
  return out;
}

// Random (J1, J2, g) whose ground state has the wanted label, clear of both transitions.
ModelParams sample_phase_point(std::mt19937_64& rng, Phase want) {
  for (;;) {
    const double J1 = uniform(rng, -0.4, 0.4), J2 = uniform(rng, -0.4, 0.4);
    const double g = uniform(rng, 0.3, 1.8);
    const ModelParams p = make_params(g, J1, J2);
    if (g - critical_couplings(p).g_c < 0.02) continue;
    if (std::abs(b_tilde(J1, J2, g)) < 1e-3) continue;
    if (solve_ground_state(p).label == want) return p;
  }
}

Outcome c1_critical(const AcceptanceOptions& o) {
  std::mt19937_64 rng(o.seed + 1);
  double worst = 0.0;
  int count = 0;
  for (int r = 1; r <= 6; ++r) {
    for (int i = 0; i < 50; ++i) {
      const auto [J1, J2] = sample_region(rng, r);
      const ModelParams p = make_params(0.0, J1, J2);
      worst = std::max(worst, std::abs(numeric_critical_coupling(p) - critical_couplings(p).g_c));
      ++count;
    }
  }
  return {worst <= kTolCritical, fmt("max |g_num - g_c| = %.2e over %d points (tol %.0e)", worst, count, kTolCritical)};
}

Outcome c2_order_exponent(const AcceptanceOptions&) {
  struct Case {
    const char* name;
    double J1, J2;
  };
  const Case cases[] = {{"NSP(-0.1,-0.1)", -0.1, -0.1},
                        {"NSP(0.1,-0.1)", 0.1, -0.1},
                        {"FSP(0.1,0.1)", 0.1, 0.1},
                        {"FSP(-0.2,0.3)", -0.2, 0.3}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const PowerLawFit f = fit_order_parameter(make_params(1.0, c.J1, c.J2));
    ok = ok && std::abs(f.exponent - 0.5) <= kTolHalfExponent;
    detail += fmt("%s %.5f; ", c.name, f.exponent);
  }
  return {ok, detail + fmt("tol 0.5 +- %.2f", kTolHalfExponent)};
}

Outcome c3_gap_exponent(const AcceptanceOptions&) {
  const PowerLawFit fsp = fit_critical_exponent(make_params(1.0, 0.1, 0.1), Side::Above);
  const PowerLawFit nsp = fit_critical_exponent(make_params(1.0, -0.1, -0.1), Side::Above);
  const bool ok = std::abs(fsp.exponent - 1.0) <= kTolLinearExponent &&
                  std::abs(nsp.exponent - 0.5) <= kTolHalfExponent;
  return {ok, fmt("FSP gamma %.5f (tol 1 +- %.2f), NSP %.5f (tol 0.5 +- %.2f)", fsp.exponent,
                  kTolLinearExponent, nsp.exponent, kTolHalfExponent)};
}

Outcome c4_first_order(const AcceptanceOptions& o) {
  OracleConfig cfg;
  cfg.workers = o.workers;
  const ModelParams base = make_params(1.0, 0.1, -0.1);
  const auto ts = detect_transitions(base, 0.9, 1.2, cfg);
  const double gL = std::sqrt(1.08), gc = std::sqrt(0.96);
  int firsts = 0, seconds = 0, inconclusive = 0;
  double d_first = INFINITY, d_second = INFINITY;
  std::vector<Phase> seq;
  for (const auto& t : ts) {
    if (t.inconclusive) {
      ++inconclusive;
      continue;
    }
    if (seq.empty()) seq.push_back(t.from);
    seq.push_back(t.to);
    if (t.order == TransitionOrder::First) ++firsts, d_first = std::abs(t.g_star - gL);
    else ++seconds, d_second = std::abs(t.g_star - gc);
  }
  const auto records = sweep_g_line(base, 0.8, 1.2, 401);
  std::vector<Phase> labels;
  for (const auto& r : records) labels.push_back(r.phase);
  const std::vector<Phase> want{Phase::NP, Phase::NSP, Phase::FSP};
  const auto swept = distinct_sequence(labels);
  const bool ok = firsts == 1 && seconds == 1 && inconclusive == 0 && d_first <= kTolTransition &&
                  d_second <= kTolTransition && seq == want && swept == want;
  return {ok, fmt("first-order |dg| = %.2e, second-order |dg| = %.2e (tol %.0e); oracle %s, sweep %s",
                  d_first, d_second, kTolTransition, sequence_to_string(seq).c_str(),
                  sequence_to_string(swept).c_str())};
}

Outcome c5_degeneracy(const AcceptanceOptions& o) {
  std::mt19937_64 rng(o.seed + 5);
  OracleConfig cfg;
  cfg.workers = o.workers;
  int bad = 0;
  double spread = 0.0;
  std::string first_bad;
  for (Phase want : {Phase::FSP, Phase::NSP}) {
    const int expected = want == Phase::FSP ? 6 : 2;
    for (int i = 0; i < 20; ++i) {
      const ModelParams p = sample_phase_point(rng, want);
      const PhaseResult r = brute_force_minimize(p, cfg);
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& m : r.all_minima) {
        const double e = energy(m.x, p);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
      spread = std::max(spread, hi - lo);
      if (r.degeneracy != expected || static_cast<int>(r.all_minima.size()) != expected ||
          hi - lo > kTolDegenerate) {
        if (bad++ == 0)
          first_bad = fmt("; first failure g=%.6f J1=%.6f J2=%.6f count %d", p.g, p.J1, p.J2, r.degeneracy);
      }
    }
  }
  return {bad == 0, fmt("%d/40 points with the wrong count, max energy spread %.2e (tol %.0e)", bad, spread,
                        kTolDegenerate) + first_bad};
}

Outcome c6_ratios(const AcceptanceOptions&) {
  const ModelParams p = make_params(0.9 + 1e-4, 0.1, 0.1);
  const PhaseResult r = solve_fsp(p);
  const auto pair = *r.fsp_pair;
  const Vec3 x(pair[0], pair[1], pair[1]);
  const Vec3 a = alpha_from_x(x, p);
  const double rx = x[0] / x[1], ra = a[1] / a[0];
  const double ex = std::abs(rx / -2.0 - 1.0), ea = std::abs(ra / -0.5 - 1.0);
  return {ex <= kTolRatio && ea <= kTolRatio,
          fmt("x1/x2 = %.6f, alpha2/alpha1 = %.6f (relative tol %.0e)", rx, ra, kTolRatio)};
}

Outcome c7_sequences(const AcceptanceOptions&) {
  bool ok = true;
  std::string detail;
  for (const auto& s : region_samples()) {
    const auto got = scanned_sequence(s.J1, s.J2);
    const auto want = region_sequence(s.region);
    const bool match = got == want && classify_region(s.J1, s.J2).region == s.region;
    ok = ok && match;
    detail += fmt("%d:%s%s ", s.region, sequence_to_string(got).c_str(), match ? "" : "(MISMATCH)");
  }
  return {ok, detail};
}

Outcome c8_cauchy_schwarz(const AcceptanceOptions& o) {
  std::mt19937_64 rng(o.seed + 8);
  double worst = 0.0;
  int params_used = 0;
  while (params_used < 10) {
    const double J1 = uniform(rng, -0.45, 0.45), J2 = uniform(rng, -0.45, 0.45);
    const double g = uniform(rng, 0.2, 2.0);
    if (b_tilde(J1, J2, g) >= 0.0) continue;
    const ModelParams p = make_params(g, J1, J2);
    ++params_used;
    const double h = 0.5 * g * (1.0 - 1e-9);
    for (int i = 0; i < 100000; ++i) {
      const Vec3 x(uniform(rng, -h, h), uniform(rng, -h, h), uniform(rng, -h, h));
      worst = std::max(worst, cauchy_schwarz_bound(x, p) - energy(x, p));
    }
  }
  return {worst <= kTolBound, fmt("max (bound - E) = %.2e over 10 x 1e5 draws (tol %.0e)", worst, kTolBound)};
}

Outcome c9_spectrum(const AcceptanceOptions& o) {
  std::mt19937_64 rng(o.seed + 9);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double J1 = uniform(rng, -0.45, 0.45), J2 = uniform(rng, -0.45, 0.45);
    const double gc = critical_couplings(make_params(0.0, J1, J2)).g_c;
    const ModelParams p = make_params(uniform(rng, 0.0, 0.99 * gc), J1, J2);
    const auto numeric = symplectic_eigenvalues(build_quadratic(MeanFieldState{}, p));
    const auto analytic = analytic_np_spectrum(p);
    for (int k = 0; k < 6; ++k) worst = std::max(worst, std::abs(numeric.energies[k] - analytic.energies[k]));
  }
  return {worst <= kTolSpectrum, fmt("max |eps_num - eps_analytic| = %.2e over 100 points (tol %.0e)", worst,
                                     kTolSpectrum)};
}

Outcome c10_gradient(const AcceptanceOptions& o) {
  std::mt19937_64 rng(o.seed + 10);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ModelParams p =
        make_params(uniform(rng, 0.2, 2.0), uniform(rng, -0.45, 0.45), uniform(rng, -0.45, 0.45));
    const double h = 0.95 * 0.5 * p.g;
    const Vec3 x(uniform(rng, -h, h), uniform(rng, -h, h), uniform(rng, -h, h));
    const Vec3 grad = gradient(x, p);
    for (int n = 0; n < 3; ++n) {
      Vec3 xp = x, xm = x;
      xp[n] += kFdStep;
      xm[n] -= kFdStep;
      const double fd = (energy(xp, p) - energy(xm, p)) / (2.0 * kFdStep);
      worst = std::max(worst, std::abs(fd - grad[n]));
    }
  }
  return {worst <= kTolGradient, fmt("max |analytic - central difference| = %.2e over 100 points (tol %.0e)",
                                     worst, kTolGradient)};
}

Outcome c11_triple(const AcceptanceOptions& o) {
  const Axis ax{"J2", -0.4, 0.4, 201}, ay{"g", 0.7, 1.3, 201};
  const PhaseDiagramGrid grid = sweep_phase_diagram(ax, ay, make_params(1.0, 0.1, 0.0), o.workers);
  if (!grid.triple_point_numeric || !grid.triple_point_analytic) return {false, "triple point missing"};
  const auto& n = *grid.triple_point_numeric;
  const auto& a = *grid.triple_point_analytic;
  const double d = std::hypot(n[0] - a[0], n[1] - a[1]);
  const bool lines = grid.boundary(BoundaryKind::CriticalPlus) && grid.boundary(BoundaryKind::CriticalMinus) &&
                     grid.boundary(BoundaryKind::FirstOrder);
  const bool ok = lines && d <= kTolTriple && grid.max_boundary_deviation <= kTolBoundary && grid.failed_cells == 0;
  return {ok, fmt("numeric (J2=%.6f, g=%.6f) vs analytic (%.6f, %.6f): distance %.2e (tol %.0e); "
                  "max boundary deviation %.2e; failed cells %d",
                  n[0], n[1], a[0], a[1], d, kTolTriple, grid.max_boundary_deviation, grid.failed_cells)};
}

Outcome c12_atom_only(const AcceptanceOptions&) {
  int bad = 0, count = 0;
  double worst = 0.0;
  for (int j = -4; j <= 4; ++j) {
    const double J2 = 0.1 * j;
    for (int i = 1; i <= 10; ++i) {
      const ModelParams p = make_params(0.2 * i, 0.0, J2);
      const PhaseResult a = solve_atom_only(p), b = solve_ground_state(p);
      Vec3 ma = a.representative.alpha.cwiseAbs(), mb = b.representative.alpha.cwiseAbs();
      std::sort(ma.data(), ma.data() + 3);
      std::sort(mb.data(), mb.data() + 3);
      const double d = (ma - mb).cwiseAbs().maxCoeff();
      worst = std::max(worst, d);
      if (a.label != b.label || a.degeneracy != b.degeneracy || d > kTolAtomOnly) ++bad;
      ++count;
    }
  }
  return {bad == 0, fmt("%d/%d grid points disagree, max ||alpha| difference| = %.2e (tol %.0e)", bad, count,
                        worst, kTolAtomOnly)};
}

Outcome x_identities(const AcceptanceOptions& o) {
  std::mt19937_64 rng(o.seed + 100);
  double worst_b = 0.0, worst_curve = 0.0;
  int existence_bad = 0, sign_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const double J1 = uniform(rng, -0.49, 0.49), J2 = uniform(rng, -0.49, 0.49);
    const auto gL = first_order_point(J1, J2);
    if (gL.has_value() != (J1 * J2 < 0.0)) ++existence_bad;
    if (gL) worst_b = std::max(worst_b, std::abs(b_tilde(J1, J2, *gL)));
    if (c_tilde(J1) >= 0.0) ++sign_bad;
    const double J1c = dividing_curve(J2);
    if (std::abs(J1c) < 0.5) {
      const ModelParams p = make_params(0.0, J1c, J2);
      const auto cc = critical_couplings(p);
      worst_curve = std::max(worst_curve, std::abs(cc.g_c_plus - cc.g_c_minus));
    }
  }
  int region_bad = 0;
  for (const auto& s : region_samples()) {
    const auto r = classify_region(s.J1, s.J2);
    if (r.region != s.region || r.expected_sequence != region_sequence(s.region)) ++region_bad;
  }
  const bool ok = worst_b <= kTolIdentity && worst_curve <= kTolIdentity && existence_bad == 0 && sign_bad == 0 &&
                  region_bad == 0;
  return {ok, fmt("max |B~(g_L)| = %.2e, max |g_c+ - g_c-| on curve = %.2e (tol %.0e); g_L existence "
                  "mismatches %d; C~ >= 0 cases %d; region mismatches %d",
                  worst_b, worst_curve, kTolIdentity, existence_bad, sign_bad, region_bad)};
}

Outcome x_oracle(const AcceptanceOptions& o) {
  std::mt19937_64 rng(o.seed + 101);
  OracleConfig cfg;
  cfg.workers = o.workers;
  int energy_bad = 0, degeneracy_bad = 0, count = 0;
  double worst = 0.0;
  for (int r = 1; r <= 6; ++r) {
    for (int i = 0; i < 50; ++i) {
      const auto [J1, J2] = sample_region(rng, r);
      const double g = uniform(rng, 0.2, 1.8);
      const ModelParams p = make_params(g, J1, J2);
      const auto gL = first_order_point(J1, J2);
      const double gc = critical_couplings(p).g_c;
      if (std::abs(g - gc) < 1e-3 || (gL && std::abs(g - *gL) < 1e-3)) {
        --i;
        continue;
      }
      const PhaseResult a = solve_ground_state(p), b = brute_force_minimize(p, cfg);
      const double d = std::abs(a.energy - b.energy);
      worst = std::max(worst, d);
      if (d > kTolOracleEnergy) ++energy_bad;
      const int expected = a.label == Phase::FSP ? 6 : a.label == Phase::NSP ? 2 : 1;
      if (b.degeneracy != expected || b.label != a.label) ++degeneracy_bad;
      ++count;
    }
  }
  return {energy_bad == 0 && degeneracy_bad == 0,
          fmt("%d points: max |E_solver - E_oracle| = %.2e (tol %.0e); energy failures %d, label/degeneracy "
              "failures %d",
              count, worst, kTolOracleEnergy, energy_bad, degeneracy_bad)};
}

Outcome x_transitions(const AcceptanceOptions& o) {
  OracleConfig cfg;
  cfg.workers = o.workers;
  bool ok = true;
  std::string detail;
  for (const auto& s : region_samples()) {
    const ModelParams p = make_params(1.0, s.J1, s.J2);
    const double gc = critical_couplings(p).g_c;
    const auto gL = first_order_point(s.J1, s.J2);
    const bool first_expected = gL && *gL > gc;
    const double hi = (first_expected ? *gL : gc) + 0.05;
    const auto ts = detect_transitions(p, gc - 0.05, hi, cfg);
    std::vector<double> got_first, got_second;
    bool any_inconclusive = false;
    for (const auto& t : ts) {
      if (t.inconclusive) any_inconclusive = true;
      else (t.order == TransitionOrder::First ? got_first : got_second).push_back(t.g_star);
    }
    double dev = 0.0;
    bool match = !any_inconclusive && got_second.size() == 1 && got_first.size() == (first_expected ? 1u : 0u);
    if (match) {
      dev = std::abs(got_second[0] - gc);
      if (first_expected) dev = std::max(dev, std::abs(got_first[0] - *gL));
      match = dev <= kTolTransition;
    }
    ok = ok && match;
    detail += fmt("%d:%s(%.1e) ", s.region, match ? "ok" : "FAIL", dev);
  }
  return {ok, detail + fmt("tol %.0e", kTolTransition)};
}

struct Entry {
  std::string id;
  std::string name;
  std::function<Outcome(const AcceptanceOptions&)> run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r{
      {"X-identities", "closed-form identities", x_identities},
      {"C1", "critical couplings from the soft-mode gap", c1_critical},
      {"C2", "order-parameter exponent 1/2", c2_order_exponent},
      {"C3", "soft-mode gap exponents", c3_gap_exponent},
      {"C4", "first- and second-order points on the three-phase line", c4_first_order},
      {"C5", "oracle degeneracy 6 / 2", c5_degeneracy},
      {"C6", "near-onset frustrated ratios", c6_ratios},
      {"C7", "region phase sequences", c7_sequences},
      {"C8", "Cauchy-Schwarz lower bound", c8_cauchy_schwarz},
      {"C9", "normal-phase spectrum, analytic vs symplectic", c9_spectrum},
      {"C10", "gradient against central differences", c10_gradient},
      {"C11", "triple point in the g-J2 plane", c11_triple},
      {"C12", "atom-only solver against the general solver", c12_atom_only},
      {"X-oracle", "oracle energy and degeneracy equivalence", x_oracle},
      {"X-transitions", "oracle transitions in all six regions", x_transitions},
  };
  return r;
}

}  // namespace

Scope scope_from_string(const std::string& name) {
  if (name == "formulas") return Scope::Formulas;
  if (name == "oracle") return Scope::Oracle;
  if (name == "spectrum") return Scope::Spectrum;
  if (name == "all") return Scope::All;
  throw ParameterError("scope", "unknown scope '" + name + "' (formulas, oracle, spectrum, all)");
}

std::vector<std::string> criteria_in_scope(Scope scope) {
  switch (scope) {
    case Scope::Formulas: return {"X-identities", "C2", "C6", "C7", "C8", "C10", "C11", "C12"};
    case Scope::Oracle: return {"C4", "C5", "X-oracle", "X-transitions"};
    case Scope::Spectrum: return {"C1", "C3", "C9"};
    case Scope::All: break;
  }
  std::vector<std::string> all;
  for (const auto& e : registry()) all.push_back(e.id);
  return all;
}

CriterionResult run_criterion(const std::string& id, const AcceptanceOptions& options) {
  for (const auto& e : registry()) {
    if (e.id != id) continue;
    CriterionResult out{e.id, e.name, false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome r = e.run(options);
      out.passed = r.passed;
      out.detail = r.detail;
    } catch (const std::exception& ex) {
      out.passed = false;
      out.detail = std::string("exception: ") + ex.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }
  throw ParameterError("criterion", "unknown criterion '" + id + "'");
}

std::vector<CriterionResult> run_acceptance(Scope scope, const AcceptanceOptions& options) {
  std::vector<CriterionResult> out;
  for (const auto& id : criteria_in_scope(scope)) out.push_back(run_criterion(id, options));
  return out;
}

std::string format_result(const CriterionResult& r) {
  return fmt("%s %-13s %s: %s (%.2f s)", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(),
             r.detail.c_str(), r.seconds);
}

const std::vector<RegionPoint>& region_samples() {
  static const std::vector<RegionPoint> s{
      {1, 0.3, -0.1}, {2, 0.1, 0.1}, {3, -0.2, 0.3}, {4, -0.3, 0.1}, {5, -0.1, -0.1}, {6, 0.1, -0.1}};
  return s;
}

std::array<double, 2> sample_region(std::mt19937_64& rng, int region) {
  if (region < 1 || region > 6) throw ParameterError("region", "must be 1..6");
  for (;;) {
    const double J1 = uniform(rng, -0.45, 0.45), J2 = uniform(rng, -0.45, 0.45);
    if (classify_region(J1, J2).region == region) return {J1, J2};
  }
}

}  // namespace dtrimer
