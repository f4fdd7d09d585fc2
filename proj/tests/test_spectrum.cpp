#include "doctest.h"
#include "dtrimer/errors.hpp"
#include "dtrimer/meanfield.hpp"
#include "dtrimer/spectrum.hpp"

#include <cmath>
#include <random>

using namespace dtrimer;
using doctest::Approx;

TEST_CASE("decoupled oscillators") {
  const auto p = make_params(0.0, 0.0, 0.0, 1.0, 1.7);
  const QuadraticForm f = build_quadratic(MeanFieldState{}, p);
  CHECK((f.M - Mat12(f.M.diagonal().asDiagonal())).norm() == 0.0);
  for (int i = 0; i < 6; ++i) CHECK(f.M(i, i) == Approx(1.0));
  for (int i = 6; i < 12; ++i) CHECK(f.M(i, i) == Approx(1.7));
  const SpectrumResult s = symplectic_eigenvalues(f);
  for (int k = 0; k < 3; ++k) CHECK(s.energies[k] == Approx(1.0));
  for (int k = 3; k < 6; ++k) CHECK(s.energies[k] == Approx(1.7));

  const SpectrumResult a = analytic_np_spectrum(make_params(0.0, 0.0, 0.0));
  for (double e : a.energies) CHECK(e == Approx(1.0));
}

TEST_CASE("symplectic form") {
  const Mat12 J = symplectic_form();
  CHECK((J + J.transpose()).norm() == 0.0);
  CHECK((J * J + Mat12::Identity()).norm() == 0.0);
}

TEST_CASE("normal-phase spectrum: numeric vs analytic, omega != Omega too") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uj(-0.45, 0.45), uw(0.5, 2.0), uf(0.0, 0.99);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double J1 = uj(rng), J2 = uj(rng), w = uw(rng), W = uw(rng);
    const double gc = critical_couplings(make_params(0, J1, J2, w, W)).g_c;
    const auto p = make_params(uf(rng) * gc, J1, J2, w, W);
    const auto n = symplectic_eigenvalues(build_quadratic(MeanFieldState{}, p));
    const auto a = analytic_np_spectrum(p);
    for (int k = 0; k < 6; ++k) worst = std::max(worst, std::abs(n.energies[k] - a.energies[k]));
    for (int k = 1; k < 6; ++k) CHECK(a.energies[k - 1] <= a.energies[k]);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("finite-momentum branches are degenerate in the normal phase") {
  const auto a = analytic_np_spectrum(make_params(0.7, 0.2, -0.1));
  REQUIRE(a.labels.has_value());
  for (int k = 0; k < 6; ++k) {
    const auto lk = (*a.labels)[k];
    if (lk.momentum == 0) continue;
    int partners = 0;
    for (int m = 0; m < 6; ++m) {
      const auto lm = (*a.labels)[m];
      if (lm.momentum == -lk.momentum && lm.branch == lk.branch) {
        ++partners;
        CHECK(a.energies[m] == Approx(a.energies[k]).epsilon(1e-14));
      }
    }
    CHECK(partners == 1);
  }
}

TEST_CASE("gap closes at the critical coupling") {
  for (auto [J1, J2] : {std::pair{0.1, 0.1}, {-0.1, -0.1}, {0.1, -0.1}, {-0.2, 0.3}}) {
    const auto cc = critical_couplings(make_params(0, J1, J2));
    const auto p = make_params(cc.g_c, J1, J2);
    const auto a = analytic_np_spectrum(p);
    CHECK(a.soft_mode_gap < 1e-6);
    const auto n = symplectic_eigenvalues(build_quadratic(MeanFieldState{}, p));
    CHECK(n.soft_mode_gap < 1e-6);
    CHECK(std::abs(numeric_critical_coupling(p) - cc.g_c) < 1e-6);
    CHECK_THROWS_AS(analytic_np_spectrum(make_params(cc.g_c * 1.01, J1, J2)), UnstableBackground);
  }
}

TEST_CASE("label of the soft mode") {
  const auto a = analytic_np_spectrum(make_params(0.5, 0.1, 0.1));  // finite-momentum onset
  REQUIRE(a.labels.has_value());
  CHECK((*a.labels)[0].momentum != 0);
  CHECK((*a.labels)[0].branch == -1);
  const auto b = analytic_np_spectrum(make_params(0.5, -0.1, -0.1));
  CHECK((*b.labels)[0].momentum == 0);
}

TEST_CASE("non-stationary background is rejected") {
  const auto p = make_params(1.1, 0.1, 0.1);
  CHECK_THROWS_AS(build_quadratic(make_state(Vec3(0.1, 0.05, -0.02), p), p), PreconditionError);
}

TEST_CASE("superradiant spectra are stable and orbit invariant") {
  const auto p = make_params(1.1, 0.1, 0.1);
  const PhaseResult r = solve_ground_state(p);
  const QuadraticForm f = build_quadratic(r.representative, p);
  CHECK(f.M.isApprox(f.M.transpose()));
  const Vec3 atom(f.M(6, 6), f.M(7, 7), f.M(8, 8));
  // two sites share a value, the third differs
  const double d01 = std::abs(atom[0] - atom[1]), d02 = std::abs(atom[0] - atom[2]), d12 = std::abs(atom[1] - atom[2]);
  CHECK(std::min({d01, d02, d12}) < 1e-12);
  CHECK(std::max({d01, d02, d12}) > 1e-3);
  const SpectrumResult s = symplectic_eigenvalues(f);
  for (double e : s.energies) CHECK(e > 0.0);
  // every member of the degenerate orbit has the same spectrum
  for (const auto& m : r.all_minima) {
    const SpectrumResult o = symplectic_eigenvalues(build_quadratic(m, p));
    for (int k = 0; k < 6; ++k) CHECK(o.energies[k] == Approx(s.energies[k]).epsilon(1e-10));
  }

  for (auto [g, J1, J2] : {std::tuple{1.0, -0.1, -0.1}, {1.3, 0.1, -0.1}, {1.5, -0.2, 0.3}, {0.6, 0.2, 0.2}}) {
    const auto q = make_params(g, J1, J2);
    const auto sp = ground_state_spectrum(q, solve_ground_state(q));
    for (double e : sp.energies) CHECK(e > 0.0);
  }
}

TEST_CASE("wrong background is unstable") {
  // the normal state above onset is a saddle
  const auto p = make_params(1.2, 0.1, 0.1);
  CHECK_THROWS_AS(symplectic_eigenvalues(build_quadratic(MeanFieldState{}, p)), UnstableBackground);
}

TEST_CASE("critical exponents") {
  CHECK(fit_critical_exponent(make_params(1, 0.1, 0.1), Side::Above).exponent == Approx(1.0).epsilon(0.05));
  CHECK(fit_critical_exponent(make_params(1, -0.1, -0.1), Side::Above).exponent == Approx(0.5).epsilon(0.04));
  for (auto [J1, J2] : {std::pair{0.1, 0.1}, {-0.1, -0.1}, {0.1, -0.1}})
    CHECK(fit_critical_exponent(make_params(1, J1, J2), Side::Below).exponent == Approx(0.5).epsilon(0.04));
}

TEST_CASE("fit window may not cross the first-order point") {
  const double J2 = -0.1, J1 = dividing_curve(J2) - 1e-5;
  CHECK_THROWS_AS(fit_critical_exponent(make_params(1, J1, J2), Side::Above), PreconditionError);
}
