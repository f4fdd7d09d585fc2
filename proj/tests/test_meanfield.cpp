#include "doctest.h"
#include "dtrimer/errors.hpp"
#include "dtrimer/meanfield.hpp"
#include "dtrimer/oracle.hpp"

#include <cmath>
#include <random>

using namespace dtrimer;
using doctest::Approx;

namespace {

Vec3 random_interior(std::mt19937_64& rng, double g, double frac = 0.95) {
  std::uniform_real_distribution<double> u(-frac * g / 2, frac * g / 2);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("energy values and symmetries") {
  std::mt19937_64 rng(1);
  for (double J1 : {-0.3, 0.0, 0.2})
    for (double J2 : {-0.2, 0.0, 0.4}) CHECK(energy(Vec3::Zero(), make_params(0.8, J1, J2)) == Approx(-1.5));

  // zero hopping: uniform closed form equals three independent Dicke ground states.
  const auto p0 = make_params(1.2, 0.0, 0.0);
  const PhaseResult nsp = solve_nsp(p0);
  CHECK(nsp.energy == Approx(3.0 * -(1.2 * 1.2 + 1.0 / (1.2 * 1.2)) / 4.0).epsilon(1e-13));

  const auto p = make_params(1.3, 0.2, -0.1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_interior(rng, p.g);
    const double e = energy(x, p);
    CHECK(energy(Vec3(x[1], x[2], x[0]), p) == Approx(e).epsilon(1e-14));
    CHECK(energy(-x, p) == Approx(e).epsilon(1e-14));
  }
  CHECK_THROWS_AS(energy(Vec3(0.65, 0, 0), p), DomainError);
  CHECK_THROWS_AS(gradient(Vec3(0, -0.7, 0), p), DomainError);
}

TEST_CASE("gradient and hessian against finite differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uj(-0.45, 0.45), ug(0.2, 2.0);
  CHECK(gradient(Vec3::Zero(), make_params(1.0, 0.1, 0.1)).norm() == 0.0);
  double worst_g = 0.0, worst_h = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const auto p = make_params(ug(rng), uj(rng), uj(rng));
    const Vec3 x = random_interior(rng, p.g);
    const Vec3 grad = gradient(x, p);
    const Mat3 H = hessian(x, p);
    for (int n = 0; n < 3; ++n) {
      Vec3 a = x, b = x;
      a[n] += h;
      b[n] -= h;
      worst_g = std::max(worst_g, std::abs((energy(a, p) - energy(b, p)) / (2 * h) - grad[n]));
      const Vec3 col = (gradient(a, p) - gradient(b, p)) / (2 * h);
      worst_h = std::max(worst_h, (col - H.col(n)).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst_g < 1e-6);
  CHECK(worst_h < 1e-5);
}

TEST_CASE("un-eliminated functional agrees with the reduced one at solved states") {
  for (auto [g, J1, J2] : {std::tuple{1.1, 0.1, 0.1}, {1.0, -0.1, -0.1}, {1.2, 0.2, -0.3}}) {
    const auto p = make_params(g, J1, J2);
    const PhaseResult r = solve_ground_state(p);
    CHECK(energy_full(r.representative, p) == Approx(r.energy).epsilon(1e-12));
    CHECK(d_energy_d_alpha(r.representative, p).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(d_energy_d_theta(r.representative, p).cwiseAbs().maxCoeff() < 1e-9);
    const auto& s = r.representative;
    CHECK((x_from_alpha(s.alpha, p) - s.x).cwiseAbs().maxCoeff() < 1e-12);
    for (int n = 0; n < 3; ++n) {
      CHECK(std::cos(s.theta[n]) <= 0.0);
      CHECK(std::sin(s.theta[n]) * std::cos(s.phi[n]) == Approx(-2.0 * s.x[n] / g).epsilon(1e-12));
      CHECK(std::cos(s.theta[n]) == Approx(-std::sqrt(1 - 4 * s.x[n] * s.x[n] / (g * g))).epsilon(1e-12));
    }
  }
}

TEST_CASE("solve_nsp") {
  CHECK(solve_nsp(make_params(1.0, 0.0, 0.0)).label == Phase::NP);
  const PhaseResult r = solve_nsp(make_params(1.2, 0.0, 0.0));
  CHECK(r.label == Phase::NSP);
  CHECK(r.degeneracy == 2);
  CHECK(std::abs(r.representative.alpha[0]) == Approx(0.6 * std::sqrt(1 - 1 / std::pow(1.2, 4))).epsilon(1e-13));
  CHECK(std::abs(r.representative.alpha[0]) == Approx(0.43173).epsilon(1e-5));

  const auto p = make_params(1.0, -0.1, -0.1);
  const PhaseResult n = solve_nsp(p);
  CHECK(n.label == Phase::NSP);
  CHECK(n.representative.alpha[0] == Approx(n.representative.alpha[1]));
  CHECK(n.representative.alpha[1] == Approx(n.representative.alpha[2]));
  CHECK(gradient(n.representative.x, p).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(energy(n.representative.x, p) == Approx(n.energy).epsilon(1e-14));
  const PhaseResult o = brute_force_minimize(p);
  CHECK(o.degeneracy == 2);
  CHECK(std::abs(std::abs(o.representative.alpha[0]) - std::abs(n.representative.alpha[0])) < 1e-8);
}

TEST_CASE("solve_fsp near onset") {
  const double d = 1e-4;
  const auto p = make_params(0.9 + d, 0.1, 0.1);
  const PhaseResult r = solve_fsp(p);
  CHECK(r.label == Phase::FSP);
  CHECK(r.degeneracy == 6);
  const auto pair = *r.fsp_pair;
  CHECK(pair[0] < 0.0);
  CHECK(pair[1] > 0.0);
  CHECK(pair[0] / pair[1] == Approx(-2.0).epsilon(0.01));
  const double predicted = 2.0 / std::sqrt(3.0) * std::sqrt((1 - 0.1) * 0.9) * std::sqrt(d);
  CHECK(std::abs(pair[0]) == Approx(predicted).epsilon(0.02));
  CHECK(fsp_residual(pair[0], pair[1], p).cwiseAbs().maxCoeff() < 1e-12);

  const MeanFieldState a = asymptotic_fsp(p);
  CHECK(a.x[0] == Approx(pair[0]).epsilon(0.02));
  const Vec3 alpha = alpha_from_x(Vec3(pair[0], pair[1], pair[1]), p);
  CHECK(alpha[1] / alpha[0] == Approx(-0.5).epsilon(0.01));
}

TEST_CASE("solve_fsp preconditions and far-from-onset behaviour") {
  CHECK_THROWS_AS(solve_fsp(make_params(0.85, 0.1, 0.1)), PreconditionError);
  CHECK_THROWS_AS(solve_fsp(make_params(1.0, 0.1, -0.1)), PreconditionError);  // B~ < 0
  for (double g : {1.0, 2.0, 5.0, 20.0}) {
    const auto p = make_params(g, 0.1, 0.1);
    const PhaseResult r = solve_fsp(p);
    CHECK(gradient(r.representative.x, p).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, g));
    CHECK(r.representative.x.cwiseAbs().maxCoeff() < g / 2);
  }
}

TEST_CASE("ground-state dispatch") {
  CHECK(solve_ground_state(make_params(1.0, 0.1, -0.1)).label == Phase::NSP);
  CHECK(solve_ground_state(make_params(1.1, 0.1, -0.1)).label == Phase::FSP);
  CHECK(b_tilde(0.1, -0.1, 1.1) == Approx(0.00995).epsilon(1e-3));
  const PhaseResult np = solve_ground_state(make_params(0.5, 0.2, 0.2));
  CHECK(np.label == Phase::NP);
  CHECK(np.representative.x.norm() == 0.0);
  CHECK(np.degeneracy == 1);
  CHECK(solve_ground_state(make_params(0.0, 0.2, 0.2)).label == Phase::NP);

  // exactly at the first-order point both branches are computed.
  const double gL = *first_order_point(0.1, -0.1);
  const PhaseResult c = solve_ground_state(make_params(gL, 0.1, -0.1));
  CHECK(c.coexistence);

  // zero hopping: three independent sites, every sign pattern is a ground state
  const PhaseResult z = solve_ground_state(make_params(1.3, 0.0, 0.0));
  CHECK(z.coexistence);
  CHECK(z.degeneracy == 8);
  CHECK(z.label == Phase::NSP);
  for (const auto& m : z.all_minima) CHECK(energy(m.x, make_params(1.3, 0, 0)) == Approx(z.energy).epsilon(1e-13));
  CHECK(brute_force_minimize(make_params(1.3, 0.0, 0.0)).degeneracy == 8);
}

TEST_CASE("stationarity and energy equality of all reported minima") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uj(-0.45, 0.45), ug(0.2, 3.0);
  for (int i = 0; i < 200; ++i) {
    const auto p = make_params(ug(rng), uj(rng), uj(rng));
    const PhaseResult r = solve_ground_state(p);
    const int expected = r.label == Phase::FSP ? 6 : r.label == Phase::NSP ? 2 : 1;
    CHECK(r.degeneracy == expected);
    REQUIRE(static_cast<int>(r.all_minima.size()) == expected);
    for (const auto& m : r.all_minima) {
      CHECK(gradient(m.x, p).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, p.g));
      CHECK(std::abs(energy(m.x, p) - r.energy) < 1e-12);
    }
  }
}

TEST_CASE("symmetry orbit") {
  CHECK(symmetry_orbit(Vec3(-0.4, 0.2, 0.2)).size() == 6);
  CHECK(symmetry_orbit(Vec3(0.3, 0.3, 0.3)).size() == 2);
  CHECK(symmetry_orbit(Vec3::Zero()).size() == 1);
  const auto p = make_params(1.3, 0.1, 0.1);
  const PhaseResult r = solve_fsp(p);
  for (const auto& m : r.all_minima) CHECK(std::abs(energy(m.x, p) - r.energy) < 1e-12);
  // Canonical representative is the lexicographically smallest element.
  for (const auto& m : r.all_minima) {
    const Vec3 a = r.representative.x, b = m.x;
    CHECK(!std::lexicographical_compare(b.data(), b.data() + 3, a.data(), a.data() + 3));
  }
}

TEST_CASE("Cauchy-Schwarz bound") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uj(-0.45, 0.45), ug(0.2, 2.0);
  int used = 0;
  while (used < 5) {
    const auto p = make_params(ug(rng), uj(rng), uj(rng));
    if (b_tilde(p.J1, p.J2, p.g) >= 0) continue;
    ++used;
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x = random_interior(rng, p.g, 0.999);
      CHECK(energy(x, p) - cauchy_schwarz_bound(x, p) >= -1e-12);
      const Vec3 u = Vec3::Constant(x[0]);
      CHECK(std::abs(energy(u, p) - cauchy_schwarz_bound(u, p)) < 1e-12);
    }
  }
}

TEST_CASE("monotonic method") {
  const auto below = make_params(0.85, 0.1, 0.1);  // g_c+ = 0.9
  auto rs = root_structure(below, 0.0);
  CHECK(rs.monotonic);
  REQUIRE(rs.roots.size() == 1);
  CHECK(std::abs(rs.roots[0]) < 1e-12);

  const auto above = make_params(1.0, 0.1, 0.1);
  rs = root_structure(above, 0.0);
  CHECK_FALSE(rs.monotonic);
  REQUIRE(rs.roots.size() == 3);
  CHECK(rs.roots[0] == Approx(-rs.roots[2]));
  CHECK(std::abs(rs.roots[1]) < 1e-12);
  for (double r : rs.roots) CHECK(std::abs(monotonic_function(r, above)) < 1e-10);

  // f'(0) changes sign at g_c+: bisection on the slope.
  double lo = 0.5, hi = 1.5;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (monotonic_function_slope(0.0, make_params(mid, 0.1, 0.1)) < 0 ? lo : hi) = mid;
  }
  CHECK(std::abs(lo - 0.9) < 1e-8);
  CHECK(root_structure(make_params(0.9 - 1e-7, 0.1, 0.1), 0.0).monotonic);
  CHECK_FALSE(root_structure(make_params(0.9 + 1e-7, 0.1, 0.1), 0.0).monotonic);
}

TEST_CASE("atom-only solver") {
  CHECK_THROWS_AS(solve_atom_only(make_params(1.0, 0.1, 0.1)), PreconditionError);
  CHECK(solve_atom_only(make_params(1.2, 0.0, 0.2)).label == Phase::FSP);
  CHECK(solve_atom_only(make_params(1.2, 0.0, -0.2)).label == Phase::NSP);
  const auto p = make_params(1.0, 0.0, 0.1);
  CHECK(solve_atom_only(p).label == solve_ground_state(p).label);
  const auto z = make_params(1.2, 0.0, 0.0);
  const PhaseResult a = solve_atom_only(z);
  CHECK(std::abs(a.representative.alpha[0]) == Approx(0.6 * std::sqrt(1 - 1 / std::pow(1.2, 4))).epsilon(1e-10));
  CHECK(solve_atom_only(make_params(0.99, 0.0, 0.0)).label == Phase::NP);

  for (double J2 : {-0.4, -0.3, -0.1, 0.0, 0.1, 0.3, 0.4})
    for (double g : {0.5, 0.8, 0.9, 1.3, 2.0, 8.0, 30.0}) {
      const auto q = make_params(g, 0.0, J2);
      const PhaseResult x = solve_atom_only(q), y = solve_ground_state(q);
      CHECK(x.label == y.label);
      CHECK(x.degeneracy == y.degeneracy);
      CHECK(x.energy == Approx(y.energy).epsilon(1e-12));
      CHECK(atom_only_energy(x.representative.alpha, q) == Approx(y.energy).epsilon(1e-12));
    }
}

TEST_CASE("order-parameter exponent") {
  CHECK(fit_order_parameter(make_params(1.0, -0.1, -0.1)).exponent == Approx(0.5).epsilon(0.04));
  CHECK(fit_order_parameter(make_params(1.0, 0.1, 0.1)).exponent == Approx(0.5).epsilon(0.04));
  const auto grid = geometric_grid(1e-6, 1e-3, 4);
  CHECK(grid.front() == Approx(1e-6));
  CHECK(grid.back() == Approx(1e-3));
  CHECK(grid[1] / grid[0] == Approx(10.0));
  const PowerLawFit f = power_law_fit({1, 2, 4}, {3, 12, 48});
  CHECK(f.exponent == Approx(2.0));
  CHECK(f.prefactor == Approx(3.0));
  CHECK(f.r_squared == Approx(1.0));
}

TEST_CASE("energy continuity and the branch crossing at g_L") {
  const double J1 = 0.1, J2 = -0.1, gL = *first_order_point(J1, J2);
  const double gc = critical_couplings(make_params(0, J1, J2)).g_c;
  for (double gs : {gc, gL}) {
    const double a = solve_ground_state(make_params(gs - 1e-7, J1, J2)).energy;
    const double b = solve_ground_state(make_params(gs + 1e-7, J1, J2)).energy;
    CHECK(std::abs(a - b) < 1e-6);
  }
  // The FSP and NSP branch energies cross near g_L.
  FspOptions opt;
  opt.allow_metastable = true;
  auto diff = [&](double g) {
    const auto p = make_params(g, J1, J2);
    return solve_fsp(p, opt).energy - solve_nsp(p).energy;
  };
  double lo = 1.0, hi = 1.1;
  REQUIRE(diff(lo) > 0);
  REQUIRE(diff(hi) < 0);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (diff(mid) > 0 ? lo : hi) = mid;
  }
  CHECK(std::abs(lo - gL) < 1e-4);
}
