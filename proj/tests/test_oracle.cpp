#include "doctest.h"
#include "dtrimer/errors.hpp"
#include "dtrimer/meanfield.hpp"
#include "dtrimer/oracle.hpp"

#include <cmath>
#include <random>

using namespace dtrimer;
using doctest::Approx;

namespace {

// Every oracle minimum has a solver-orbit partner within tol.
bool matches_orbit(const PhaseResult& oracle, const PhaseResult& solver, double tol) {
  for (const auto& m : oracle.all_minima) {
    bool found = false;
    for (const auto& s : solver.all_minima) found = found || (m.x - s.x).cwiseAbs().maxCoeff() < tol;
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  OracleConfig c;
  CHECK_NOTHROW(validate(c));
  c.grid_points_per_axis = 0;
  CHECK_THROWS_AS(validate(c), ParameterError);
  c = {};
  c.cluster_radius = -1;
  CHECK_THROWS_AS(validate(c), ParameterError);
}

TEST_CASE("pattern labels") {
  CHECK(pattern_label(Vec3::Zero()) == Phase::NP);
  CHECK(pattern_label(Vec3(0.2, 0.2, 0.2)) == Phase::NSP);
  CHECK(pattern_label(Vec3(-0.4, 0.2, 0.2)) == Phase::FSP);
}

TEST_CASE("brute force below onset") {
  const auto p = make_params(0.5, 0.1, 0.1);
  const PhaseResult r = brute_force_minimize(p);
  CHECK(r.label == Phase::NP);
  CHECK(r.degeneracy == 1);
  CHECK(r.energy == Approx(-1.5));
  CHECK(r.representative.x.norm() < 1e-8);
}

TEST_CASE("brute force reproduces the frustrated orbit") {
  const auto p = make_params(1.1, 0.1, 0.1);
  const PhaseResult o = brute_force_minimize(p), s = solve_fsp(p);
  CHECK(o.label == Phase::FSP);
  CHECK(o.degeneracy == 6);
  CHECK(std::abs(o.energy - s.energy) < 1e-9);
  CHECK(matches_orbit(o, s, 1e-8));
}

TEST_CASE("brute force reproduces the uniform pair") {
  const auto p = make_params(1.0, -0.1, -0.1);
  const PhaseResult o = brute_force_minimize(p), s = solve_nsp(p);
  CHECK(o.label == Phase::NSP);
  CHECK(o.degeneracy == 2);
  CHECK(matches_orbit(o, s, 1e-8));
}

TEST_CASE("ansatz solvers are neither better nor worse than brute force") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> uj(-0.45, 0.45), ug(0.2, 2.5);
  for (int i = 0; i < 40; ++i) {
    const auto p = make_params(ug(rng), uj(rng), uj(rng));
    const PhaseResult a = solve_ground_state(p), b = brute_force_minimize(p);
    CHECK(std::abs(a.energy - b.energy) < 1e-9);
  }
}

TEST_CASE("local minima include metastable states") {
  // Just past g_L on the three-phase line the uniform branch survives as a local minimum.
  const auto p = make_params(1.06, 0.1, -0.1);
  const auto ms = local_minima(p);
  REQUIRE(ms.size() >= 8);
  CHECK(pattern_label(ms.front().x) == Phase::FSP);
  bool uniform = false;
  for (const auto& m : ms) uniform = uniform || pattern_label(m.x) == Phase::NSP;
  CHECK(uniform);
  for (std::size_t i = 1; i < ms.size(); ++i) CHECK(ms[i - 1].energy <= ms[i].energy);
}

TEST_CASE("transitions on the zero-hopping line") {
  const auto ts = detect_transitions(make_params(1.0, 0.0, 0.0), 0.9, 1.1);
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].order == TransitionOrder::Second);
  CHECK_FALSE(ts[0].inconclusive);
  CHECK(std::abs(ts[0].g_star - 1.0) < 1e-4);
}

TEST_CASE("transitions on the three-phase line") {
  const auto ts = detect_transitions(make_params(1.0, 0.1, -0.1), 0.9, 1.2);
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].order == TransitionOrder::Second);
  CHECK(std::abs(ts[0].g_star - std::sqrt(0.96)) < 1e-4);
  CHECK(ts[0].from == Phase::NP);
  CHECK(ts[0].to == Phase::NSP);
  CHECK(ts[1].order == TransitionOrder::First);
  CHECK(std::abs(ts[1].g_star - std::sqrt(1.08)) < 1e-4);
  CHECK(ts[1].to == Phase::FSP);
  for (const auto& t : ts) CHECK(std::abs(t.jump) > 3 * t.noise_floor);
}

TEST_CASE("energy curve is continuous") {
  OracleConfig c;
  c.derivative_step = 1e-3;
  const auto curve = oracle_energy_curve(make_params(1, 0.1, -0.1), 0.95, 1.1, c);
  REQUIRE(curve.g.size() > 100);
  for (std::size_t i = 1; i < curve.g.size(); ++i) CHECK(std::abs(curve.energy[i] - curve.energy[i - 1]) < 2e-3);
}

TEST_CASE("parallel evaluation matches serial") {
  OracleConfig a, b;
  a.derivative_step = b.derivative_step = 2e-3;
  b.workers = 3;
  const auto ca = oracle_energy_curve(make_params(1, 0.1, 0.1), 0.8, 1.0, a);
  const auto cb = oracle_energy_curve(make_params(1, 0.1, 0.1), 0.8, 1.0, b);
  CHECK(ca.energy == cb.energy);
}
