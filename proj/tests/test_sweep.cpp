#include "doctest.h"
#include "dtrimer/errors.hpp"
#include "dtrimer/parallel.hpp"
#include "dtrimer/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>

using namespace dtrimer;
using doctest::Approx;

TEST_CASE("g-line on the three-phase line") {
  const auto rec = sweep_g_line(make_params(1, 0.1, -0.1), 0.8, 1.2, 401);
  REQUIRE(rec.size() == 401);
  const auto sw = label_switches(rec);
  REQUIRE(sw.size() == 2);
  CHECK(sw[0].from == Phase::NP);
  CHECK(sw[0].to == Phase::NSP);
  CHECK(sw[0].g_before <= std::sqrt(0.96));
  CHECK(sw[0].g_after >= std::sqrt(0.96));
  CHECK(sw[1].to == Phase::FSP);
  CHECK(sw[1].g_before <= std::sqrt(1.08));
  CHECK(sw[1].g_after >= std::sqrt(1.08));
  for (const auto& r : rec) {
    CHECK(r.ok);
    CHECK(r.B_tilde == Approx(b_tilde(0.1, -0.1, r.g)));
    for (double e : r.eps) CHECK(std::isfinite(e));
  }
}

TEST_CASE("g-line single switch and empty range") {
  const auto rec = sweep_g_line(make_params(1, 0.1, 0.1), 0.5, 1.5, 201);
  const auto sw = label_switches(rec);
  REQUIRE(sw.size() == 1);
  CHECK(sw[0].from == Phase::NP);
  CHECK(sw[0].to == Phase::FSP);
  CHECK(sw[0].g_before <= 0.9);
  CHECK(sw[0].g_after >= 0.9);
  CHECK(sweep_g_line(make_params(1, 0.1, 0.1), 0.5, 1.5, 0).empty());
}

TEST_CASE("g = 0 records have no B~") {
  const auto rec = sweep_g_line(make_params(1, 0.1, 0.1), 0.0, 0.2, 3);
  CHECK(std::isnan(rec[0].B_tilde));
  CHECK(rec[0].phase == Phase::NP);
}

TEST_CASE("axis validation") {
  CHECK_THROWS_AS(validate_axes({"J2", -0.4, 0.4, 0}, {"g", 0.7, 1.3, 5}), ParameterError);
  CHECK_THROWS_AS(validate_axes({"J2", -0.4, 0.4, 5}, {"g", 1.3, 0.7, 5}), ParameterError);
  CHECK_THROWS_AS(validate_axes({"g", 0.7, 1.3, 5}, {"J2", -0.4, 0.4, 5}), ParameterError);
  CHECK_THROWS_AS(validate_axes({"J2", -0.6, 0.4, 5}, {"g", 0.7, 1.3, 5}), ParameterError);
  CHECK_NOTHROW(validate_axes({"J2", -0.4, 0.4, 5}, {"J1", -0.4, 0.4, 5}));
}

TEST_CASE("g-J2 plane: boundaries, triple point and no speckle") {
  const Axis ax{"J2", -0.4, 0.4, 61}, ay{"g", 0.7, 1.3, 61};
  const auto grid = sweep_phase_diagram(ax, ay, make_params(1, 0.1, 0), 2);
  CHECK(grid.failed_cells == 0);
  REQUIRE(grid.boundary(BoundaryKind::CriticalPlus));
  REQUIRE(grid.boundary(BoundaryKind::CriticalMinus));
  REQUIRE(grid.boundary(BoundaryKind::FirstOrder));
  CHECK(grid.max_boundary_deviation < 1e-3);
  REQUIRE(grid.triple_point_numeric);
  REQUIRE(grid.triple_point_analytic);
  const auto& n = *grid.triple_point_numeric;
  const auto& a = *grid.triple_point_analytic;
  CHECK(std::hypot(n[0] - a[0], n[1] - a[1]) < 1e-3);
  // analytic triple point satisfies g_c- = g_L
  CHECK(critical_couplings(make_params(0, 0.1, a[0])).g_c_minus == Approx(*first_order_point(0.1, a[0])));

  // cells away from analytic boundaries carry the analytic label
  const double dx = (ax.max - ax.min) / (ax.steps - 1), dy = (ay.max - ay.min) / (ay.steps - 1);
  int speckle = 0;
  for (int iy = 0; iy < ay.steps; ++iy)
    for (int ix = 0; ix < ax.steps; ++ix) {
      const double J2 = ax.value(ix), g = ay.value(iy);
      const auto cc = critical_couplings(make_params(0, 0.1, J2));
      const auto gL = first_order_point(0.1, J2);
      Phase want = Phase::NP;
      if (g > cc.g_c) want = b_tilde(0.1, J2, g) > 0 ? Phase::FSP : Phase::NSP;
      const double margin = std::min(std::abs(g - cc.g_c), gL ? std::abs(g - *gL) : 1.0);
      if (margin < dy || std::abs(J2) < dx) continue;
      if (grid.cell(ix, iy).label != want) ++speckle;
    }
  CHECK(speckle == 0);
  // every boundary point separates differently labelled cells
  for (const auto& b : grid.boundaries)
    for (const auto& p : b.points) {
      CHECK(p[0] >= ax.min - 1e-12);
      CHECK(p[0] <= ax.max + 1e-12);
    }
}

TEST_CASE("J1-J2 plane matches the region classifier") {
  const Axis ax{"J2", -0.4, 0.4, 9}, ay{"J1", -0.4, 0.4, 9};
  const auto grid = sweep_phase_diagram(ax, ay, make_params(1.0, 0, 0), 2);
  CHECK(grid.failed_cells == 0);
  int mismatches = 0;
  for (int iy = 0; iy < ay.steps; ++iy)
    for (int ix = 0; ix < ax.steps; ++ix) {
      const auto r = classify_region(ay.value(iy), ax.value(ix));
      if (r.boundary) continue;
      if (grid.cell(ix, iy).region != r.region) ++mismatches;
    }
  CHECK(mismatches == 0);
  CHECK(grid.boundary(BoundaryKind::DividingCurve));
}

TEST_CASE("results do not depend on worker count") {
  const Axis ax{"J2", -0.4, 0.4, 15}, ay{"g", 0.7, 1.3, 15};
  const auto a = sweep_phase_diagram(ax, ay, make_params(1, 0.1, 0), 1);
  const auto b = sweep_phase_diagram(ax, ay, make_params(1, 0.1, 0), 4);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].label == b.cells[i].label);
    CHECK(a.cells[i].energy == b.cells[i].energy);
  }
  REQUIRE(a.boundaries.size() == b.boundaries.size());
  for (std::size_t i = 0; i < a.boundaries.size(); ++i) CHECK(a.boundaries[i].points == b.boundaries[i].points);
}

TEST_CASE("worker resolution") {
  CHECK(resolve_workers(3) == 3);
  setenv(kWorkersEnv, "5", 1);
  CHECK(resolve_workers() == 5);
  CHECK(resolve_workers(2) == 2);
  unsetenv(kWorkersEnv);
  CHECK(resolve_workers() >= 1);

  std::atomic<int> sum{0};
  parallel_for(100, 4, [&](std::size_t i) { sum += static_cast<int>(i); });
  CHECK(sum == 4950);
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}

TEST_CASE("boundary kind names") {
  for (auto k : {BoundaryKind::CriticalPlus, BoundaryKind::CriticalMinus, BoundaryKind::FirstOrder,
                 BoundaryKind::DividingCurve, BoundaryKind::Axis})
    CHECK(boundary_kind_from_string(to_string(k)) == k);
}
