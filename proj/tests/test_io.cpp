#include "doctest.h"
#include "dtrimer/io.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>

using namespace dtrimer;

namespace {

bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::memcmp(&a, &b, sizeof a) == 0;
}

void check_same(const PointRecord& a, const PointRecord& b) {
  CHECK(same_bits(a.g, b.g));
  CHECK(same_bits(a.J1, b.J1));
  CHECK(same_bits(a.J2, b.J2));
  CHECK(a.phase == b.phase);
  CHECK(same_bits(a.energy, b.energy));
  for (int n = 0; n < 3; ++n) CHECK(same_bits(a.alpha[n], b.alpha[n]));
  for (int k = 0; k < 6; ++k) CHECK(same_bits(a.eps[k], b.eps[k]));
  CHECK(same_bits(a.B_tilde, b.B_tilde));
  CHECK(a.degeneracy == b.degeneracy);
  CHECK(a.ok == b.ok);
  CHECK(a.error == b.error);
}

}  // namespace

TEST_CASE("CSV header and exact round trip") {
  auto rec = sweep_g_line(make_params(1, 0.1, -0.1), 0.0, 1.2, 61);
  rec[3].ok = false;
  rec[3].error = "spectrum: \"unstable\", min eigenvalue -1e-3\nsecond line";
  std::stringstream ss;
  write_records_csv(ss, rec);
  const std::string text = ss.str();
  CHECK(text.rfind("# dtrimer", 0) == 0);
  CHECK(text.find("g,J1,J2,phase,energy,alpha1,alpha2,alpha3,eps1,eps2,eps3,eps4,eps5,eps6,B_tilde") !=
        std::string::npos);
  std::stringstream in(text);
  const auto back = read_records_csv(in);
  REQUIRE(back.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) check_same(rec[i], back[i]);
}

TEST_CASE("CSV rejects a foreign header") {
  std::stringstream in("a,b,c\n1,2,3\n");
  CHECK_THROWS(read_records_csv(in));
}

TEST_CASE("17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(NAN) == "nan");
}

TEST_CASE("JSON records round trip") {
  const auto rec = sweep_g_line(make_params(1, 0.1, 0.1), 0.0, 1.5, 31);
  const auto text = records_to_json(rec, make_params(1, 0.1, 0.1), 0.0, 1.5);
  const auto back = records_from_json(text);
  REQUIRE(back.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    check_same(rec[i], back[i]);
    CHECK(same_bits(rec[i].soft_mode_gap, back[i].soft_mode_gap));
  }
  CHECK(text.find("\"version\"") != std::string::npos);
  CHECK(text.find("\"switches\"") != std::string::npos);
}

TEST_CASE("grid JSON round trip is bit exact") {
  const auto grid = sweep_phase_diagram({"J2", -0.4, 0.4, 11}, {"g", 0.7, 1.3, 11}, make_params(1, 0.1, 0));
  const auto text = grid_to_json(grid);
  const auto back = grid_from_json(text);
  CHECK(grid_to_json(back) == text);
  REQUIRE(back.cells.size() == grid.cells.size());
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    CHECK(back.cells[i].label == grid.cells[i].label);
    CHECK(same_bits(back.cells[i].energy, grid.cells[i].energy));
    CHECK(same_bits(back.cells[i].soft_mode_gap, grid.cells[i].soft_mode_gap));
  }
  REQUIRE(back.boundaries.size() == grid.boundaries.size());
  for (std::size_t i = 0; i < grid.boundaries.size(); ++i)
    for (std::size_t j = 0; j < grid.boundaries[i].points.size(); ++j)
      for (int c = 0; c < 2; ++c) CHECK(same_bits(back.boundaries[i].points[j][c], grid.boundaries[i].points[j][c]));
  CHECK(same_bits(back.max_boundary_deviation, grid.max_boundary_deviation));
}

TEST_CASE("timestamp honours SOURCE_DATE_EPOCH") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  CHECK(output_timestamp() == "1970-01-01T00:00:00Z");
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(output_timestamp() == "2023-11-14T22:13:20Z");
  unsetenv("SOURCE_DATE_EPOCH");
  CHECK(output_timestamp().size() == 20);
}
