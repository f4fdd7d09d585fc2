#pragma once

// Parameter sweeps: g-lines with continuation seeding, and 2-D phase diagrams
// in the g-J2 plane (fixed J1) or the J1-J2 plane (regions from g-scans).

#include "dtrimer/meanfield.hpp"
#include "dtrimer/model.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dtrimer {

struct PointRecord {
  double g = 0.0, J1 = 0.0, J2 = 0.0;
  Phase phase = Phase::NP;
  double energy = 0.0;
  Vec3 alpha = Vec3::Zero();
  std::array<double, 6> eps{};  // NaN when the spectrum failed
  double B_tilde = 0.0;         // NaN at g = 0
  int degeneracy = 1;
  double soft_mode_gap = 0.0;
  bool ok = true;
  std::string error;
};

// Solve the ground state and its spectrum at one point. Errors are recorded, not thrown.
PointRecord evaluate_point(const ModelParams& params, const FspOptions& options = {},
                           PhaseResult* ground = nullptr);

// resolution points evenly spaced in [g_min, g_max]; 0 gives an empty result.
std::vector<PointRecord> sweep_g_line(const ModelParams& base, double g_min, double g_max,
                                      int resolution);

struct LabelSwitch {
  double g_before = 0.0, g_after = 0.0;
  Phase from = Phase::NP, to = Phase::NP;
};
std::vector<LabelSwitch> label_switches(const std::vector<PointRecord>& records);

struct Axis {
  std::string name;  // "g", "J1" or "J2"
  double min = 0.0, max = 0.0;
  int steps = 0;     // number of samples, at least 2
  double value(int i) const { return min + (max - min) * i / (steps - 1); }
};

struct CellSummary {
  Phase label = Phase::NP;
  double energy = 0.0;
  double soft_mode_gap = 0.0;
  int degeneracy = 1;
  int region = 0;         // J1-J2 plane only
  std::string sequence;   // J1-J2 plane only, e.g. "NP->NSP->FSP"
  bool ok = true;
  std::string error;
};

enum class BoundaryKind { CriticalPlus, CriticalMinus, FirstOrder, DividingCurve, Axis };
std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& name);

// Points are (x, y) in axis coordinates, sorted by x.
struct Polyline {
  BoundaryKind kind = BoundaryKind::CriticalPlus;
  std::vector<std::array<double, 2>> points;
};

struct PhaseDiagramGrid {
  Axis axis_x, axis_y;
  ModelParams fixed;
  std::vector<CellSummary> cells;  // row-major: cells[iy * axis_x.steps + ix]
  std::vector<Polyline> boundaries;
  double max_boundary_deviation = 0.0;  // numeric against closed-form boundaries
  std::optional<std::array<double, 2>> triple_point_numeric;
  std::optional<std::array<double, 2>> triple_point_analytic;
  int failed_cells = 0;

  const CellSummary& cell(int ix, int iy) const { return cells[iy * axis_x.steps + ix]; }
  const Polyline* boundary(BoundaryKind kind) const;
};

// Throws ParameterError for unsupported axes or fewer than two steps.
void validate_axes(const Axis& x, const Axis& y);

inline constexpr double kBoundaryBisection = 1e-6;

// axis_x must be J2; axis_y is g (g-J2 plane at fixed.J1) or J1 (J1-J2 plane,
// cells report the ground state at fixed.g plus the region from a g-scan).
PhaseDiagramGrid sweep_phase_diagram(const Axis& axis_x, const Axis& axis_y,
                                     const ModelParams& fixed, int workers = 1);

// Phase sequence met by increasing g from zero, from a numeric onset and a
// geometric g ladder up to g = 1e3.
std::vector<Phase> scanned_sequence(double J1, double J2);

// J2 and g where g_c- = g_L at fixed J1, by bisection; absent when J1 <= 0.
std::optional<std::array<double, 2>> analytic_triple_point(double J1);

}  // namespace dtrimer
