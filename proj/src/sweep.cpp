#include "dtrimer/sweep.hpp"

#include "dtrimer/errors.hpp"
#include "dtrimer/parallel.hpp"
#include "dtrimer/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dtrimer {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

PointRecord evaluate_point(const ModelParams& params, const FspOptions& options, PhaseResult* ground) {
  PointRecord r;
  r.g = params.g;
  r.J1 = params.J1;
  r.J2 = params.J2;
  r.eps.fill(kNaN);
  r.soft_mode_gap = kNaN;
  r.B_tilde = kNaN;
  try {
    PhaseResult gs = solve_ground_state(params, options);
    r.phase = gs.label;
    r.energy = gs.energy;
    r.alpha = gs.representative.alpha;
    r.degeneracy = gs.degeneracy;
    if (params.g > 0.0) r.B_tilde = b_tilde(params.J1, params.J2, params.g);
    try {
      const SpectrumResult s = ground_state_spectrum(params, gs);
      r.eps = s.energies;
      r.soft_mode_gap = s.soft_mode_gap;
    } catch (const std::exception& e) {
      r.error = std::string("spectrum: ") + e.what();
    }
    if (ground) *ground = std::move(gs);
  } catch (const std::exception& e) {
    r.ok = false;
    r.energy = kNaN;
    r.error = e.what();
  }
  return r;
}

namespace {

// Continuation along one line: seed the frustrated solver with the previous
// point's (x1, x2) and fall back to a fresh solve if the seeded one fails.
class Continuation {
 public:
  PointRecord next(const ModelParams& p, PhaseResult* ground = nullptr) {
    PhaseResult gs;
    PointRecord r;
    if (seed_) {
      FspOptions opt;
      opt.seed = seed_;
      r = evaluate_point(p, opt, &gs);
      if (!r.ok) r = evaluate_point(p, {}, &gs);
    } else {
      r = evaluate_point(p, {}, &gs);
    }
    seed_ = r.ok && gs.fsp_pair ? gs.fsp_pair : std::nullopt;
    if (ground) *ground = gs;
    return r;
  }

 private:
  std::optional<Eigen::Vector2d> seed_;
};

}  // namespace

std::vector<PointRecord> sweep_g_line(const ModelParams& base, double g_min, double g_max,
                                      int resolution) {
  std::vector<PointRecord> out;
  if (resolution <= 0) return out;
  Continuation cont;
  for (int i = 0; i < resolution; ++i) {
    const double g = resolution == 1 ? g_min : g_min + (g_max - g_min) * i / (resolution - 1);
    out.push_back(cont.next(with_g(base, g)));
  }
  return out;
}

std::vector<LabelSwitch> label_switches(const std::vector<PointRecord>& records) {
  std::vector<LabelSwitch> out;
  const PointRecord* prev = nullptr;
  for (const auto& r : records) {
    if (!r.ok) continue;
    if (prev && prev->phase != r.phase) out.push_back({prev->g, r.g, prev->phase, r.phase});
    prev = &r;
  }
  return out;
}

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::CriticalPlus: return "critical_plus";
    case BoundaryKind::CriticalMinus: return "critical_minus";
    case BoundaryKind::FirstOrder: return "first_order";
    case BoundaryKind::DividingCurve: return "dividing_curve";
    case BoundaryKind::Axis: return "axis";
  }
  return "axis";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
  for (BoundaryKind k : {BoundaryKind::CriticalPlus, BoundaryKind::CriticalMinus,
                         BoundaryKind::FirstOrder, BoundaryKind::DividingCurve, BoundaryKind::Axis})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown boundary kind: " + name);
}

const Polyline* PhaseDiagramGrid::boundary(BoundaryKind kind) const {
  for (const auto& b : boundaries)
    if (b.kind == kind) return &b;
  return nullptr;
}

void validate_axes(const Axis& x, const Axis& y) {
  if (x.name != "J2") throw ParameterError("axis_x.name", "axis_x must be J2");
  if (y.name != "g" && y.name != "J1") throw ParameterError("axis_y.name", "axis_y must be g or J1");
  for (const Axis* a : {&x, &y}) {
    const std::string prefix = a == &x ? "axis_x" : "axis_y";
    if (a->steps < 2) throw ParameterError(prefix + ".steps", prefix + ".steps must be at least 2");
    if (!(a->max > a->min)) throw ParameterError(prefix + ".max", prefix + ".max must exceed min");
    if (a->name == "g" && a->min < 0.0) throw ParameterError(prefix + ".min", "g axis must start at g >= 0");
    if (a->name != "g" && (a->min <= -0.5 || a->max >= 0.5))
      throw ParameterError(prefix + ".min", a->name + " axis must lie inside |" + a->name + "| < 1/2");
  }
}

std::vector<Phase> scanned_sequence(double J1, double J2) {
  const ModelParams base = make_params(0.0, J1, J2);
  const double gc = numeric_critical_coupling(base);
  std::vector<double> ladder{gc * (1.0 - 1e-3), gc + 1e-6};
  const std::vector<double> far = geometric_grid(gc * (1.0 + 1e-3), 1e3, 60);
  ladder.insert(ladder.end(), far.begin(), far.end());
  std::vector<Phase> seq;
  for (double g : ladder) {
    const Phase ph = solve_ground_state(with_g(base, g)).label;
    if (seq.empty() || seq.back() != ph) seq.push_back(ph);
  }
  return seq;
}

std::optional<std::array<double, 2>> analytic_triple_point(double J1) {
  if (J1 == 0.0) return std::nullopt;
  // g_c-^2 - g_L^2 as a function of J2
  auto h = [J1](double J2) {
    return (1.0 + 2.0 * J1) * (1.0 + 2.0 * J2) - (-1.0 - J1 + 2.0 * J1 * J1) * J2 / J1;
  };
  double lo = J1 > 0 ? -0.5 : 0.0, hi = J1 > 0 ? 0.0 : 0.5;
  double hlo = h(lo), hhi = h(hi);
  if ((hlo > 0) == (hhi > 0)) return std::nullopt;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double hm = h(mid);
    if ((hm > 0) == (hlo > 0)) lo = mid, hlo = hm;
    else hi = mid;
  }
  const double J2 = 0.5 * (lo + hi);
  return std::array<double, 2>{J2, std::sqrt((1.0 + 2.0 * J1) * (1.0 + 2.0 * J2))};
}

namespace {

CellSummary summarize(const PointRecord& r) {
  CellSummary c;
  c.label = r.phase;
  c.energy = r.energy;
  c.soft_mode_gap = r.soft_mode_gap;
  c.degeneracy = r.degeneracy;
  c.ok = r.ok;
  c.error = r.error;
  return c;
}

std::optional<BoundaryKind> kind_for(Phase a, Phase b) {
  const std::set<Phase> s{a, b};
  if (s == std::set<Phase>{Phase::NP, Phase::FSP}) return BoundaryKind::CriticalPlus;
  if (s == std::set<Phase>{Phase::NP, Phase::NSP}) return BoundaryKind::CriticalMinus;
  if (s == std::set<Phase>{Phase::NSP, Phase::FSP}) return BoundaryKind::FirstOrder;
  return std::nullopt;
}

template <class Pred>
double bisect(double lo, double hi, Pred same_as_lo) {
  while (hi - lo > kBoundaryBisection) {
    const double mid = 0.5 * (lo + hi);
    (same_as_lo(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct BoundaryPoint {
  BoundaryKind kind;
  double x, y, deviation;
};

void collect_polylines(PhaseDiagramGrid& grid, std::vector<BoundaryPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const BoundaryPoint& a, const BoundaryPoint& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
  for (const auto& p : pts) {
    if (grid.boundaries.empty() || grid.boundaries.back().kind != p.kind)
      grid.boundaries.push_back({p.kind, {}});
    grid.boundaries.back().points.push_back({p.x, p.y});
    grid.max_boundary_deviation = std::max(grid.max_boundary_deviation, p.deviation);
  }
}

// Crossing of the lines through the two outermost points of a and b.
std::optional<std::array<double, 2>> extrapolated_crossing(const Polyline& a, const Polyline& b,
                                                           bool right_end) {
  if (a.points.size() < 2 || b.points.size() < 2) return std::nullopt;
  auto ends = [right_end](const Polyline& p) {
    const std::size_t n = p.points.size();
    return right_end ? std::pair{p.points[n - 2], p.points[n - 1]} : std::pair{p.points[1], p.points[0]};
  };
  const auto [a0, a1] = ends(a);
  const auto [b0, b1] = ends(b);
  const double sa = (a1[1] - a0[1]) / (a1[0] - a0[0]);
  const double sb = (b1[1] - b0[1]) / (b1[0] - b0[0]);
  if (!std::isfinite(sa) || !std::isfinite(sb) || sa == sb) return std::nullopt;
  const double x = (b1[1] - a1[1] + sa * a1[0] - sb * b1[0]) / (sa - sb);
  return std::array<double, 2>{x, a1[1] + sa * (x - a1[0])};
}

void g_plane(PhaseDiagramGrid& grid, int workers) {
  const Axis& ax = grid.axis_x;
  const Axis& ay = grid.axis_y;
  const double J1 = grid.fixed.J1;
  std::vector<std::vector<BoundaryPoint>> per_column(ax.steps);

  parallel_for(ax.steps, workers, [&](std::size_t ix) {
    const double J2 = ax.value(static_cast<int>(ix));
    ModelParams base = grid.fixed;
    base.J2 = J2;
    Continuation cont;
    for (int iy = 0; iy < ay.steps; ++iy)
      grid.cells[iy * ax.steps + ix] = summarize(cont.next(with_g(base, ay.value(iy))));

    for (int iy = 0; iy + 1 < ay.steps; ++iy) {
      const CellSummary& lo = grid.cells[iy * ax.steps + ix];
      const CellSummary& hi = grid.cells[(iy + 1) * ax.steps + ix];
      if (!lo.ok || !hi.ok || lo.label == hi.label) continue;
      const auto kind = kind_for(lo.label, hi.label);
      if (!kind) continue;
      const double g = bisect(ay.value(iy), ay.value(iy + 1), [&](double gm) {
        return solve_ground_state(with_g(base, gm)).label == lo.label;
      });
      const CriticalCouplings cc = critical_couplings(base);
      double reference = g;
      if (*kind == BoundaryKind::CriticalPlus) reference = cc.g_c_plus;
      if (*kind == BoundaryKind::CriticalMinus) reference = cc.g_c_minus;
      if (*kind == BoundaryKind::FirstOrder) reference = first_order_point(J1, J2).value_or(kNaN);
      per_column[ix].push_back({*kind, J2, g, std::abs(g - reference)});
    }
  });

  std::vector<BoundaryPoint> all;
  for (auto& c : per_column) all.insert(all.end(), c.begin(), c.end());
  collect_polylines(grid, all);

  grid.triple_point_analytic = analytic_triple_point(J1);
  const Polyline* first = grid.boundary(BoundaryKind::FirstOrder);
  const Polyline* critical = grid.boundary(J1 > 0 ? BoundaryKind::CriticalMinus : BoundaryKind::CriticalPlus);
  if (first && critical) grid.triple_point_numeric = extrapolated_crossing(*first, *critical, J1 > 0);
}

int scanned_region(double J1, double J2) {
  return region_from_sequence(J1, J2, scanned_sequence(J1, J2));
}

void j1_plane(PhaseDiagramGrid& grid, int workers) {
  const Axis& ax = grid.axis_x;
  const Axis& ay = grid.axis_y;
  const std::size_t n = static_cast<std::size_t>(ax.steps) * ay.steps;

  parallel_for(n, workers, [&](std::size_t k) {
    const int ix = static_cast<int>(k % ax.steps), iy = static_cast<int>(k / ax.steps);
    const double J2 = ax.value(ix), J1 = ay.value(iy);
    ModelParams p = grid.fixed;
    p.J1 = J1;
    p.J2 = J2;
    CellSummary c = summarize(evaluate_point(p));
    try {
      const std::vector<Phase> seq = scanned_sequence(J1, J2);
      c.sequence = sequence_to_string(seq);
      c.region = region_from_sequence(J1, J2, seq);
    } catch (const std::exception& e) {
      c.ok = false;
      c.error = e.what();
    }
    grid.cells[k] = c;
  });

  // crossings between neighbouring cells, column-wise (vary J1) then row-wise (vary J2)
  struct Edge {
    int ix0, iy0, ix1, iy1;
  };
  std::vector<Edge> edges;
  for (int iy = 0; iy < ay.steps; ++iy)
    for (int ix = 0; ix < ax.steps; ++ix) {
      if (iy + 1 < ay.steps) edges.push_back({ix, iy, ix, iy + 1});
      if (ix + 1 < ax.steps) edges.push_back({ix, iy, ix + 1, iy});
    }
  std::vector<std::optional<BoundaryPoint>> found(edges.size());
  parallel_for(edges.size(), workers, [&](std::size_t e) {
    const Edge& ed = edges[e];
    const CellSummary& a = grid.cell(ed.ix0, ed.iy0);
    const CellSummary& b = grid.cell(ed.ix1, ed.iy1);
    if (!a.ok || !b.ok || a.region == 0 || b.region == 0 || a.region == b.region) return;
    const std::set<int> pair{a.region, b.region};
    const bool dividing = pair == std::set<int>{3, 4} || pair == std::set<int>{1, 6};
    const BoundaryKind kind = dividing ? BoundaryKind::DividingCurve : BoundaryKind::Axis;
    if (ed.ix0 == ed.ix1) {
      const double J2 = ax.value(ed.ix0);
      const double J1 = bisect(ay.value(ed.iy0), ay.value(ed.iy1),
                               [&](double j1) { return scanned_region(j1, J2) == a.region; });
      const double ref = dividing ? dividing_curve(J2) : 0.0;
      found[e] = BoundaryPoint{kind, J2, J1, std::abs(J1 - ref)};
    } else {
      const double J1 = ay.value(ed.iy0);
      const double J2 = bisect(ax.value(ed.ix0), ax.value(ed.ix1),
                               [&](double j2) { return scanned_region(J1, j2) == a.region; });
      // the curve J1 = -J2 / (1 + J2) solved for J2
      const double ref = dividing ? -J1 / (1.0 + J1) : 0.0;
      double dev = std::abs(J2 - ref);
      // an axis crossing along a row is the J1 = 0 line only if J1 is the one vanishing
      if (!dividing) dev = std::min(std::abs(J2), std::abs(J1));
      found[e] = BoundaryPoint{kind, J2, J1, dev};
    }
  });
  std::vector<BoundaryPoint> all;
  for (auto& f : found)
    if (f) all.push_back(*f);
  collect_polylines(grid, all);
}

}  // namespace

PhaseDiagramGrid sweep_phase_diagram(const Axis& axis_x, const Axis& axis_y, const ModelParams& fixed,
                                     int workers) {
  validate_axes(axis_x, axis_y);
  PhaseDiagramGrid grid;
  grid.axis_x = axis_x;
  grid.axis_y = axis_y;
  grid.fixed = fixed;
  grid.cells.resize(static_cast<std::size_t>(axis_x.steps) * axis_y.steps);
  for (double v : {axis_x.min, axis_x.max}) validate(make_params(std::max(fixed.g, 0.0), fixed.J1, v, fixed.omega, fixed.Omega));
  if (axis_y.name == "g") {
    if (axis_y.min < 0) throw ParameterError("axis_y.min", "g must be non-negative");
    validate(with_g(fixed, 0.0));
    g_plane(grid, workers);
  } else {
    for (double v : {axis_y.min, axis_y.max}) validate(make_params(std::max(fixed.g, 0.0), v, 0.0, fixed.omega, fixed.Omega));
    j1_plane(grid, workers);
  }
  for (const auto& c : grid.cells)
    if (!c.ok) ++grid.failed_cells;
  return grid;
}

}  // namespace dtrimer
