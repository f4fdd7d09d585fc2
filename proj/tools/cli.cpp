#include "cli.hpp"

#include "CLI11.hpp"
#include "dtrimer/acceptance.hpp"
#include "dtrimer/errors.hpp"
#include "dtrimer/io.hpp"
#include "dtrimer/meanfield.hpp"
#include "dtrimer/oracle.hpp"
#include "dtrimer/parallel.hpp"
#include "dtrimer/spectrum.hpp"
#include "dtrimer/sweep.hpp"
#include "dtrimer/version.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace dtrimer::cli {

namespace {

using nlohmann::json;

// Failure that maps straight to an exit code and a JSON error on stderr.
struct Failure {
  int code;
  std::string kind;
  std::string field;
  std::string message;
};

void report(std::ostream& err, const Failure& f) {
  json e{{"code", f.code}, {"kind", f.kind}, {"message", f.message}};
  if (!f.field.empty()) e["field"] = f.field;
  err << json{{"error", e}}.dump() << '\n';
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json provenance() {
  return {{"tool", kToolName}, {"version", kVersion}, {"timestamp", output_timestamp()}};
}

struct ParamFlags {
  double g = 1.0, J1 = 0.0, J2 = 0.0, omega = 1.0, Omega = 1.0;

  void add(CLI::App* app, bool with_g = true) {
    if (with_g) app->add_option("--g", g, "dimensionless light-matter coupling")->capture_default_str();
    app->add_option("--j1", J1, "photon hopping J1, |J1| < 1/2")->capture_default_str();
    app->add_option("--j2", J2, "atom hopping J2, |J2| < 1/2")->capture_default_str();
    app->add_option("--omega", omega, "cavity frequency")->capture_default_str();
    app->add_option("--Omega", Omega, "atom frequency")->capture_default_str();
  }
  ModelParams params() const { return make_params(g, J1, J2, omega, Omega); }
};

struct OutputFlags {
  std::string format = "text";
  std::string path;

  void add(CLI::App* app, std::vector<std::string> formats) {
    format = formats.front();
    app->add_option("--format", format, "output format")
        ->check(CLI::IsMember(formats))
        ->capture_default_str();
    app->add_option("-o,--output", path, "output file (default: standard output)");
  }
};

// Writes data to the output file, or to out when no file is given.
void emit(const OutputFlags& o, const std::string& data, std::ostream& out) {
  if (o.path.empty()) {
    out << data;
    return;
  }
  std::ofstream f(o.path, std::ios::binary);
  if (!f) throw Failure{kExitInvalid, "io", "output", "cannot open '" + o.path + "' for writing"};
  f << data;
  if (!f) throw Failure{kExitFailure, "io", "output", "write to '" + o.path + "' failed"};
}

std::string region_text(double J1, double J2) {
  const RegionLabel r = classify_region(J1, J2);
  if (r.boundary) {
    std::string s = "boundary (adjacent";
    for (int a : r.adjacent) s += " " + std::to_string(a);
    return s + ")";
  }
  return std::to_string(r.region) + " (" + sequence_to_string(r.expected_sequence) + ")";
}

std::string branch_of(const std::string& s, OnsetBranch* b) {
  if (s == "active") *b = OnsetBranch::Active;
  else if (s == "plus") *b = OnsetBranch::Plus;
  else *b = OnsetBranch::Minus;
  return s;
}

// ---- solve ----

int cmd_solve(const ParamFlags& pf, const OutputFlags& of, std::ostream& out) {
  const ModelParams p = pf.params();
  validate(p);
  const PhaseResult r = solve_ground_state(p);
  const SpectrumResult s = ground_state_spectrum(p, r);
  const CriticalCouplings cc = critical_couplings(p);
  const double B = p.g > 0 ? b_tilde(p.J1, p.J2, p.g) : NAN;
  const auto gL = first_order_point(p);
  const Vec3& a = r.representative.alpha;
  const Vec3& x = r.representative.x;

  if (of.format == "json") {
    json doc = provenance();
    doc["kind"] = "solve";
    doc["parameters"] = {{"omega", p.omega}, {"Omega", p.Omega}, {"g", p.g}, {"J1", p.J1}, {"J2", p.J2}};
    doc["phase"] = to_string(r.label);
    doc["degeneracy"] = r.degeneracy;
    doc["coexistence"] = r.coexistence;
    doc["energy"] = r.energy;
    doc["alpha"] = {a[0], a[1], a[2]};
    doc["x"] = {x[0], x[1], x[2]};
    doc["eps"] = json(std::vector<double>(s.energies.begin(), s.energies.end()));
    doc["soft_mode_gap"] = s.soft_mode_gap;
    doc["critical"] = s.critical;
    doc["B_tilde"] = finite_or_null(B);
    doc["g_c_plus"] = cc.g_c_plus;
    doc["g_c_minus"] = cc.g_c_minus;
    doc["g_c"] = cc.g_c;
    doc["g_L"] = gL ? json(*gL) : json(nullptr);
    doc["region"] = region_text(p.J1, p.J2);
    emit(of, doc.dump(2) + "\n", out);
    return kExitOk;
  }

  std::ostringstream t;
  t << "phase        " << to_string(r.label) << (r.coexistence ? " (coexistence)" : "") << '\n'
    << "degeneracy   " << r.degeneracy << '\n'
    << "energy       " << num(r.energy) << '\n'
    << "alpha        " << num(a[0]) << ' ' << num(a[1]) << ' ' << num(a[2]) << '\n'
    << "x            " << num(x[0]) << ' ' << num(x[1]) << ' ' << num(x[2]) << '\n'
    << "eps          ";
  for (int k = 0; k < 6; ++k) t << (k ? " " : "") << num(s.energies[k]);
  t << (s.critical ? "  (critical)" : "") << '\n'
    << "B_tilde      " << num(B) << '\n'
    << "g_c+ g_c-    " << num(cc.g_c_plus) << ' ' << num(cc.g_c_minus) << '\n'
    << "g_L          " << (gL ? num(*gL) : std::string("none")) << '\n'
    << "region       " << region_text(p.J1, p.J2) << '\n';
  emit(of, t.str(), out);
  return kExitOk;
}

// ---- sweep ----

int exit_for_success(int total, int failed) {
  if (total == 0) return kExitOk;
  return (total - failed) >= 0.99 * total ? kExitOk : kExitFailure;
}

int cmd_sweep_line(const ParamFlags& pf, double g_min, double g_max, int resolution, const OutputFlags& of,
                   std::ostream& out, std::ostream& err) {
  ModelParams base = pf.params();
  base.g = g_min;
  validate(base);
  if (resolution < 1) throw ParameterError("resolution", "resolution must be at least 1");
  if (!(g_max >= g_min)) throw ParameterError("g_max", "g_max must be >= g_min");
  if (g_min < 0) throw ParameterError("g_min", "g_min must be >= 0");

  const auto records = sweep_g_line(base, g_min, g_max, resolution);
  std::ostringstream data;
  if (of.format == "json") data << records_to_json(records, base, g_min, g_max);
  else write_records_csv(data, records);
  emit(of, data.str(), out);

  int failed = 0;
  for (const auto& r : records) failed += r.ok ? 0 : 1;
  std::ostream& summary = of.path.empty() ? err : out;
  summary << "points " << records.size() << ", failed " << failed << '\n';
  for (const auto& s : label_switches(records))
    summary << "transition " << to_string(s.from) << " -> " << to_string(s.to) << " in [" << num(s.g_before)
            << ", " << num(s.g_after) << "]\n";
  return exit_for_success(static_cast<int>(records.size()), failed);
}

int cmd_sweep_grid(const std::string& plane, const ParamFlags& pf, const Axis& ax, Axis ay, int workers,
                   const OutputFlags& of, std::ostream& out, std::ostream& err) {
  ay.name = plane == "g-J2" ? "g" : "J1";
  ModelParams fixed = pf.params();
  validate(fixed);
  validate_axes(ax, ay);
  const PhaseDiagramGrid grid = sweep_phase_diagram(ax, ay, fixed, workers);
  emit(of, grid_to_json(grid), out);

  std::ostream& summary = of.path.empty() ? err : out;
  summary << "cells " << grid.cells.size() << ", failed " << grid.failed_cells << '\n';
  for (const auto& b : grid.boundaries) summary << "boundary " << to_string(b.kind) << ": " << b.points.size() << " points\n";
  summary << "max boundary deviation " << num(grid.max_boundary_deviation) << '\n';
  if (grid.triple_point_numeric)
    summary << "triple point numeric (J2, g) = (" << num((*grid.triple_point_numeric)[0]) << ", "
            << num((*grid.triple_point_numeric)[1]) << ")\n";
  if (grid.triple_point_analytic)
    summary << "triple point analytic (J2, g) = (" << num((*grid.triple_point_analytic)[0]) << ", "
            << num((*grid.triple_point_analytic)[1]) << ")\n";
  return exit_for_success(static_cast<int>(grid.cells.size()), grid.failed_cells);
}

// ---- verify ----

int cmd_verify(const std::string& scope, std::uint64_t seed, int workers, std::ostream& out) {
  AcceptanceOptions opt;
  opt.seed = seed;
  opt.workers = workers;
  bool all = true;
  for (const auto& id : criteria_in_scope(scope_from_string(scope))) {
    const auto r = run_criterion(id, opt);
    out << format_result(r) << std::endl;
    all = all && r.passed;
  }
  return all ? kExitOk : kExitFailure;
}

// ---- oracle ----

int cmd_oracle_minimize(const ParamFlags& pf, const OracleConfig& cfg, const OutputFlags& of, std::ostream& out) {
  const ModelParams p = pf.params();
  validate(p);
  validate(cfg);
  const auto minima = local_minima(p, cfg);
  const PhaseResult r = brute_force_minimize(p, cfg);
  if (of.format == "json") {
    json doc = provenance();
    doc["kind"] = "oracle_minimize";
    doc["parameters"] = {{"omega", p.omega}, {"Omega", p.Omega}, {"g", p.g}, {"J1", p.J1}, {"J2", p.J2}};
    doc["phase"] = to_string(r.label);
    doc["degeneracy"] = r.degeneracy;
    doc["energy"] = r.energy;
    json ms = json::array();
    for (const auto& m : minima) ms.push_back({{"x", {m.x[0], m.x[1], m.x[2]}}, {"energy", m.energy}});
    doc["local_minima"] = ms;
    emit(of, doc.dump(2) + "\n", out);
    return kExitOk;
  }
  std::ostringstream t;
  t << "phase        " << to_string(r.label) << '\n'
    << "degeneracy   " << r.degeneracy << '\n'
    << "energy       " << num(r.energy) << '\n'
    << "local minima " << minima.size() << '\n';
  for (const auto& m : minima)
    t << "  x = (" << num(m.x[0]) << ", " << num(m.x[1]) << ", " << num(m.x[2]) << ")  E = " << num(m.energy) << '\n';
  emit(of, t.str(), out);
  return kExitOk;
}

int cmd_oracle_transitions(const ParamFlags& pf, double g_min, double g_max, const OracleConfig& cfg,
                           const OutputFlags& of, std::ostream& out) {
  ModelParams p = pf.params();
  p.g = g_min;
  validate(p);
  validate(cfg);
  if (!(g_max > g_min)) throw ParameterError("g_max", "g_max must be > g_min");
  const auto ts = detect_transitions(p, g_min, g_max, cfg);
  if (of.format == "json") {
    json doc = provenance();
    doc["kind"] = "oracle_transitions";
    doc["parameters"] = {{"omega", p.omega}, {"Omega", p.Omega}, {"J1", p.J1}, {"J2", p.J2}};
    doc["g_min"] = g_min;
    doc["g_max"] = g_max;
    json arr = json::array();
    for (const auto& t : ts)
      arr.push_back({{"g_star", t.g_star},
                     {"order", to_string(t.order)},
                     {"inconclusive", t.inconclusive},
                     {"jump", t.jump},
                     {"noise_floor", t.noise_floor},
                     {"from", to_string(t.from)},
                     {"to", to_string(t.to)}});
    doc["transitions"] = arr;
    emit(of, doc.dump(2) + "\n", out);
    return kExitOk;
  }
  std::ostringstream t;
  t << "transitions " << ts.size() << '\n';
  for (const auto& tr : ts)
    t << "  g* = " << num(tr.g_star) << "  " << to_string(tr.order) << " order  " << to_string(tr.from) << " -> "
      << to_string(tr.to) << "  jump " << num(tr.jump) << "  noise " << num(tr.noise_floor)
      << (tr.inconclusive ? "  INCONCLUSIVE" : "") << '\n';
  emit(of, t.str(), out);
  return kExitOk;
}

// ---- exponent ----

int cmd_exponent(const ParamFlags& pf, const std::string& quantity, const std::string& side,
                 const std::string& branch, int points, const OutputFlags& of, std::ostream& out) {
  const ModelParams p = pf.params();
  validate(p);
  if (points < 3) throw ParameterError("points", "points must be at least 3");
  OnsetBranch b;
  branch_of(branch, &b);
  PowerLawFit f;
  if (quantity == "order") {
    if (side != "above") throw ParameterError("side", "the order parameter vanishes below onset; use --side above");
    f = fit_order_parameter(p, b, points);
  } else {
    f = fit_critical_exponent(p, side == "above" ? Side::Above : Side::Below, b, points);
  }
  if (of.format == "json") {
    json doc = provenance();
    doc["kind"] = "exponent";
    doc["parameters"] = {{"omega", p.omega}, {"Omega", p.Omega}, {"J1", p.J1}, {"J2", p.J2}};
    doc["quantity"] = quantity;
    doc["side"] = side;
    doc["branch"] = branch;
    doc["exponent"] = f.exponent;
    doc["prefactor"] = f.prefactor;
    doc["r_squared"] = f.r_squared;
    doc["deltas"] = f.deltas;
    doc["values"] = f.values;
    emit(of, doc.dump(2) + "\n", out);
    return kExitOk;
  }
  std::ostringstream t;
  t << "exponent   " << num(f.exponent) << '\n'
    << "prefactor  " << num(f.prefactor) << '\n'
    << "r_squared  " << num(f.r_squared) << '\n';
  emit(of, t.str(), out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field ground states, spectra and phase diagrams of the Dicke trimer", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.set_config("--config", "", "TOML or INI file; command-line flags override its values");
  app.require_subcommand(1);

  std::optional<int> workers_flag;
  app.add_option("--workers", workers_flag,
                 std::string("worker threads (default: ") + kWorkersEnv + " or hardware concurrency)")
      ->check(CLI::PositiveNumber);

  std::function<int()> action;

  // solve
  auto* solve = app.add_subcommand("solve", "ground state, spectrum and region at one point");
  ParamFlags solve_p;
  OutputFlags solve_o;
  solve_p.add(solve);
  solve_o.add(solve, {"text", "json"});
  solve->callback([&] { action = [&] { return cmd_solve(solve_p, solve_o, out); }; });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "g-line or phase-diagram sweeps");
  sweep->require_subcommand(1);
  auto* line = sweep->add_subcommand("line", "per-g records at fixed J1, J2");
  ParamFlags line_p;
  OutputFlags line_o;
  double line_gmin = 0.0, line_gmax = 2.0;
  int line_res = 201;
  line_p.add(line, false);
  line->add_option("--g-min", line_gmin, "first g")->capture_default_str();
  line->add_option("--g-max", line_gmax, "last g")->capture_default_str();
  line->add_option("--resolution", line_res, "number of g points")->capture_default_str();
  line_o.add(line, {"csv", "json"});
  line->callback([&] {
    action = [&] { return cmd_sweep_line(line_p, line_gmin, line_gmax, line_res, line_o, out, err); };
  });

  auto* grid = sweep->add_subcommand("grid", "phase diagram in the g-J2 or J1-J2 plane");
  ParamFlags grid_p;
  OutputFlags grid_o;
  std::string plane = "g-J2";
  Axis ax{"J2", -0.4, 0.4, 81}, ay{"g", 0.7, 1.3, 61};
  grid->add_option("--plane", plane, "g-J2 (fixed J1) or J1-J2 (cells at fixed g)")
      ->check(CLI::IsMember({"g-J2", "J1-J2"}))
      ->capture_default_str();
  grid_p.add(grid);
  grid->add_option("--j2-min", ax.min, "J2 axis start")->capture_default_str();
  grid->add_option("--j2-max", ax.max, "J2 axis end")->capture_default_str();
  grid->add_option("--j2-steps", ax.steps, "J2 samples")->capture_default_str();
  grid->add_option("--y-min", ay.min, "g or J1 axis start")->capture_default_str();
  grid->add_option("--y-max", ay.max, "g or J1 axis end")->capture_default_str();
  grid->add_option("--y-steps", ay.steps, "g or J1 samples")->capture_default_str();
  grid_o.add(grid, {"json"});
  grid->callback([&] {
    action = [&] {
      return cmd_sweep_grid(plane, grid_p, ax, ay, resolve_workers(workers_flag), grid_o, out, err);
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "run acceptance criteria");
  std::string scope = "all";
  std::uint64_t seed = AcceptanceOptions{}.seed;
  verify->add_option("--scope", scope, "formulas, oracle, spectrum or all")
      ->check(CLI::IsMember({"formulas", "oracle", "spectrum", "all"}))
      ->capture_default_str();
  verify->add_option("--seed", seed, "random seed for sampled criteria")->capture_default_str();
  verify->callback([&] { action = [&] { return cmd_verify(scope, seed, resolve_workers(workers_flag), out); }; });

  // oracle
  auto* oracle = app.add_subcommand("oracle", "brute-force minimisation and transition detection");
  oracle->require_subcommand(1);
  OracleConfig ocfg;
  auto add_oracle_flags = [&](CLI::App* c) {
    c->add_option("--grid-points", ocfg.grid_points_per_axis, "grid nodes per axis")->capture_default_str();
    c->add_option("--refine-tolerance", ocfg.refine_tolerance, "gradient norm after descent")->capture_default_str();
    c->add_option("--cluster-radius", ocfg.cluster_radius, "minima merge radius")->capture_default_str();
    c->add_option("--energy-tolerance", ocfg.energy_tolerance, "degeneracy energy window")->capture_default_str();
  };
  auto* ominimize = oracle->add_subcommand("minimize", "all local minima and the global set at one point");
  ParamFlags om_p;
  OutputFlags om_o;
  om_p.add(ominimize);
  add_oracle_flags(ominimize);
  om_o.add(ominimize, {"text", "json"});
  ominimize->callback([&] {
    action = [&] {
      ocfg.workers = resolve_workers(workers_flag);
      return cmd_oracle_minimize(om_p, ocfg, om_o, out);
    };
  });
  auto* otrans = oracle->add_subcommand("transitions", "transitions along g from oracle energies");
  ParamFlags ot_p;
  OutputFlags ot_o;
  double ot_gmin = 0.5, ot_gmax = 1.5;
  ot_p.add(otrans, false);
  otrans->add_option("--g-min", ot_gmin, "window start")->capture_default_str();
  otrans->add_option("--g-max", ot_gmax, "window end")->capture_default_str();
  otrans->add_option("--derivative-step", ocfg.derivative_step, "node spacing in g")->capture_default_str();
  add_oracle_flags(otrans);
  ot_o.add(otrans, {"text", "json"});
  otrans->callback([&] {
    action = [&] {
      ocfg.workers = resolve_workers(workers_flag);
      return cmd_oracle_transitions(ot_p, ot_gmin, ot_gmax, ocfg, ot_o, out);
    };
  });

  // exponent
  auto* exponent = app.add_subcommand("exponent", "power-law fits at the onset");
  ParamFlags ex_p;
  OutputFlags ex_o;
  std::string quantity = "gap", side = "above", branch = "active";
  int points = 13;
  ex_p.add(exponent, false);
  exponent->add_option("--quantity", quantity, "gap (soft mode) or order (max |alpha|)")
      ->check(CLI::IsMember({"gap", "order"}))
      ->capture_default_str();
  exponent->add_option("--side", side, "below or above the critical coupling")
      ->check(CLI::IsMember({"below", "above"}))
      ->capture_default_str();
  exponent->add_option("--branch", branch, "active, plus (finite momentum) or minus (zero momentum)")
      ->check(CLI::IsMember({"active", "plus", "minus"}))
      ->capture_default_str();
  exponent->add_option("--points", points, "samples in the fit window")->capture_default_str();
  ex_o.add(exponent, {"text", "json"});
  exponent->callback([&] {
    action = [&] { return cmd_exponent(ex_p, quantity, side, branch, points, ex_o, out); };
  });

  std::vector<const char*> argv{kToolName};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    report(err, {kExitInvalid, "invalid_arguments", "", e.what()});
    return kExitInvalid;
  }

  try {
    return action ? action() : kExitInvalid;
  } catch (const Failure& f) {
    report(err, f);
    return f.code;
  } catch (const ParameterError& e) {
    report(err, {kExitInvalid, "invalid_parameter", e.field(), e.what()});
    return kExitInvalid;
  } catch (const DomainError& e) {
    report(err, {kExitInvalid, "domain_error", "", e.what()});
    return kExitInvalid;
  } catch (const PreconditionError& e) {
    report(err, {kExitInvalid, "precondition", "", e.what()});
    return kExitInvalid;
  } catch (const SolverError& e) {
    report(err, {kExitFailure, "solver_failure", "", e.what()});
    return kExitFailure;
  } catch (const UnstableBackground& e) {
    report(err, {kExitFailure, "unstable_background", "", e.what()});
    return kExitFailure;
  } catch (const std::exception& e) {
    report(err, {kExitFailure, "error", "", e.what()});
    return kExitFailure;
  }
}

}  // namespace dtrimer::cli
