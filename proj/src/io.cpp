#include "dtrimer/io.hpp"

#include "dtrimer/version.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dtrimer {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

json provenance() {
  return {{"tool", kToolName}, {"version", kVersion}, {"timestamp", output_timestamp()}};
}

json params_json(const ModelParams& p) {
  return {{"omega", p.omega}, {"Omega", p.Omega}, {"g", p.g}, {"J1", p.J1}, {"J2", p.J2}};
}

ModelParams params_from(const json& j) {
  ModelParams p;
  p.omega = j.at("omega").get<double>();
  p.Omega = j.at("Omega").get<double>();
  p.g = j.at("g").get<double>();
  p.J1 = j.at("J1").get<double>();
  p.J2 = j.at("J2").get<double>();
  return p;
}

json record_json(const PointRecord& r) {
  json eps = json::array();
  for (double e : r.eps) eps.push_back(number(e));
  return {{"g", r.g},
          {"J1", r.J1},
          {"J2", r.J2},
          {"phase", to_string(r.phase)},
          {"energy", number(r.energy)},
          {"alpha", {number(r.alpha[0]), number(r.alpha[1]), number(r.alpha[2])}},
          {"eps", eps},
          {"B_tilde", number(r.B_tilde)},
          {"degeneracy", r.degeneracy},
          {"soft_mode_gap", number(r.soft_mode_gap)},
          {"ok", r.ok},
          {"error", r.error}};
}

PointRecord record_from(const json& j) {
  PointRecord r;
  r.g = j.at("g").get<double>();
  r.J1 = j.at("J1").get<double>();
  r.J2 = j.at("J2").get<double>();
  r.phase = phase_from_string(j.at("phase").get<std::string>());
  r.energy = number(j.at("energy"));
  for (int n = 0; n < 3; ++n) r.alpha[n] = number(j.at("alpha").at(n));
  for (int k = 0; k < 6; ++k) r.eps[k] = number(j.at("eps").at(k));
  r.B_tilde = number(j.at("B_tilde"));
  r.degeneracy = j.at("degeneracy").get<int>();
  r.soft_mode_gap = number(j.at("soft_mode_gap"));
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

json axis_json(const Axis& a) {
  return {{"name", a.name}, {"min", a.min}, {"max", a.max}, {"steps", a.steps}};
}

Axis axis_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("min").get<double>(), j.at("max").get<double>(),
          j.at("steps").get<int>()};
}

json point_json(const std::optional<std::array<double, 2>>& p) {
  return p ? json{(*p)[0], (*p)[1]} : json(nullptr);
}

std::optional<std::array<double, 2>> point_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return std::array<double, 2>{j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "g",    "J1",   "J2",   "phase", "energy", "alpha1", "alpha2",  "alpha3",     "eps1",
      "eps2", "eps3", "eps4", "eps5",  "eps6",   "B_tilde", "degeneracy", "error"};
  return cols;
}

void write_records_csv(std::ostream& out, const std::vector<PointRecord>& records) {
  out << "# " << kToolName << ' ' << kVersion << '\n';
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << format_double(r.g) << ',' << format_double(r.J1) << ',' << format_double(r.J2) << ','
        << (r.ok ? to_string(r.phase) : "ERROR") << ',' << format_double(r.energy);
    for (int n = 0; n < 3; ++n) out << ',' << format_double(r.alpha[n]);
    for (double e : r.eps) out << ',' << format_double(e);
    out << ',' << format_double(r.B_tilde) << ',' << r.degeneracy << ',' << quote_csv(r.error) << '\n';
  }
}

std::vector<PointRecord> read_records_csv(std::istream& in) {
  std::vector<PointRecord> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // a quoted field may span lines
    std::string more;
    while (std::count(line.begin(), line.end(), '"') % 2 == 1 && std::getline(in, more)) line += "\n" + more;
    const auto cells = split_csv(line);
    if (!header) {
      if (cells != csv_columns()) throw std::runtime_error("unexpected CSV header");
      header = true;
      continue;
    }
    if (cells.size() != csv_columns().size()) throw std::runtime_error("CSV row has wrong column count");
    PointRecord r;
    r.g = parse_double(cells[0]);
    r.J1 = parse_double(cells[1]);
    r.J2 = parse_double(cells[2]);
    r.ok = cells[3] != "ERROR";
    if (r.ok) r.phase = phase_from_string(cells[3]);
    r.energy = parse_double(cells[4]);
    for (int n = 0; n < 3; ++n) r.alpha[n] = parse_double(cells[5 + n]);
    for (int k = 0; k < 6; ++k) r.eps[k] = parse_double(cells[8 + k]);
    r.B_tilde = parse_double(cells[14]);
    r.degeneracy = std::stoi(cells[15]);
    r.error = cells[16];
    r.soft_mode_gap = r.eps[0];
    out.push_back(r);
  }
  return out;
}

std::string output_timestamp() {
  std::time_t t;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string records_to_json(const std::vector<PointRecord>& records, const ModelParams& base,
                            double g_min, double g_max) {
  json doc = provenance();
  doc["kind"] = "g_line";
  doc["parameters"] = params_json(base);
  doc["g_min"] = g_min;
  doc["g_max"] = g_max;
  doc["resolution"] = records.size();
  json recs = json::array();
  int failed = 0;
  for (const auto& r : records) {
    recs.push_back(record_json(r));
    if (!r.ok) ++failed;
  }
  doc["failed_points"] = failed;
  json sw = json::array();
  for (const auto& s : label_switches(records))
    sw.push_back({{"g_before", s.g_before}, {"g_after", s.g_after}, {"from", to_string(s.from)},
                  {"to", to_string(s.to)}});
  doc["switches"] = sw;
  doc["records"] = recs;
  return doc.dump(2) + "\n";
}

std::vector<PointRecord> records_from_json(const std::string& text) {
  const json doc = json::parse(text);
  std::vector<PointRecord> out;
  for (const auto& r : doc.at("records")) out.push_back(record_from(r));
  return out;
}

std::string grid_to_json(const PhaseDiagramGrid& grid) {
  json doc = provenance();
  doc["kind"] = "phase_diagram";
  doc["parameters"] = params_json(grid.fixed);
  doc["axis_x"] = axis_json(grid.axis_x);
  doc["axis_y"] = axis_json(grid.axis_y);
  json cells = json::array();
  for (const auto& c : grid.cells)
    cells.push_back({{"label", to_string(c.label)},
                     {"energy", number(c.energy)},
                     {"soft_mode_gap", number(c.soft_mode_gap)},
                     {"degeneracy", c.degeneracy},
                     {"region", c.region},
                     {"sequence", c.sequence},
                     {"ok", c.ok},
                     {"error", c.error}});
  doc["cells"] = cells;
  json bounds = json::array();
  for (const auto& b : grid.boundaries) {
    json pts = json::array();
    for (const auto& p : b.points) pts.push_back({p[0], p[1]});
    bounds.push_back({{"kind", to_string(b.kind)}, {"points", pts}});
  }
  doc["boundaries"] = bounds;
  doc["max_boundary_deviation"] = number(grid.max_boundary_deviation);
  doc["triple_point_numeric"] = point_json(grid.triple_point_numeric);
  doc["triple_point_analytic"] = point_json(grid.triple_point_analytic);
  doc["failed_cells"] = grid.failed_cells;
  return doc.dump(2) + "\n";
}

PhaseDiagramGrid grid_from_json(const std::string& text) {
  const json doc = json::parse(text);
  PhaseDiagramGrid g;
  g.fixed = params_from(doc.at("parameters"));
  g.axis_x = axis_from(doc.at("axis_x"));
  g.axis_y = axis_from(doc.at("axis_y"));
  for (const auto& c : doc.at("cells")) {
    CellSummary s;
    s.label = phase_from_string(c.at("label").get<std::string>());
    s.energy = number(c.at("energy"));
    s.soft_mode_gap = number(c.at("soft_mode_gap"));
    s.degeneracy = c.at("degeneracy").get<int>();
    s.region = c.at("region").get<int>();
    s.sequence = c.at("sequence").get<std::string>();
    s.ok = c.at("ok").get<bool>();
    s.error = c.at("error").get<std::string>();
    g.cells.push_back(s);
  }
  for (const auto& b : doc.at("boundaries")) {
    Polyline pl;
    pl.kind = boundary_kind_from_string(b.at("kind").get<std::string>());
    for (const auto& p : b.at("points")) pl.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    g.boundaries.push_back(pl);
  }
  g.max_boundary_deviation = number(doc.at("max_boundary_deviation"));
  g.triple_point_numeric = point_from(doc.at("triple_point_numeric"));
  g.triple_point_analytic = point_from(doc.at("triple_point_analytic"));
  g.failed_cells = doc.at("failed_cells").get<int>();
  return g;
}

}  // namespace dtrimer
