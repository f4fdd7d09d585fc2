#include "dtrimer/oracle.hpp"

#include "dtrimer/errors.hpp"
#include "dtrimer/parallel.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace dtrimer {

void validate(const OracleConfig& c) {
  if (c.grid_points_per_axis < 3)
    throw ParameterError("grid_points_per_axis", "grid_points_per_axis must be at least 3");
  if (!(c.refine_tolerance > 0)) throw ParameterError("refine_tolerance", "refine_tolerance must be positive");
  if (!(c.cluster_radius > 0)) throw ParameterError("cluster_radius", "cluster_radius must be positive");
  if (!(c.derivative_step > 0)) throw ParameterError("derivative_step", "derivative_step must be positive");
  if (!(c.energy_tolerance > 0)) throw ParameterError("energy_tolerance", "energy_tolerance must be positive");
}

Phase pattern_label(const Vec3& x, double tol) {
  if (x.cwiseAbs().maxCoeff() < tol) return Phase::NP;
  if (x.maxCoeff() - x.minCoeff() < tol) return Phase::NSP;
  return Phase::FSP;
}

std::string to_string(TransitionOrder order) {
  return order == TransitionOrder::First ? "first" : "second";
}

namespace {

bool inside(const Vec3& x, double g) { return x.cwiseAbs().maxCoeff() < 0.5 * g; }

// Newton steps on |H| (eigenvalues floored away from zero) so flat and
// negatively curved directions still get usable steps, with Armijo
// backtracking that never leaves the domain. Returns false if the iteration
// budget ran out before the gradient met the tolerance or the point stalled.
bool descend(Vec3& x, const ModelParams& p, const OracleConfig& cfg) {
  for (int it = 0; it < 2000; ++it) {
    const Vec3 grad = gradient(x, p);
    const double gnorm = grad.cwiseAbs().maxCoeff();
    if (gnorm < cfg.refine_tolerance) return true;
    Eigen::SelfAdjointEigenSolver<Mat3> es(hessian(x, p));
    const Vec3 lam = es.eigenvalues().cwiseAbs().cwiseMax(1e-8);
    const Mat3& V = es.eigenvectors();
    Vec3 dir = -V * (V.transpose() * grad).cwiseQuotient(lam);
    if (!(dir.dot(grad) < 0.0)) dir = -grad;
    const double e0 = energy(x, p);
    const double slope = grad.dot(dir);
    double t = 1.0;
    bool moved = false;
    for (int h = 0; h < 80; ++h, t *= 0.5) {
      const Vec3 trial = x + t * dir;
      if (!inside(trial, p.g)) continue;
      const double et = energy(trial, p);
      const bool armijo = et <= e0 + 1e-4 * t * slope;
      // near convergence energy differences drown in rounding; accept a
      // gradient decrease that does not raise the energy beyond it
      const bool flat = et <= e0 + 8.0 * DBL_EPSILON * std::abs(e0) &&
                        gradient(trial, p).cwiseAbs().maxCoeff() < gnorm;
      if (armijo || flat) {
        x = trial;
        moved = true;
        break;
      }
    }
    if (!moved) return true;  // no representable descent left
  }
  return false;
}

void add_unique(std::vector<LocalMinimum>& out, const Vec3& x, const ModelParams& p, double radius) {
  for (const auto& m : out)
    if ((m.x - x).norm() < radius) return;
  out.push_back({x, energy(x, p)});
}

// Directions spanning the negative-curvature subspace of dimension k.
std::vector<Vec3> escape_directions(const Eigen::SelfAdjointEigenSolver<Mat3>& es, int k) {
  std::vector<Vec3> dirs;
  const Mat3 V = es.eigenvectors();
  if (k == 1) {
    dirs = {V.col(0), -V.col(0)};
  } else if (k == 2) {
    for (int a = 0; a < 12; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / 12.0;
      dirs.push_back(std::cos(phi) * V.col(0) + std::sin(phi) * V.col(1));
    }
  } else {
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int l = -1; l <= 1; ++l) {
          if (i == 0 && j == 0 && l == 0) continue;
          const Vec3 d = i * V.col(0) + j * V.col(1) + l * V.col(2);
          dirs.push_back(d.normalized());
        }
  }
  return dirs;
}

void refine_from(const Vec3& start, const ModelParams& p, const OracleConfig& cfg, int depth,
                 std::vector<LocalMinimum>& out) {
  Vec3 x = start;
  const bool converged = descend(x, p, cfg);
  Eigen::SelfAdjointEigenSolver<Mat3> es(hessian(x, p));
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int negative = 0;
  for (int i = 0; i < 3; ++i)
    if (es.eigenvalues()[i] < -1e-12 * scale) ++negative;
  if (negative == 0) {
    if (converged) add_unique(out, x, p, cfg.cluster_radius);
    return;
  }
  if (depth >= 4) return;
  const double eta = 1e-3 * p.g;
  for (const Vec3& d : escape_directions(es, negative)) {
    Vec3 y = x + eta * d;
    if (!inside(y, p.g)) continue;
    refine_from(y, p, cfg, depth + 1, out);
  }
}

}  // namespace

std::vector<LocalMinimum> local_minima(const ModelParams& p, const OracleConfig& cfg) {
  validate(p);
  validate(cfg);
  std::vector<LocalMinimum> out;
  if (p.g == 0.0) {
    out.push_back({Vec3::Zero(), -1.5});
    return out;
  }

  const int n = cfg.grid_points_per_axis;
  const double step = p.g / (n + 1);
  const double C = c_tilde(p.J1);
  const double B = b_tilde(p.J1, p.J2, p.g);
  std::vector<double> xs(n), site(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = -0.5 * p.g + (i + 1) * step;
    site[i] = C * xs[i] * xs[i] - 0.5 * std::sqrt(1.0 - 4.0 * xs[i] * xs[i] / (p.g * p.g));
  }
  // the middle node sits on x = 0 for odd n; make it exact
  if (n % 2 == 1) xs[n / 2] = 0.0, site[n / 2] = -0.5;

  auto idx = [n](int i, int j, int k) { return (static_cast<std::size_t>(i) * n + j) * n + k; };
  std::vector<double> grid(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        grid[idx(i, j, k)] = site[i] + site[j] + site[k] +
                             2.0 * B * (xs[i] * xs[j] + xs[j] * xs[k] + xs[k] * xs[i]);

  auto is_local_min = [&](int i, int j, int k) {
    const double e = grid[idx(i, j, k)];
    static constexpr std::array<std::array<int, 3>, 6> faces{
        {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
    for (const auto& f : faces) {
      const int a = i + f[0], b = j + f[1], c = k + f[2];
      if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n) continue;
      if (grid[idx(a, b, c)] < e) return false;
    }
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          const int a = i + di, b = j + dj, c = k + dk;
          if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n) continue;
          if (grid[idx(a, b, c)] < e) return false;
        }
    return true;
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (is_local_min(i, j, k)) refine_from(Vec3(xs[i], xs[j], xs[k]), p, cfg, 0, out);

  std::sort(out.begin(), out.end(), [](const LocalMinimum& a, const LocalMinimum& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return std::lexicographical_compare(a.x.data(), a.x.data() + 3, b.x.data(), b.x.data() + 3);
  });
  return out;
}

PhaseResult brute_force_minimize(const ModelParams& p, const OracleConfig& cfg) {
  std::vector<LocalMinimum> minima = local_minima(p, cfg);
  // x = 0 is always stationary and inside the domain
  if (minima.empty()) minima.push_back({Vec3::Zero(), energy(Vec3::Zero(), p)});
  const double lowest = minima.front().energy;
  std::vector<Vec3> global;
  for (const auto& m : minima)
    if (m.energy <= lowest + cfg.energy_tolerance) global.push_back(m.x);
  std::sort(global.begin(), global.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });

  PhaseResult r;
  r.energy = lowest;
  r.degeneracy = static_cast<int>(global.size());
  for (const Vec3& x : global) r.all_minima.push_back(make_state(x, p));
  r.representative = r.all_minima.front();
  r.label = pattern_label(r.representative.x);
  return r;
}

EnergyCurve oracle_energy_curve(const ModelParams& base, double g_min, double g_max,
                                const OracleConfig& cfg) {
  validate(cfg);
  EnergyCurve curve;
  if (!(g_max >= g_min)) return curve;
  const std::size_t count =
      static_cast<std::size_t>(std::floor((g_max - g_min) / cfg.derivative_step + 1e-9)) + 1;
  curve.g.resize(count);
  curve.energy.resize(count);
  curve.label.resize(count);
  parallel_for(count, cfg.workers, [&](std::size_t i) {
    const double g = g_min + static_cast<double>(i) * cfg.derivative_step;
    const PhaseResult r = brute_force_minimize(with_g(base, g), cfg);
    curve.g[i] = g;
    curve.energy[i] = r.energy;
    curve.label[i] = r.label;
  });
  return curve;
}

namespace {

struct LineFit {
  double intercept, slope, residual;
};

LineFit fit_line(const std::array<double, 3>& t, const std::array<double, 3>& y) {
  const double mt = (t[0] + t[1] + t[2]) / 3.0, my = (y[0] + y[1] + y[2]) / 3.0;
  double stt = 0, sty = 0;
  for (int i = 0; i < 3; ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
  }
  LineFit f;
  f.slope = sty / stt;
  f.intercept = my - f.slope * mt;
  f.residual = 0.0;
  for (int i = 0; i < 3; ++i)
    f.residual = std::max(f.residual, std::abs(y[i] - f.intercept - f.slope * t[i]));
  return f;
}

struct GapStat {
  double jump1 = 0, noise1 = 0, jump2 = 0, noise2 = 0;
};

constexpr std::array<int, 3> kStrides{1, 2, 4};
constexpr int kReach = 2 * 4;  // nodes used on each side of a gap

// Extrapolated jumps of dE/dg and d2E/dg2 across the gap between nodes j and j+1,
// from one-sided differences with strides 1, 2 and 4.
GapStat gap_statistic(const std::vector<double>& E, std::size_t j, double h, double escale) {
  std::array<double, 3> t1, d1, t2, d2;
  for (int a = 0; a < 3; ++a) {
    const int s = kStrides[a];
    const double left = (E[j] - E[j - s]) / (s * h);
    const double right = (E[j + 1 + s] - E[j + 1]) / (s * h);
    t1[a] = (s + 1) * h;
    d1[a] = right - left;
    const double left2 = (E[j] - 2.0 * E[j - s] + E[j - 2 * s]) / (s * s * h * h);
    const double right2 = (E[j + 1 + 2 * s] - 2.0 * E[j + 1 + s] + E[j + 1]) / (s * s * h * h);
    t2[a] = (2 * s + 1) * h;
    d2[a] = right2 - left2;
  }
  const LineFit f1 = fit_line(t1, d1), f2 = fit_line(t2, d2);
  const double curv_left = (E[j] - 2.0 * E[j - 2] + E[j - 4]) / (4.0 * h * h);
  const double curv_right = (E[j + 5] - 2.0 * E[j + 3] + E[j + 1]) / (4.0 * h * h);
  GapStat st;
  st.jump1 = f1.intercept;
  st.noise1 = f1.residual + h * std::max(std::abs(curv_left), std::abs(curv_right)) +
              h * h * std::abs(f2.slope) + 8.0 * DBL_EPSILON * escale / h;
  st.jump2 = f2.intercept;
  st.noise2 = f2.residual + h * std::abs(f2.slope) + 64.0 * DBL_EPSILON * escale / (h * h);
  return st;
}

struct Group {
  std::size_t best;
  double ratio;
  std::size_t first, last;
};

template <class Ratio>
std::vector<Group> group_candidates(std::size_t begin, std::size_t end, Ratio ratio,
                                    const std::vector<bool>& excluded) {
  std::vector<Group> groups;
  for (std::size_t j = begin; j < end; ++j) {
    if (excluded[j] || !(ratio(j) > 1.0)) continue;
    if (!groups.empty() && groups.back().last + 1 == j) {
      groups.back().last = j;
      if (ratio(j) > groups.back().ratio) groups.back().best = j, groups.back().ratio = ratio(j);
    } else {
      groups.push_back({j, ratio(j), j, j});
    }
  }
  return groups;
}

std::optional<double> branch_energy(const ModelParams& p, Phase label, const OracleConfig& cfg) {
  for (const auto& m : local_minima(p, cfg))
    if (pattern_label(m.x) == label) return m.energy;
  return std::nullopt;
}

// Bisection for the g where the predicate switches from true to false on [lo, hi].
template <class Pred>
double bisect_switch(double lo, double hi, Pred left_side) {
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (left_side(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Transition> detect_transitions(const ModelParams& base, double g_min, double g_max,
                                           const OracleConfig& cfg) {
  validate(base);
  validate(cfg);
  const EnergyCurve curve = oracle_energy_curve(base, g_min, g_max, cfg);
  std::vector<Transition> out;
  const std::size_t N = curve.g.size();
  if (N < 2 * kReach + 2) return out;
  const double h = cfg.derivative_step;
  double escale = 0.0;
  for (double e : curve.energy) escale = std::max(escale, std::abs(e));

  std::vector<GapStat> stats(N);
  const std::size_t begin = kReach, end = N - 1 - kReach;  // gaps j in [begin, end)
  for (std::size_t j = begin; j < end; ++j) stats[j] = gap_statistic(curve.energy, j, h, escale);

  auto label_at = [&](std::ptrdiff_t i) {
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(N) - 1);
    return curve.label[static_cast<std::size_t>(i)];
  };

  std::vector<bool> none(N, false);
  const auto first = group_candidates(
      begin, end, [&](std::size_t j) { return std::abs(stats[j].jump1) / stats[j].noise1; }, none);

  std::vector<bool> excluded(N, false);
  for (const Group& gr : first) {
    const std::size_t lo = gr.first > static_cast<std::size_t>(kReach + 2) ? gr.first - kReach - 2 : 0;
    for (std::size_t j = lo; j < std::min(N, gr.last + kReach + 3); ++j) excluded[j] = true;

    Transition t;
    t.order = TransitionOrder::First;
    t.jump = stats[gr.best].jump1;
    t.noise_floor = stats[gr.best].noise1;
    t.inconclusive = !(gr.ratio > 3.0);
    t.from = label_at(static_cast<std::ptrdiff_t>(gr.first) - 1);
    t.to = label_at(static_cast<std::ptrdiff_t>(gr.last) + 2);
    double lo_g = curve.g[gr.first] - h, hi_g = curve.g[gr.last + 1] + h;
    t.g_star = 0.5 * (curve.g[gr.best] + curve.g[gr.best + 1]);
    if (!t.inconclusive && t.from != t.to) {
      auto diff = [&](double g) -> std::optional<double> {
        const ModelParams p = with_g(base, g);
        auto a = branch_energy(p, t.from, cfg), b = branch_energy(p, t.to, cfg);
        if (!a || !b) return std::nullopt;
        return *a - *b;
      };
      const auto dlo = diff(lo_g), dhi = diff(hi_g);
      if (dlo && dhi && *dlo <= 0.0 && *dhi >= 0.0) {
        t.g_star = bisect_switch(lo_g, hi_g, [&](double g) {
          const auto d = diff(g);
          return d ? *d <= 0.0 : brute_force_minimize(with_g(base, g), cfg).label == t.from;
        });
      } else {
        t.g_star = bisect_switch(lo_g, hi_g, [&](double g) {
          return brute_force_minimize(with_g(base, g), cfg).label == t.from;
        });
      }
    }
    out.push_back(t);
  }

  const auto second = group_candidates(
      begin, end, [&](std::size_t j) { return std::abs(stats[j].jump2) / stats[j].noise2; }, excluded);
  for (const Group& gr : second) {
    Transition t;
    t.order = TransitionOrder::Second;
    t.jump = stats[gr.best].jump2;
    t.noise_floor = stats[gr.best].noise2;
    t.inconclusive = !(gr.ratio > 3.0);
    t.from = label_at(static_cast<std::ptrdiff_t>(gr.first) - 1);
    t.to = label_at(static_cast<std::ptrdiff_t>(gr.last) + 2);
    t.g_star = 0.5 * (curve.g[gr.best] + curve.g[gr.best + 1]);
    if (!t.inconclusive) {
      const double lo_g = curve.g[gr.first] - h, hi_g = curve.g[gr.last + 1] + h;
      auto normal = [&](double g) {
        return brute_force_minimize(with_g(base, g), cfg).representative.x.cwiseAbs().maxCoeff() < 1e-6;
      };
      if (normal(lo_g) && !normal(hi_g)) t.g_star = bisect_switch(lo_g, hi_g, normal);
    }
    out.push_back(t);
  }

  std::sort(out.begin(), out.end(),
            [](const Transition& a, const Transition& b) { return a.g_star < b.g_star; });
  return out;
}

}  // namespace dtrimer
