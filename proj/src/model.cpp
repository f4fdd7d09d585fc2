#include "dtrimer/model.hpp"

#include "dtrimer/errors.hpp"

#include <cmath>
#include <sstream>

namespace dtrimer {

namespace {

bool finite(double v) { return std::isfinite(v); }

void require_hopping(const char* field, double J) {
  if (!finite(J) || !(J > -0.5 && J < 0.5)) {
    std::ostringstream os;
    os << field << " = " << J << " is outside the small-hopping domain -1/2 < " << field
       << " < 1/2";
    throw ParameterError(field, os.str());
  }
}

}  // namespace

double ModelParams::lambda() const { return 0.5 * g * std::sqrt(omega * Omega); }

void validate(const ModelParams& p) {
  if (!finite(p.omega) || p.omega <= 0.0)
    throw ParameterError("omega", "omega must be strictly positive");
  if (!finite(p.Omega) || p.Omega <= 0.0)
    throw ParameterError("Omega", "Omega must be strictly positive");
  if (!finite(p.g) || p.g < 0.0) throw ParameterError("g", "g must be finite and >= 0");
  require_hopping("J1", p.J1);
  require_hopping("J2", p.J2);
}

ModelParams make_params(double g, double J1, double J2, double omega, double Omega) {
  ModelParams p{omega, Omega, g, J1, J2};
  validate(p);
  return p;
}

ModelParams with_g(ModelParams params, double g) {
  params.g = g;
  return params;
}

double c_tilde(double J1) { return (1.0 + J1) / ((-1.0 + J1) * (1.0 + 2.0 * J1)); }

double b_tilde(double J1, double J2, double g) {
  if (!(g > 0.0)) throw DomainError("B~ contains 1/g^2 and is undefined at g = 0");
  return J1 / (1.0 + J1 - 2.0 * J1 * J1) + J2 / (g * g);
}

double a_tilde(double J1, double J2, double g) {
  if (!(g > 0.0)) throw DomainError("A~ is undefined at g = 0");
  return (J2 + J1 * (g * g + J2 - 2.0 * J1 * J2)) / ((1.0 + 2.0 * J1) * (1.0 - J1));
}

Coefficients coefficients(const ModelParams& p) {
  validate(p);
  return {c_tilde(p.J1), b_tilde(p.J1, p.J2, p.g), a_tilde(p.J1, p.J2, p.g)};
}

Mat3 hopping_matrix(double J1) {
  Mat3 S = Mat3::Constant(J1);
  S.diagonal().setOnes();
  return S;
}

Vec3 x_from_alpha(const Vec3& alpha, const ModelParams& p) {
  validate(p);
  return hopping_matrix(p.J1) * alpha;
}

Vec3 alpha_from_x(const Vec3& x, const ModelParams& p) {
  validate(p);
  // S = (1 - J1) I + J1 * ones; its inverse has the same two-parameter form.
  const double J1 = p.J1;
  const double diag = (1.0 + J1) / ((1.0 - J1) * (1.0 + 2.0 * J1));
  const double off = -J1 / ((1.0 - J1) * (1.0 + 2.0 * J1));
  const double sum = x.sum();
  return (diag - off) * x + Vec3::Constant(off * sum);
}

double critical_coupling_at(double J1, double J2, Momentum k) {
  const double c = (k == Momentum::Zero) ? 1.0 : -0.5;
  return std::sqrt((1.0 + 2.0 * J1 * c) * (1.0 + 2.0 * J2 * c));
}

CriticalCouplings critical_couplings(const ModelParams& p) {
  validate(p);
  CriticalCouplings cc;
  cc.g_c_plus = critical_coupling_at(p.J1, p.J2, Momentum::Finite);
  cc.g_c_minus = critical_coupling_at(p.J1, p.J2, Momentum::Zero);
  if (cc.g_c_plus < cc.g_c_minus) {
    cc.g_c = cc.g_c_plus;
    cc.k_star = Momentum::Finite;
  } else {
    cc.g_c = cc.g_c_minus;
    cc.k_star = Momentum::Zero;
  }
  return cc;
}

double dividing_curve(double J2) {
  if (!(J2 > -1.0)) throw DomainError("dividing curve requires J2 > -1");
  return -J2 / (1.0 + J2);
}

std::optional<double> first_order_point(double J1, double J2) {
  if (J1 == 0.0) return std::nullopt;
  const double radicand = (-1.0 - J1 + 2.0 * J1 * J1) * J2 / J1;
  if (!(radicand > 0.0)) return std::nullopt;
  return std::sqrt(radicand);
}

std::optional<double> first_order_point(const ModelParams& p) {
  validate(p);
  return first_order_point(p.J1, p.J2);
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::NP: return "NP";
    case Phase::NSP: return "NSP";
    case Phase::FSP: return "FSP";
  }
  return "?";
}

Phase phase_from_string(const std::string& name) {
  if (name == "NP") return Phase::NP;
  if (name == "NSP") return Phase::NSP;
  if (name == "FSP") return Phase::FSP;
  throw std::invalid_argument("unknown phase label '" + name + "'");
}

std::string sequence_to_string(const std::vector<Phase>& sequence) {
  std::string out;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i) out += "->";
    out += to_string(sequence[i]);
  }
  return out;
}

std::vector<Phase> region_sequence(int region) {
  using enum Phase;
  switch (region) {
    case 1: return {NP, FSP};
    case 2: return {NP, FSP};
    case 3: return {NP, FSP, NSP};
    case 4: return {NP, NSP};
    case 5: return {NP, NSP};
    case 6: return {NP, NSP, FSP};
    default: return {};
  }
}

int region_from_sequence(double J1, double J2, const std::vector<Phase>& seq) {
  using enum Phase;
  const std::vector<Phase> np_fsp{NP, FSP}, np_nsp{NP, NSP};
  const std::vector<Phase> np_fsp_nsp{NP, FSP, NSP}, np_nsp_fsp{NP, NSP, FSP};
  if (J1 > 0 && J2 < 0) {
    if (seq == np_fsp) return 1;
    if (seq == np_nsp_fsp) return 6;
  } else if (J1 > 0 && J2 > 0) {
    if (seq == np_fsp) return 2;
  } else if (J1 < 0 && J2 > 0) {
    if (seq == np_fsp_nsp) return 3;
    if (seq == np_nsp) return 4;
  } else if (J1 < 0 && J2 < 0) {
    if (seq == np_nsp) return 5;
  }
  return 0;
}

RegionLabel classify_region(double J1, double J2) {
  require_hopping("J1", J1);
  require_hopping("J2", J2);

  RegionLabel label;
  const CriticalCouplings cc = critical_couplings(make_params(0.0, J1, J2));
  label.g_c = cc.g_c;
  label.g_L = first_order_point(J1, J2);

  const double curve = dividing_curve(J2);
  const bool on_j1_zero = std::abs(J1) < kBoundaryTolerance;
  const bool on_j2_zero = std::abs(J2) < kBoundaryTolerance;
  const bool on_curve = std::abs(J1 - curve) < kBoundaryTolerance;

  auto boundary = [&](std::vector<int> adjacent) {
    label.region = 0;
    label.boundary = true;
    label.adjacent = std::move(adjacent);
    return label;
  };

  if (on_j1_zero && on_j2_zero) return boundary({1, 2, 3, 4, 5, 6});
  if (on_j1_zero) return J2 > 0 ? boundary({2, 3}) : boundary({5, 6});
  if (on_j2_zero) return J1 > 0 ? boundary({1, 2}) : boundary({4, 5});
  if (on_curve) return J2 < 0 ? boundary({1, 6}) : boundary({3, 4});

  const bool above = J1 > curve;
  int region = 0;
  if (J1 > 0 && J2 > 0) {
    region = 2;
  } else if (J1 < 0 && J2 < 0) {
    region = 5;
  } else if (J1 > 0) {
    region = above ? 1 : 6;
  } else {
    region = above ? 3 : 4;
  }

  // In the mixed-sign quadrants the side of the curve is equivalent to the
  // ordering of g_L against the active critical coupling. A disagreement can
  // only come from rounding right at the curve.
  if (region == 1 || region == 6 || region == 3 || region == 4) {
    const double gL = *label.g_L;
    const bool gl_after_onset = gL > cc.g_c;
    const bool expect_after = (region == 6 || region == 3);
    if (gl_after_onset != expect_after) return boundary(J2 < 0 ? std::vector{1, 6} : std::vector{3, 4});
  }

  label.region = region;
  label.expected_sequence = region_sequence(region);
  return label;
}

}  // namespace dtrimer
