#pragma once

#include <string>
#include <vector>

#include "hcflow/ansatz.hpp"
#include "hcflow/forms.hpp"

namespace hcflow {

struct PinchingConstants {
  int n = 5;
  double c_quadratic = 0;    // 4/(3n)
  double c_cylindrical = 0;  // min{4/(3n), 1/(n-2)} for n >= 5
  double c_spherical = 0;    // 1/(n-1)
  double epsilon_cyl = 0.0;  // strictness of the cylindrical inequality
  double a_offset = 0.0;

  static PinchingConstants for_dim(int n, double epsilon_cyl = 0.0, double a_offset = 0.0) {
    require(n >= 2, ErrorKind::BadShape, "pinching constants need n >= 2");
    PinchingConstants k;
    k.n = n;
    k.c_quadratic = 4.0 / (3.0 * n);
    k.c_cylindrical = n >= 5 ? std::min(4.0 / (3.0 * n), 1.0 / (n - 2)) : 4.0 / (3.0 * n);
    k.c_spherical = 1.0 / (n - 1);
    k.epsilon_cyl = epsilon_cyl;
    k.a_offset = a_offset;
    require(epsilon_cyl >= 0 && a_offset >= 0, ErrorKind::BadShape, "pinching parameters");
    return k;
  }
};

/// Q = |A|^2 + a - c |H|^2; negative means pinched.
inline double pinching_Q(double A2, double H2, double c, double a = 0.0) {
  return A2 + a - c * H2;
}

inline double pinching_Q(const FundamentalForms& ff, const PinchingConstants& k) {
  return pinching_Q(ff.norm_A2, ff.norm_H2, k.c_quadratic, k.a_offset);
}

enum class PinchClass { Unpinched, CylindricallyPinched, SphericallyPinched };

inline const char* pinch_class_name(PinchClass c) {
  switch (c) {
    case PinchClass::Unpinched: return "Unpinched";
    case PinchClass::CylindricallyPinched: return "CylindricallyPinched";
    case PinchClass::SphericallyPinched: return "SphericallyPinched";
  }
  return "?";
}

/// Strongest pinching class of a point. Spherical implies the cylindrical
/// flag as well; callers needing the flags can compare against the enum order.
inline PinchClass classify_pinching(double A2, double H2, const PinchingConstants& k) {
  require(H2 > 0, ErrorKind::ZeroMeanCurvature, "classification needs |H| > 0");
  if (A2 - k.c_spherical * H2 <= 0) return PinchClass::SphericallyPinched;
  if (A2 - k.c_cylindrical * H2 <= -k.epsilon_cyl * H2) return PinchClass::CylindricallyPinched;
  return PinchClass::Unpinched;
}

inline PinchClass classify_pinching(const FundamentalForms& ff, const PinchingConstants& k) {
  return classify_pinching(ff.norm_A2, ff.norm_H2, k);
}

struct ReactionTerms {
  double R1 = 0;
  double R2 = 0;
  double combo = 0;  // R1 - c R2
};

/// Reaction terms of the |A|^2 and |H|^2 evolution equations, from the second
/// fundamental form in orthonormal tangent and normal frames:
///   R1 = sum_{ab} (sum_{ij} h^a_ij h^b_ij)^2 + |Rm_perp|^2,
///   R2 = sum_{ij} (sum_a H_a h^a_ij)^2,
/// where Rm_perp_{ij ab} is the commutator [h^a, h^b]_ij. Whenever the input
/// is quadratically pinched (Q <= 0 at this c with a = 0), R1 - c R2 <= 0 is a
/// theorem; the function asserts it to guard the implementation.
inline ReactionTerms reaction_terms(const std::vector<Mat>& h, double c) {
  const int m = static_cast<int>(h.size());
  require(m >= 1, ErrorKind::BadShape, "reaction_terms needs at least one normal direction");
  const int n = static_cast<int>(h[0].rows());
  ReactionTerms out;
  Mat inner(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) inner(a, b) = h[a].cwiseProduct(h[b]).sum();
  out.R1 = inner.squaredNorm();
  double rmperp = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Mat comm = h[a] * h[b] - h[b] * h[a];
      rmperp += comm.squaredNorm();
    }
  out.R1 += rmperp;

  Vec Htr(m);
  for (int a = 0; a < m; ++a) Htr[a] = h[a].trace();
  Mat hH = Mat::Zero(n, n);
  for (int a = 0; a < m; ++a) hH += Htr[a] * h[a];
  out.R2 = hH.squaredNorm();
  out.combo = out.R1 - c * out.R2;

  const double A2 = inner.trace();
  const double H2 = Htr.squaredNorm();
  if (A2 - c * H2 <= 0) {
    const double scale = std::max(1.0, out.R1);
    require(out.combo <= 1e-12 * scale, ErrorKind::Internal,
            "reaction sign lemma violated for a pinched tensor");
  }
  return out;
}

/// Reaction terms of an ansatz point: h is block diagonal, so the normal
/// curvature part vanishes identically.
inline ReactionTerms reaction_terms(const ProfileForms& pf, int n, int m, double c) {
  // orthonormal normal frame in profile space: nu+ first when defined
  std::vector<Vec> frame;
  auto try_add = [&](Vec v) {
    v -= (v.dot(pf.t_z) / pf.phi2) * pf.t_z;
    for (const Vec& u : frame) v -= u.dot(v) * u;
    const double nv = v.norm();
    if (nv <= 1e-12) return false;
    frame.push_back(v / nv);
    return true;
  };
  if (pf.has_principal) try_add(pf.nu_plus);
  for (int e = 0; e < static_cast<int>(pf.t_z.size()) && static_cast<int>(frame.size()) < m; ++e) {
    Vec v = Vec::Zero(pf.t_z.size());
    v[e] = 1.0;
    try_add(v);
  }
  std::vector<Mat> h(m, Mat::Zero(n, n));
  for (int al = 0; al < m; ++al) {
    const double cs = pf.kappa_s.dot(frame[al]);
    const double ca = pf.kappa_a.dot(frame[al]);
    h[al](0, 0) = ca;
    for (int k = 1; k < n; ++k) h[al](k, k) = cs;
  }
  return reaction_terms(h, c);
}

struct SurgeryClassSpec {
  double R = 1.0;  // scale
  double alpha0 = 0.05, alpha1 = 0.1, alpha2 = 100.0;

  void validate() const {
    require(R > 0 && alpha0 > 0 && alpha1 > 0 && alpha2 > 0, ErrorKind::BadShape,
            "surgery class parameters must be positive");
  }
};

struct ClassMembership {
  // worst margins, nonnegative = condition holds
  double margin_pinch = 0;  // min_p [ (1/(n-2) - alpha0)|H|^2 - |A|^2 ]
  double margin_curv = 0;   // min_p |H| - alpha1/R
  double margin_area = 0;   // alpha2 R^n - area
  bool pinch_ok = false, curv_ok = false, area_ok = false;
  bool member() const { return pinch_ok && curv_ok && area_ok; }
};

inline ClassMembership class_membership(const std::vector<std::pair<double, double>>& A2H2,
                                        double area, int n, const SurgeryClassSpec& spec) {
  spec.validate();
  ClassMembership out;
  out.margin_pinch = std::numeric_limits<double>::infinity();
  out.margin_curv = std::numeric_limits<double>::infinity();
  for (const auto& [A2, H2] : A2H2) {
    out.margin_pinch =
        std::min(out.margin_pinch, (1.0 / (n - 2) - spec.alpha0) * H2 - A2);
    out.margin_curv = std::min(out.margin_curv, std::sqrt(H2) - spec.alpha1 / spec.R);
  }
  out.margin_area = spec.alpha2 * std::pow(spec.R, n) - area;
  out.pinch_ok = out.margin_pinch >= 0;
  out.curv_ok = out.margin_curv >= 0;
  out.area_ok = out.margin_area >= 0;
  return out;
}

inline ClassMembership class_membership(const ProfileGeometry& pg, const SurgeryClassSpec& spec) {
  const SymmetricAnsatz& a = pg.ansatz();
  require(a.end_lo != EndCondition::Open && a.end_hi != EndCondition::Open, ErrorKind::BadShape,
          "class membership needs a closed immersion");
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < pg.nodes(); ++i) {
    if (a.is_tip(i)) continue;
    pts.push_back({pg.forms(i).A2, pg.forms(i).H2});
  }
  return class_membership(pts, pg.area(), a.n, spec);
}

/// Constants of the a-priori estimates, calibrated once per run from the
/// initial data (sup of each ratio times a safety factor): the estimates fix
/// their existence but not their values.
struct MonitorConstants {
  double gamma1 = 0, gamma2 = 0;  // |nabla A|^2 <= g1 |A|^4 + g2 R^-4
  double gamma3 = 0, gamma4 = 0;  // |nabla^2 A|^2 <= g3 |A|^6 + g4 R^-4
  double c_sharp = 0, H_sharp = 0;
  double d_sharp = 0;  // 1/(8(n-1)^2 c#)
  double Theta = 0;    // 1 + (2+pi)(n-1) c#
  double naff_C = 0, naff_sigma = 0.1;

  void derive(int n) {
    require(c_sharp > 0, ErrorKind::BadShape, "c_sharp must be positive");
    d_sharp = 1.0 / (8.0 * (n - 1) * (n - 1) * c_sharp);
    Theta = 1.0 + (2.0 + M_PI) * (n - 1) * c_sharp;
  }
};

inline MonitorConstants calibrate_monitor_constants(const ProfileGeometry& pg, double R,
                                                    double safety = 2.0, double naff_sigma = 0.1) {
  MonitorConstants mc;
  mc.naff_sigma = naff_sigma;
  const SymmetricAnsatz& a = pg.ansatz();
  double sup_g1 = 0, sup_g3 = 0, sup_naff = 0, mean_H = 0, sup_csharp = 0;
  double sup_gA2 = 0, sup_h2 = 0;
  int cnt = 0;
  for (int i = 0; i < pg.nodes(); ++i) {
    if (a.is_tip(i)) continue;
    const ProfileForms& pf = pg.forms(i);
    mean_H += std::sqrt(pf.H2);
    ++cnt;
  }
  mean_H /= std::max(1, cnt);
  const double Hsharp = 2.0 * mean_H;
  for (int i = 0; i < pg.nodes(); ++i) {
    if (a.is_tip(i)) continue;
    const ProfileForms& pf = pg.forms(i);
    const double ga2 = pg.grad_A_norm(i) * pg.grad_A_norm(i);
    const double h2a = pg.hess_A_norm(i) * pg.hess_A_norm(i);
    sup_g1 = std::max(sup_g1, ga2 / (pf.A2 * pf.A2));
    sup_g3 = std::max(sup_g3, h2a / (pf.A2 * pf.A2 * pf.A2));
    sup_naff = std::max(sup_naff, pf.Wminus2 / std::pow(pf.H2, 1.0 - naff_sigma / 2.0));
    if (std::sqrt(pf.H2) >= 0.5 * Hsharp)
      sup_csharp = std::max(sup_csharp, pg.grad_H_norm(i) / pf.H2);
  }
  mc.gamma1 = std::max(1e-8, safety * sup_g1);
  mc.gamma2 = mc.gamma1 / std::pow(R, -4.0) * 1e-4 + 1e-12;  // small slack term
  mc.gamma3 = std::max(1e-8, safety * sup_g3);
  mc.gamma4 = mc.gamma2;
  mc.H_sharp = Hsharp;
  mc.c_sharp = std::max(1e-6, safety * sup_csharp);
  mc.naff_C = std::max(1e-12, safety * sup_naff);
  mc.derive(a.n);
  return mc;
}

struct MonitorViolation {
  int node = -1;
  std::string name;
  double lhs = 0, rhs = 0;
};

/// Sectional-curvature minimum over the ansatz eigenplanes (sphere-sphere and
/// sphere-axial), by the Gauss equation.
inline double sectional_min(const ProfileForms& pf, int n) {
  const double kss = pf.kappa_s.squaredNorm();
  const double ksa = pf.kappa_s.dot(pf.kappa_a);
  return n >= 3 ? std::min(kss, ksa) : ksa;
}

/// Evaluates every a-priori monitor pointwise; an empty list means all hold.
inline std::vector<MonitorViolation> monitor_sweep(const ProfileGeometry& pg,
                                                   const MonitorConstants& mc, double R,
                                                   bool with_hessian = true) {
  std::vector<MonitorViolation> out;
  const SymmetricAnsatz& a = pg.ansatz();
  const double Rm4 = std::pow(R, -4.0);
  for (int i = 0; i < pg.nodes(); ++i) {
    if (a.is_tip(i)) continue;
    const ProfileForms& pf = pg.forms(i);
    const double gA2 = pg.grad_A_norm(i) * pg.grad_A_norm(i);
    if (gA2 > mc.gamma1 * pf.A2 * pf.A2 + mc.gamma2 * Rm4)
      out.push_back({i, "gradient", gA2, mc.gamma1 * pf.A2 * pf.A2 + mc.gamma2 * Rm4});
    if (with_hessian) {
      const double h2 = pg.hess_A_norm(i) * pg.hess_A_norm(i);
      if (h2 > mc.gamma3 * pf.A2 * pf.A2 * pf.A2 + mc.gamma4 * Rm4)
        out.push_back({i, "second-order", h2, mc.gamma3 * pf.A2 * pf.A2 * pf.A2 + mc.gamma4 * Rm4});
    }
    if (std::sqrt(pf.H2) >= mc.H_sharp) {
      const double gH = pg.grad_H_norm(i);
      if (gH > mc.c_sharp * pf.H2)
        out.push_back({i, "pointwise-gradient", gH, mc.c_sharp * pf.H2});
    }
    const double naff_rhs = mc.naff_C * std::pow(pf.H2, 1.0 - mc.naff_sigma / 2.0);
    if (pf.Wminus2 > naff_rhs) out.push_back({i, "naff", pf.Wminus2, naff_rhs});
    const double chen_rhs = 0.5 * (pf.H2 / (a.n - 1) - pf.A2);
    const double kmin = sectional_min(pf, a.n);
    if (kmin < chen_rhs - 1e-12 * std::max(1.0, std::abs(chen_rhs)))
      out.push_back({i, "chen", kmin, chen_rhs});
  }
  return out;
}

/// |H(p0)| / (1 + c# d |H(p0)|): lower bound for |H| at distance d from p0.
inline double harnack_lower_bound(double H_p0, double d, double c_sharp) {
  require(H_p0 >= 0 && d >= 0 && c_sharp >= 0, ErrorKind::BadShape, "harnack inputs");
  return H_p0 / (1.0 + c_sharp * d * H_p0);
}

}  // namespace hcflow
