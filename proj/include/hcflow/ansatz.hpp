#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hcflow/common.hpp"
#include "hcflow/forms.hpp"

namespace hcflow {

enum class EndCondition { Capped, Open, Periodic };

inline const char* end_condition_name(EndCondition e) {
  switch (e) {
    case EndCondition::Capped: return "Capped";
    case EndCondition::Open: return "Open";
    case EndCondition::Periodic: return "Periodic";
  }
  return "?";
}

inline EndCondition parse_end_condition(const std::string& s) {
  if (s == "Capped") return EndCondition::Capped;
  if (s == "Open") return EndCondition::Open;
  if (s == "Periodic") return EndCondition::Periodic;
  fail(ErrorKind::ConfigError, "unknown end condition '" + s + "'");
}

/// Rotationally symmetric immersion of S^{n-1}-tube type,
///   (w, z) -> (r(z) w, z, w_defl(z)) in R^n x R x R^{m-1},
/// determined by the 1-D profile (z, r, w). Periodic profiles store a
/// duplicated endpoint; Capped ends carry r = 0 at the tip.
struct SymmetricAnsatz {
  int n = 0;
  int m = 1;
  EndCondition end_lo = EndCondition::Open;
  EndCondition end_hi = EndCondition::Open;
  std::vector<double> z;
  std::vector<double> r;
  std::vector<Vec> w;  // per node, dimension m-1

  /// Optional closed-form profile; oracle models carry it so that tests are
  /// exact rather than finite-difference-limited.
  struct ClosedForm {
    std::function<double(double)> r, rp, rpp;
    std::function<Vec(double)> w, wp, wpp;
  };
  std::optional<ClosedForm> closed_form;

  int nodes() const { return static_cast<int>(z.size()); }
  int profile_dim() const { return m + 1; }  // radial + axial + (m-1) deflections
  bool periodic() const { return end_lo == EndCondition::Periodic; }
  double period() const { return z.back() - z.front(); }

  bool is_tip(int i) const {
    return (i == 0 && end_lo == EndCondition::Capped) ||
           (i == nodes() - 1 && end_hi == EndCondition::Capped);
  }

  void validate() const {
    require(n >= 2 && m >= 1, ErrorKind::BadShape, "ansatz dimensions");
    const int N = nodes();
    require(N >= 5, ErrorKind::BadShape, "ansatz needs >= 5 nodes");
    require(r.size() == z.size() && w.size() == z.size(), ErrorKind::BadShape, "profile arrays");
    require((end_lo == EndCondition::Periodic) == (end_hi == EndCondition::Periodic),
            ErrorKind::BadShape, "periodic must hold at both ends");
    for (int i = 0; i + 1 < N; ++i)
      require(z[i] < z[i + 1], ErrorKind::BadShape, "z must be strictly increasing");
    for (int i = 0; i < N; ++i) {
      require(static_cast<int>(w[i].size()) == m - 1, ErrorKind::BadShape, "deflection size");
      if (is_tip(i)) {
        require(r[i] == 0.0, ErrorKind::BadShape, "capped tip must have r = 0");
      } else {
        require(r[i] > 0.0, ErrorKind::DegenerateProfile, "r must be positive away from caps");
      }
    }
    if (periodic()) {
      require(std::abs(r.front() - r.back()) <= 1e-12 * std::max(1.0, r.front()) &&
                  (w.front() - w.back()).norm() <= 1e-12,
              ErrorKind::BadShape, "periodic profile endpoints must agree to 1e-12");
    }
  }
};

/// Pointwise curvature data of the symmetric ansatz, reduced to "profile
/// space" R^{m+1} with coordinates (radial, axial, deflections). The second
/// fundamental form has the two normal-valued eigenblocks
///   h(sphere dirs) = delta_ab kappa_s,   h(axial, axial) = kappa_a,
/// with kappa written in the h = -(F_ij)^perp sign convention (outward on
/// convex profiles).
struct ProfileForms {
  double phi2 = 0;   // g_zz = 1 + r'^2 + |w'|^2
  Vec t_z;           // profile tangent (r', 1, w')
  Vec kappa_s, kappa_a;
  Vec Hvec;          // (n-1) kappa_s + kappa_a
  double H2 = 0, A2 = 0;
  bool has_principal = false;
  Vec nu_plus;       // H/|H|
  double lam_s = 0, lam_a = 0;  // W_{nu+} eigenvalues
  double Wnu2 = 0, Wminus2 = 0;

  double ratio() const {
    require(H2 > 0, ErrorKind::ZeroMeanCurvature, "ratio with |H| = 0");
    return A2 / H2;
  }
};

/// Per-state evaluator for the symmetric ansatz: profile derivatives through
/// r^2 (regular across cap tips), curvature fields, 1-D covariant derivative
/// norms, arclength, area. Derivatives use 5-point windows, centered in the
/// interior and shifted onto the profile near caps; r-derivatives come from
/// the quadratic-regular field psi = r^2, which is the pole expansion at tips.
class ProfileGeometry {
 public:
  explicit ProfileGeometry(const SymmetricAnsatz& a, double eps_H = 1e-10) : a_(a), eps_H_(eps_H) {
    a_.validate();
    build();
  }

  const SymmetricAnsatz& ansatz() const { return a_; }
  int nodes() const { return a_.nodes(); }

  double rp(int i) const { return rp_[i]; }
  double rpp(int i) const { return rpp_[i]; }
  const Vec& wp(int i) const { return wp_[i]; }
  const ProfileForms& forms(int i) const {
    require(!a_.is_tip(i), ErrorKind::DegenerateProfile, "forms at a cap tip");
    return forms_[i];
  }

  /// Arclength of the profile curve from the first node.
  double arclength(int i) const { return s_[i]; }
  double total_arclength() const { return s_.back(); }

  /// Total area sigma_{n-1} * integral r^{n-1} phi dz (trapezoid).
  double area() const {
    const int N = nodes();
    double acc = 0;
    for (int i = 0; i + 1 < N; ++i) {
      const double fa = std::pow(a_.r[i], a_.n - 1) * std::sqrt(phi2_safe(i));
      const double fb = std::pow(a_.r[i + 1], a_.n - 1) * std::sqrt(phi2_safe(i + 1));
      acc += 0.5 * (fa + fb) * (a_.z[i + 1] - a_.z[i]);
    }
    return unit_sphere_area(a_.n - 2) * acc;
  }

  /// Full covariant norms: |nabla A|, |nabla H|, and (order 2) |nabla^2 A|.
  /// Computed on demand per node from the O(n-1)-reduction; see grad fields.
  double grad_A_norm(int i) const {
    ensure_first_derivs();
    const double q2 = Q_[i].squaredNorm(), p2 = P_[i].squaredNorm();
    return std::sqrt(p2 + 3.0 * (a_.n - 1) * q2);
  }
  double grad_H_norm(int i) const {
    ensure_first_derivs();
    return dH_[i].norm();
  }
  double hess_A_norm(int i) const {
    ensure_second_derivs();
    const int n = a_.n;
    const double kap = rp_[i] / (a_.r[i] * std::sqrt(phi2_safe(i)));
    const double t1 = Pp_[i].squaredNorm();
    const double t2 = 3.0 * (n - 1) * Qp_[i].squaredNorm();
    const double t3 = 3.0 * (n - 1) * kap * kap * (P_[i] - 2.0 * Q_[i]).squaredNorm();
    const double t4 = 3.0 * (n - 1) * (n + 1) * kap * kap * Q_[i].squaredNorm();
    return std::sqrt(t1 + t2 + t3 + t4);
  }

  /// nabla^perp along the profile of a normal field sampled per node.
  /// Differentiation runs in arclength, which stays regular through cap
  /// poles where the z-chart degenerates.
  Vec normal_derivative(int i, const std::vector<Vec>& field) const {
    return project_normal(i, d_ds(i, field));
  }

  /// Laplace-Beltrami of a scalar profile field:
  ///   (1/r^{n-1}) d/ds ( r^{n-1} df/ds ).
  double laplace_beltrami(int i, const std::vector<double>& f) const {
    const int N = nodes();
    std::vector<double> flux(N, 0.0);
    for (int j = 0; j < N; ++j) {
      if (a_.is_tip(j)) continue;
      flux[j] = std::pow(a_.r[j], a_.n - 1) * d_ds(j, f);
    }
    const double dflux = d_ds(i, flux);
    return dflux / std::pow(a_.r[i], a_.n - 1);
  }

  /// Osculating cap radius at a tip from the pole expansion psi ~ 2 rho (z_t - z).
  double tip_radius(int i) const {
    require(a_.is_tip(i), ErrorKind::BadShape, "tip_radius at interior node");
    return std::abs(psip_[i]) / 2.0;
  }

  /// d/dz of a nodal field at node i using this state's stencil windows.
  double d_dz(int i, const std::vector<double>& f) const {
    const Window& w = win_[i];
    double v = 0;
    for (size_t q = 0; q < w.idx.size(); ++q) v += w.w1[q] * f[w.idx[q]];
    return v;
  }
  Vec d_dz(int i, const std::vector<Vec>& f) const {
    const Window& w = win_[i];
    Vec v = Vec::Zero(f[i].size());
    for (size_t q = 0; q < w.idx.size(); ++q) v += w.w1[q] * f[w.idx[q]];
    return v;
  }

  /// d/ds (arclength) of a nodal field at node i.
  double d_ds(int i, const std::vector<double>& f) const {
    const Window& w = swin_[i];
    double v = 0;
    for (size_t q = 0; q < w.idx.size(); ++q) v += w.w1[q] * f[w.idx[q]];
    return v;
  }
  Vec d_ds(int i, const std::vector<Vec>& f) const {
    const Window& w = swin_[i];
    Vec v = Vec::Zero(f[i].size());
    for (size_t q = 0; q < w.idx.size(); ++q) v += w.w1[q] * f[w.idx[q]];
    return v;
  }

  Vec project_normal(int i, const Vec& v) const {
    const ProfileForms& ff = forms_[i];
    return v - (v.dot(ff.t_z) / ff.phi2) * ff.t_z;
  }

 private:
  struct Window {
    std::vector<int> idx;
    std::vector<double> w1, w2;  // first/second derivative weights
  };

  double phi2_safe(int i) const {
    if (a_.is_tip(i)) return 1.0;  // tips carry no forms; value unused in integrands (r = 0)
    return forms_[i].phi2;
  }

  void build() {
    const int N = nodes();
    
    win_.resize(N);
    rp_.assign(N, 0.0);
    rpp_.assign(N, 0.0);
    psip_.assign(N, 0.0);
    wp_.assign(N, Vec::Zero(a_.m - 1));
    wpp_.assign(N, Vec::Zero(a_.m - 1));
    forms_.assign(N, ProfileForms{});
    s_.assign(N, 0.0);

    std::vector<double> psi(N);
    for (int i = 0; i < N; ++i) psi[i] = a_.r[i] * a_.r[i];

    make_windows(a_.z, win_);

    const bool cf = a_.closed_form.has_value();
    for (int i = 0; i < N; ++i) {
      if (cf && !a_.is_tip(i)) {
        rp_[i] = a_.closed_form->rp(a_.z[i]);
        rpp_[i] = a_.closed_form->rpp(a_.z[i]);
        wp_[i] = a_.closed_form->wp(a_.z[i]);
        wpp_[i] = a_.closed_form->wpp(a_.z[i]);
        psip_[i] = 2.0 * a_.r[i] * rp_[i];
      } else {
        const Window& w = win_[i];
        double psip = 0, psipp = 0;
        Vec wp = Vec::Zero(a_.m - 1), wpp = Vec::Zero(a_.m - 1);
        for (size_t q = 0; q < w.idx.size(); ++q) {
          psip += w.w1[q] * psi[w.idx[q]];
          psipp += w.w2[q] * psi[w.idx[q]];
          wp += w.w1[q] * a_.w[w.idx[q]];
          wpp += w.w2[q] * a_.w[w.idx[q]];
        }
        psip_[i] = psip;
        wp_[i] = wp;
        wpp_[i] = wpp;
        if (!a_.is_tip(i)) {
          const double r = a_.r[i];
          rp_[i] = psip / (2.0 * r);
          rpp_[i] = (psipp - 2.0 * rp_[i] * rp_[i]) / (2.0 * r);
        }
      }
    }

    for (int i = 0; i < N; ++i) {
      if (a_.is_tip(i)) continue;
      forms_[i] = point_forms(i);
    }

    // Arclength by the circular-arc chord rule s = c * th / (2 sin(th/2)):
    // exact on circles (so cap poles are handled exactly), O(h^5) otherwise.
    const int mp = a_.profile_dim();
    auto unit_tangent = [&](int i) {
      Vec u = Vec::Zero(mp);
      if (a_.is_tip(i)) {
        u[0] = i == 0 ? 1.0 : -1.0;  // profile meets the axis radially
        return u;
      }
      u[0] = rp_[i];
      u[1] = 1.0;
      u.tail(a_.m - 1) = wp_[i];
      return Vec(u / u.norm());
    };
    for (int i = 1; i < N; ++i) {
      Vec d = Vec::Zero(mp);
      d[0] = a_.r[i] - a_.r[i - 1];
      d[1] = a_.z[i] - a_.z[i - 1];
      d.tail(a_.m - 1) = a_.w[i] - a_.w[i - 1];
      const double chord = d.norm();
      const double cth = std::clamp(unit_tangent(i - 1).dot(unit_tangent(i)), -1.0, 1.0);
      const double th = std::acos(cth);
      const double factor = th < 1e-8 ? 1.0 + th * th / 24.0 : th / (2.0 * std::sin(0.5 * th));
      s_[i] = s_[i - 1] + chord * factor;
    }
    make_windows(s_, swin_);
  }

  void make_windows(const std::vector<double>& x, std::vector<Window>& out) const {
    const int N = nodes();
    out.resize(N);
    const bool per = a_.periodic();
    const int uniq = per ? N - 1 : N;
    const double span = x.back() - x.front();
    for (int i = 0; i < N; ++i) {
      Window& w = out[i];
      const int width = std::min(5, N);
      std::vector<double> xs(width);
      w.idx.resize(width);
      if (per) {
        for (int q = 0; q < width; ++q) {
          int jj = i - width / 2 + q;
          double shift = 0;
          while (jj < 0) {
            jj += uniq;
            shift -= span;
          }
          while (jj >= uniq) {
            jj -= uniq;
            shift += span;
          }
          w.idx[q] = jj;
          xs[q] = x[jj] + shift;
        }
      } else {
        int lo = std::clamp(i - width / 2, 0, N - width);
        for (int q = 0; q < width; ++q) {
          w.idx[q] = lo + q;
          xs[q] = x[lo + q];
        }
      }
      Mat fw = fd_weights(x[i], xs, 2);
      w.w1.resize(width);
      w.w2.resize(width);
      for (int q = 0; q < width; ++q) {
        w.w1[q] = fw(q, 1);
        w.w2[q] = fw(q, 2);
      }
    }
  }

  // Arc element at a tip: ds/dz diverges like r'/..., but the arc increment
  // stays finite; near the pole ds ~ dr with r ~ sqrt(2 rho (z_t - z)), so a
  // trapezoid on sqrt(phi2) of the neighbour underestimates mildly. Use the
  // neighbour's value; cap cells are O(node spacing) anyway.
  double tip_phi(int i) const {
    const int j = i == 0 ? 1 : nodes() - 2;
    return forms_[j].phi2;
  }

  ProfileForms point_forms(int i) const {
    const int mp = a_.profile_dim();
    ProfileForms ff;
    const double r = a_.r[i], rp = rp_[i], rpp = rpp_[i];
    const Vec& wp = wp_[i];
    const Vec& wpp = wpp_[i];
    ff.t_z = Vec::Zero(mp);
    ff.t_z[0] = rp;
    ff.t_z[1] = 1.0;
    ff.t_z.tail(a_.m - 1) = wp;
    ff.phi2 = 1.0 + rp * rp + wp.squaredNorm();

    Vec e_rho = Vec::Zero(mp);
    e_rho[0] = 1.0;
    ff.kappa_s = (e_rho - (rp / ff.phi2) * ff.t_z) / r;

    Vec v = Vec::Zero(mp);
    v[0] = rpp;
    v.tail(a_.m - 1) = wpp;
    ff.kappa_a = -(v - (v.dot(ff.t_z) / ff.phi2) * ff.t_z) / ff.phi2;

    ff.Hvec = (a_.n - 1) * ff.kappa_s + ff.kappa_a;
    ff.H2 = ff.Hvec.squaredNorm();
    ff.A2 = (a_.n - 1) * ff.kappa_s.squaredNorm() + ff.kappa_a.squaredNorm();
    ff.has_principal = ff.H2 > eps_H_ * eps_H_;
    if (ff.has_principal) {
      ff.nu_plus = ff.Hvec / std::sqrt(ff.H2);
      ff.lam_s = ff.kappa_s.dot(ff.nu_plus);
      ff.lam_a = ff.kappa_a.dot(ff.nu_plus);
      ff.Wnu2 = (a_.n - 1) * ff.lam_s * ff.lam_s + ff.lam_a * ff.lam_a;
      ff.Wminus2 = std::max(0.0, ff.A2 - ff.Wnu2);
    }
    return ff;
  }

  void ensure_first_derivs() const {
    if (!Q_.empty()) return;
    const int N = nodes();
    const int mp = a_.profile_dim();
    std::vector<Vec> ks(N, Vec::Zero(mp)), ka(N, Vec::Zero(mp)), hv(N, Vec::Zero(mp));
    for (int i = 0; i < N; ++i) {
      if (a_.is_tip(i)) continue;
      ks[i] = forms_[i].kappa_s;
      ka[i] = forms_[i].kappa_a;
      hv[i] = forms_[i].Hvec;
    }
    fill_tip_extrapolation(ks);
    fill_tip_extrapolation(ka);
    fill_tip_extrapolation(hv);
    Q_.assign(N, Vec::Zero(mp));
    P_.assign(N, Vec::Zero(mp));
    dH_.assign(N, Vec::Zero(mp));
    for (int i = 0; i < N; ++i) {
      if (a_.is_tip(i)) continue;
      Q_[i] = normal_derivative(i, ks);
      P_[i] = normal_derivative(i, ka);
      dH_[i] = normal_derivative(i, hv);
    }
  }

  void ensure_second_derivs() const {
    ensure_first_derivs();
    if (!Qp_.empty()) return;
    const int N = nodes();
    const int mp = a_.profile_dim();
    std::vector<Vec> q = Q_, p = P_;
    fill_tip_extrapolation(q);
    fill_tip_extrapolation(p);
    Qp_.assign(N, Vec::Zero(mp));
    Pp_.assign(N, Vec::Zero(mp));
    for (int i = 0; i < N; ++i) {
      if (a_.is_tip(i)) continue;
      Qp_[i] = normal_derivative(i, q);
      Pp_[i] = normal_derivative(i, p);
    }
  }

  // Tip nodes carry no curvature vectors; windows adjacent to a cap reach the
  // tip slot, so give it a quadratic extrapolation from the three nearest
  // interior nodes.
  void fill_tip_extrapolation(std::vector<Vec>& f) const {
    const int N = nodes();
    auto fit = [&](int tip, int i1, int i2, int i3) {
      std::vector<double> xs = {s_[i1], s_[i2], s_[i3]};
      Mat w = fd_weights(s_[tip], xs, 0);
      f[tip] = w(0, 0) * f[i1] + w(1, 0) * f[i2] + w(2, 0) * f[i3];
    };
    if (a_.end_lo == EndCondition::Capped) fit(0, 1, 2, 3);
    if (a_.end_hi == EndCondition::Capped) fit(N - 1, N - 2, N - 3, N - 4);
  }

  const SymmetricAnsatz a_;
  double eps_H_;
  std::vector<Window> win_, swin_;
  std::vector<double> rp_, rpp_, psip_;
  std::vector<Vec> wp_, wpp_;
  std::vector<ProfileForms> forms_;
  std::vector<double> s_;
  mutable std::vector<Vec> Q_, P_, dH_, Qp_, Pp_;
};

/// Map a profile-space vector (radial, axial, w...) to the ambient R^{n+m}
/// at angular position omega = e_1.
inline Vec profile_to_ambient(int n, int m, const Vec& v) {
  Vec out = Vec::Zero(n + m);
  out[0] = v[0];
  out[n] = v[1];
  for (int k = 0; k < m - 1; ++k) out[n + 1 + k] = v[2 + k];
  return out;
}

/// Full FundamentalForms of the ansatz at node i, at the omega = e_1 section.
/// Intrinsic index 0 is axial (z), indices 1..n-1 are orthonormally scaled
/// sphere directions. Exact up to the 1-D profile differentiation.
inline FundamentalForms ansatz_forms(const ProfileGeometry& pg, int i,
                                     bool with_derivative_norms = false) {
  const SymmetricAnsatz& a = pg.ansatz();
  require(!a.is_tip(i), ErrorKind::DegenerateProfile,
          a.r[i] < 1e-12 ? "profile radius below 1e-12" : "forms at tip");
  require(a.r[i] >= 1e-12, ErrorKind::DegenerateProfile, "profile radius below 1e-12");
  const ProfileForms& pf = pg.forms(i);
  const int n = a.n, m = a.m;
  FundamentalForms ff;
  ff.n = n;
  ff.m = m;
  ff.g = Mat::Identity(n, n);
  ff.g(0, 0) = pf.phi2;
  for (int k = 1; k < n; ++k) ff.g(k, k) = a.r[i] * a.r[i];
  ff.g_inv = ff.g.inverse();
  ff.sqrt_det_g = std::sqrt(ff.g.determinant());
  ff.mean_curv = profile_to_ambient(n, m, pf.Hvec);
  ff.norm_H2 = pf.H2;
  ff.norm_A2 = pf.A2;
  ff.has_principal = pf.has_principal;

  // normal frame in profile space: nu+ first when defined, then Gram-Schmidt
  // over the profile-space axes
  std::vector<Vec> frame;
  auto try_add = [&](Vec v) {
    v -= (v.dot(pf.t_z) / pf.phi2) * pf.t_z;
    for (const Vec& u : frame) v -= u.dot(v) * u;
    const double nv = v.norm();
    if (nv <= 1e-10) return false;
    frame.push_back(v / nv);
    return true;
  };
  if (pf.has_principal) try_add(pf.nu_plus);
  for (int e = 0; e < a.profile_dim() && static_cast<int>(frame.size()) < m; ++e) {
    Vec v = Vec::Zero(a.profile_dim());
    v[e] = 1.0;
    try_add(v);
  }
  require(static_cast<int>(frame.size()) == m, ErrorKind::Internal, "ansatz normal frame");

  ff.frame.has_principal = pf.has_principal;
  for (const Vec& v : frame) ff.frame.vectors.push_back(profile_to_ambient(n, m, v));

  ff.h.assign(m, Mat::Zero(n, n));
  for (int al = 0; al < m; ++al) {
    const double cs = pf.kappa_s.dot(frame[al]);
    const double ca = pf.kappa_a.dot(frame[al]);
    ff.h[al](0, 0) = pf.phi2 * ca;
    for (int k = 1; k < n; ++k) ff.h[al](k, k) = a.r[i] * a.r[i] * cs;
  }

  if (pf.has_principal) {
    ff.principal_normal = profile_to_ambient(n, m, pf.nu_plus);
    ff.weingarten_nu = ff.g_inv * ff.h[0];
    ff.weingarten_nu_norm = std::sqrt(pf.Wnu2);
    ff.weingarten_minus_norm = std::sqrt(pf.Wminus2);
  }

  // torsion: angular components vanish identically for the ansatz; the axial
  // component comes from differentiating the frame field along z
  ff.torsion.assign(n, Mat::Zero(m, m));
  {
    const int N = pg.nodes();
    std::vector<std::vector<Vec>> frames(N);
    // frame field along z, same construction per node; skip tips
    for (int j = 0; j < N; ++j) {
      if (a.is_tip(j)) continue;
      const ProfileForms& pfj = pg.forms(j);
      std::vector<Vec> fj;
      auto add_j = [&](Vec v) {
        v -= (v.dot(pfj.t_z) / pfj.phi2) * pfj.t_z;
        for (const Vec& u : fj) v -= u.dot(v) * u;
        const double nv = v.norm();
        if (nv <= 1e-10) return false;
        fj.push_back(v / nv);
        return true;
      };
      if (pfj.has_principal) add_j(pfj.nu_plus);
      for (int e = 0; e < a.profile_dim() && static_cast<int>(fj.size()) < m; ++e) {
        Vec v = Vec::Zero(a.profile_dim());
        v[e] = 1.0;
        add_j(v);
      }
      frames[j] = fj;
    }
    for (int al = 0; al < m; ++al) {
      std::vector<Vec> field(N, Vec::Zero(a.profile_dim()));
      bool ok = true;
      for (int j = 0; j < N && ok; ++j) {
        if (a.is_tip(j)) continue;
        if (static_cast<int>(frames[j].size()) != m) ok = false;
        else field[j] = frames[j][al];
      }
      if (!ok) continue;
      // nearest fill at tips so windows near caps stay usable
      if (a.end_lo == EndCondition::Capped) field[0] = field[1];
      if (a.end_hi == EndCondition::Capped) field[N - 1] = field[N - 2];
      // coordinate-index torsion T_{z alpha}^beta = phi * <d nu/ds, nu>
      Vec d = pg.d_ds(i, field) * std::sqrt(pf.phi2);
      for (int be = 0; be < m; ++be) {
        const double t = d.dot(frame[be]);
        ff.torsion[0](al, be) += 0.5 * t;
        ff.torsion[0](be, al) -= 0.5 * t;
      }
    }
  }

  if (with_derivative_norms) {
    ff.grad_A_norm = pg.grad_A_norm(i);
    ff.grad_H_norm = pg.grad_H_norm(i);
    ff.hess_A_norm = pg.hess_A_norm(i);
  }
  return ff;
}

/// Profile snapshot: delimited text, one row per node (z, r, w...), decimals
/// with 17 significant digits so round trips are bit exact.
inline void write_profile(const SymmetricAnsatz& a, std::ostream& os) {
  os << "# symmetric-ansatz n " << a.n << " m " << a.m << " end_lo " << end_condition_name(a.end_lo)
     << " end_hi " << end_condition_name(a.end_hi) << "\n";
  os << "z r";
  for (int k = 1; k < a.m; ++k) os << " w" << k;
  os << "\n";
  char buf[64];
  for (int i = 0; i < a.nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", a.z[i]);
    os << buf;
    std::snprintf(buf, sizeof buf, " %.17g", a.r[i]);
    os << buf;
    for (int k = 0; k < a.m - 1; ++k) {
      std::snprintf(buf, sizeof buf, " %.17g", a.w[i][k]);
      os << buf;
    }
    os << "\n";
  }
}

inline void write_profile_file(const SymmetricAnsatz& a, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), ErrorKind::ConfigError, "cannot open " + path);
  write_profile(a, os);
}

inline SymmetricAnsatz read_profile(std::istream& is) {
  SymmetricAnsatz a;
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::ConfigError, "empty profile");
  {
    std::istringstream hd(line);
    std::string hash, tag, key;
    hd >> hash >> tag;
    require(hash == "#" && tag == "symmetric-ansatz", ErrorKind::ConfigError,
            "bad profile header");
    std::string val;
    while (hd >> key >> val) {
      if (key == "n") a.n = std::stoi(val);
      else if (key == "m") a.m = std::stoi(val);
      else if (key == "end_lo") a.end_lo = parse_end_condition(val);
      else if (key == "end_hi") a.end_hi = parse_end_condition(val);
    }
  }
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::ConfigError, "missing column row");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double z, r;
    row >> z >> r;
    Vec w(a.m - 1);
    for (int k = 0; k < a.m - 1; ++k) row >> w[k];
    require(!row.fail(), ErrorKind::ConfigError, "short profile row");
    a.z.push_back(z);
    a.r.push_back(r);
    a.w.push_back(w);
  }
  a.validate();
  return a;
}

inline SymmetricAnsatz read_profile_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrorKind::ConfigError, "cannot open " + path);
  return read_profile(is);
}

}  // namespace hcflow
