#pragma once

#include <cmath>
#include <functional>

#include "hcflow/ansatz.hpp"
#include "hcflow/chart.hpp"

namespace hcflow {

struct ShrinkingSolution {
  enum class Kind { Sphere, Cylinder };
  Kind kind = Kind::Cylinder;
  double initial_radius = 1.0;
  int n = 5;

  double extinction_time() const {
    const double r2 = initial_radius * initial_radius;
    return kind == Kind::Sphere ? r2 / (2.0 * n) : r2 / (2.0 * (n - 1));
  }
};

/// Exact radius law: cylinders shrink as sqrt(r0^2 - 2(n-1)t), spheres as
/// sqrt(r0^2 - 2nt). Backward times (t < 0) are valid.
inline double shrink_radius(const ShrinkingSolution& s, double t) {
  const double rate = s.kind == ShrinkingSolution::Kind::Sphere ? 2.0 * s.n : 2.0 * (s.n - 1);
  const double r2 = s.initial_radius * s.initial_radius - rate * t;
  require(r2 > 0, ErrorKind::Extinct, "past extinction time");
  return std::sqrt(r2);
}

namespace models {

inline Vec zero_w(int m) { return Vec::Zero(m - 1); }

/// Straight cylinder of radius r0; periodic in z with the given period.
inline SymmetricAnsatz cylinder(int n, int m, double r0, double length, int nodes) {
  require(r0 > 0 && length > 0 && nodes >= 5, ErrorKind::BadShape, "cylinder parameters");
  SymmetricAnsatz a;
  a.n = n;
  a.m = m;
  a.end_lo = a.end_hi = EndCondition::Periodic;
  for (int i = 0; i < nodes; ++i) {
    a.z.push_back(length * i / (nodes - 1));
    a.r.push_back(r0);
    a.w.push_back(zero_w(m));
  }
  a.closed_form = SymmetricAnsatz::ClosedForm{
      [r0](double) { return r0; },
      [](double) { return 0.0; },
      [](double) { return 0.0; },
      [m](double) { return zero_w(m); },
      [m](double) { return zero_w(m); },
      [m](double) { return zero_w(m); },
  };
  a.validate();
  return a;
}

/// Cylinder with a small sinusoidal deflection into the first extra
/// codimension direction: w_1(z) = delta sin(k z).
inline SymmetricAnsatz deflected_cylinder(int n, int m, double r0, double delta, double k,
                                          double length, int nodes) {
  require(m >= 2, ErrorKind::BadShape, "deflection needs m >= 2");
  require(std::abs(std::fmod(k * length, 2 * M_PI)) < 1e-9, ErrorKind::BadShape,
          "deflection must be periodic over the length");
  SymmetricAnsatz a = cylinder(n, m, r0, length, nodes);
  auto wf = [m, delta, k](double z) {
    Vec w = zero_w(m);
    w[0] = delta * std::sin(k * z);
    return w;
  };
  auto wfp = [m, delta, k](double z) {
    Vec w = zero_w(m);
    w[0] = delta * k * std::cos(k * z);
    return w;
  };
  auto wfpp = [m, delta, k](double z) {
    Vec w = zero_w(m);
    w[0] = -delta * k * k * std::sin(k * z);
    return w;
  };
  for (int i = 0; i < a.nodes(); ++i) a.w[i] = wf(a.z[i]);
  a.closed_form->w = wf;
  a.closed_form->wp = wfp;
  a.closed_form->wpp = wfpp;
  a.validate();
  return a;
}

/// Round n-sphere of radius R as a capped-capped profile r(z) = sqrt(R^2-z^2),
/// nodes equidistributed in polar angle (uniform arclength).
inline SymmetricAnsatz sphere(int n, int m, double R, int nodes) {
  require(R > 0 && nodes >= 7, ErrorKind::BadShape, "sphere parameters");
  SymmetricAnsatz a;
  a.n = n;
  a.m = m;
  a.end_lo = a.end_hi = EndCondition::Capped;
  for (int i = 0; i < nodes; ++i) {
    const double th = M_PI * i / (nodes - 1);
    a.z.push_back(-R * std::cos(th));
    a.r.push_back(R * std::sin(th));
    a.w.push_back(zero_w(m));
  }
  a.r.front() = 0.0;
  a.r.back() = 0.0;
  a.closed_form = SymmetricAnsatz::ClosedForm{
      [R](double z) { return std::sqrt(std::max(0.0, R * R - z * z)); },
      [R](double z) { return -z / std::sqrt(std::max(1e-300, R * R - z * z)); },
      [R](double z) {
        const double r2 = std::max(1e-300, R * R - z * z);
        return -R * R / (r2 * std::sqrt(r2));
      },
      [m](double) { return zero_w(m); },
      [m](double) { return zero_w(m); },
      [m](double) { return zero_w(m); },
  };
  a.validate();
  return a;
}

namespace detail {
// quintic Hermite basis on [0,1] for (value, slope, curvature) at both ends
inline double quintic(double t, double f0, double d0, double c0, double f1, double d1, double c1) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
  return f0 * h00 + d0 * h10 + c0 * h20 + f1 * h01 + d1 * h11 + c1 * h21;
}

inline double dquintic(double t, double f0, double d0, double c0, double f1, double d1, double c1,
                       double eps = 1e-6) {
  return (quintic(t + eps, f0, d0, c0, f1, d1, c1) - quintic(t - eps, f0, d0, c0, f1, d1, c1)) /
         (2 * eps);
}
}  // namespace detail

struct DumbbellSpec {
  int n = 5;
  int m = 2;
  double neck_radius = 0.5;
  double bulb_radius = 2.0;
  double length = 12.0;
  double deflection = 0.0;
  int nodes = 512;
  double neck_half_length = 0.75;  // flat cylindrical section around z = 0
};

/// Capped-capped dumbbell: flat neck, quintic shoulder, spherical bulbs.
/// The shoulder matches (r, r', r'') of the bulb circle, so the profile is
/// C^2; pinching of the result is a property the tests check numerically.
inline SymmetricAnsatz dumbbell(const DumbbellSpec& spec) {
  const double rn = spec.neck_radius, Rb = spec.bulb_radius;
  require(rn > 0 && rn < Rb, ErrorKind::BadShape, "need 0 < neck_radius < bulb_radius");
  require(spec.length > 4 * Rb, ErrorKind::BadShape, "need length > 4 bulb_radius");
  const double half = spec.length / 2;
  const double zb = half - Rb;  // bulb centre; pole at z = half
  // shoulder joins the bulb circle at polar angle th_m past the equator
  const double th_m = 0.95;
  const double zm = zb - Rb * std::sin(th_m);
  const double rm = Rb * std::cos(th_m);
  const double Ln = spec.neck_half_length;
  require(zm > Ln + 0.5, ErrorKind::BadShape, "dumbbell too short for the shoulder");
  const double Lt = zm - Ln;

  // circle values at the joint: r^2 = Rb^2 - (z-zb)^2 gives r' = (zb-z)/r and
  // r'' = -(1+r'^2)/r
  const double circ_d = (zb - zm) / rm;
  const double circ_c = -(1.0 + circ_d * circ_d) / rm;
  auto radius = [=](double zq) {
    const double az = std::abs(zq);
    if (az <= Ln) return rn;
    if (az < zm) {
      const double t = (az - Ln) / Lt;
      return detail::quintic(t, rn, 0.0, 0.0, rm, circ_d * Lt, circ_c * Lt * Lt);
    }
    const double d2 = Rb * Rb - (az - zb) * (az - zb);
    return std::sqrt(std::max(0.0, d2));
  };
  auto defl = [=](double zq) {
    Vec w = zero_w(spec.m);
    if (spec.deflection != 0 && spec.m >= 2)
      w[0] = spec.deflection * std::sin(M_PI * zq / half);
    return w;
  };

  // arclength-equidistributed nodes via a dense scan
  const int scan = 20000;
  std::vector<double> zs(scan + 1), ss(scan + 1);
  double acc = 0;
  double prev_r = radius(-half);
  for (int i = 0; i <= scan; ++i) {
    const double zq = -half + spec.length * i / scan;
    zs[i] = zq;
    if (i > 0) {
      const double rr = radius(zq);
      const double dz = spec.length / scan;
      acc += std::sqrt(dz * dz + (rr - prev_r) * (rr - prev_r));
      prev_r = rr;
    }
    ss[i] = acc;
  }
  SymmetricAnsatz a;
  a.n = spec.n;
  a.m = spec.m;
  a.end_lo = a.end_hi = EndCondition::Capped;
  int cursor = 0;
  for (int i = 0; i < spec.nodes; ++i) {
    const double target = acc * i / (spec.nodes - 1);
    while (cursor < scan && ss[cursor + 1] < target) ++cursor;
    double zq;
    if (i == 0) zq = -half;
    else if (i == spec.nodes - 1) zq = half;
    else {
      const double t = (target - ss[cursor]) / std::max(1e-300, ss[cursor + 1] - ss[cursor]);
      zq = zs[cursor] + t * (zs[cursor + 1] - zs[cursor]);
    }
    a.z.push_back(zq);
    a.r.push_back(i == 0 || i == spec.nodes - 1 ? 0.0 : radius(zq));
    a.w.push_back(defl(zq));
  }
  a.validate();
  return a;
}

/// Chart patch sampled from a closed-form ansatz profile: hyperspherical
/// angles for the S^{n-1} factor (periodic is impossible for n > 2, so the
/// angular chart is a non-degenerate window) and an axial window around z0.
inline ChartPatch ansatz_chart(const SymmetricAnsatz& a, double z0, int shape, double hz,
                               double hth) {
  require(a.closed_form.has_value(), ErrorKind::BadShape, "ansatz_chart needs a closed-form profile");
  const int n = a.n, m = a.m;
  const auto cf = *a.closed_form;
  Vec origin(n);
  origin[0] = z0 - 0.5 * hz * (shape - 1);
  for (int i = 1; i < n; ++i) origin[i] = M_PI / 2 - 0.5 * hth * (shape - 1);
  std::vector<double> spacing(n, hth);
  spacing[0] = hz;
  auto f = [=](const Vec& x) {
    const double zq = x[0];
    Vec th = x.tail(n - 1);
    Vec omega(n);
    {
      double s = 1.0;
      for (int i = 0; i < n - 1; ++i) {
        omega[i] = s * std::cos(th[i]);
        s *= std::sin(th[i]);
      }
      omega[n - 1] = s;
    }
    Vec out = Vec::Zero(n + m);
    out.head(n) = cf.r(zq) * omega;
    out[n] = zq;
    Vec w = cf.w(zq);
    for (int k = 0; k < m - 1; ++k) out[n + 1 + k] = w[k];
    return out;
  };
  return sample_patch(n, m, std::vector<int>(n, shape), spacing, origin, f);
}

}  // namespace models
}  // namespace hcflow
