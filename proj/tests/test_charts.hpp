#pragma once

// Shared chart builders for the test suites: closed-form immersions sampled
// onto grid patches, used as independent oracles for the geometry kernel.

#include <cmath>
#include <functional>
#include <vector>

#include "hcflow/chart.hpp"

namespace hctest {

using hcflow::ChartPatch;
using hcflow::Vec;

/// Point on the unit (k)-sphere in R^{k+1} in hyperspherical coordinates,
/// th has k entries:
/// w_1 = cos th_1, w_2 = sin th_1 cos th_2, ..., w_{k+1} = sin th_1 ... sin th_k.
inline Vec unit_sphere_point(const Vec& th) {
  const int k = static_cast<int>(th.size());
  Vec w(k + 1);
  double s = 1.0;
  for (int i = 0; i < k; ++i) {
    w[i] = s * std::cos(th[i]);
    s *= std::sin(th[i]);
  }
  w[k] = s;
  return w;
}

/// Round n-sphere of radius R in R^{n+m}, chart centred away from coordinate
/// degeneracies (all angles near pi/2).
inline ChartPatch sphere_chart(int n, int m, double R, int shape, double h) {
  Vec origin = Vec::Constant(n, M_PI / 2 - 0.5 * h * (shape - 1));
  auto f = [=](const Vec& th) {
    Vec w = unit_sphere_point(th);
    Vec out = Vec::Zero(n + m);
    out.head(n + 1) = R * w;
    return out;
  };
  return hcflow::sample_patch(n, m, std::vector<int>(n, shape), std::vector<double>(n, h), origin, f);
}

/// Straight cylinder S^{n-1} x R of radius r0 in R^{n+m}; axis along the last
/// sampled coordinate. Optional radial perturbation dr(th, z) and codimension
/// deflection wdef(z) into the first extra normal direction.
inline ChartPatch cylinder_chart(int n, int m, double r0, int shape, double h,
                                 const std::function<double(const Vec&, double)>& dr = {},
                                 const std::function<double(double)>& wdef = {}) {
  Vec origin(n);
  for (int i = 0; i < n - 1; ++i) origin[i] = M_PI / 2 - 0.5 * h * (shape - 1);
  origin[n - 1] = -0.5 * h * (shape - 1);
  auto f = [=](const Vec& x) {
    Vec th = x.head(n - 1);
    const double z = x[n - 1];
    double r = r0;
    if (dr) r += dr(th, z);
    Vec w = unit_sphere_point(th);
    Vec out = Vec::Zero(n + m);
    out.head(n) = r * w;
    out[n] = z;
    if (wdef && m >= 2) out[n + 1] = wdef(z);
    return out;
  };
  return hcflow::sample_patch(n, m, std::vector<int>(n, shape), std::vector<double>(n, h), origin, f);
}

/// Flat n-plane patch in R^{n+m}.
inline ChartPatch plane_chart(int n, int m, int shape, double h) {
  auto f = [=](const Vec& x) {
    Vec out = Vec::Zero(n + m);
    out.head(n) = x;
    return out;
  };
  return hcflow::sample_patch(n, m, std::vector<int>(n, shape), std::vector<double>(n, h),
                              Vec::Zero(n), f);
}

/// Graph patch x -> (x, f_1(x), ..., f_m(x)).
inline ChartPatch graph_chart(int n, int m, int shape, double h,
                              const std::function<Vec(const Vec&)>& height) {
  Vec origin = Vec::Constant(n, -0.5 * h * (shape - 1));
  auto f = [=](const Vec& x) {
    Vec out(n + m);
    out.head(n) = x;
    out.tail(m) = height(x);
    return out;
  };
  return hcflow::sample_patch(n, m, std::vector<int>(n, shape), std::vector<double>(n, h), origin, f);
}

inline std::vector<int> center_node(const ChartPatch& p) {
  std::vector<int> idx(p.dim_n);
  for (int a = 0; a < p.dim_n; ++a) idx[a] = p.grid_shape[a] / 2;
  return idx;
}

}  // namespace hctest
