#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "hcflow/common.hpp"
#include "hcflow/forms.hpp"

namespace hcflow {

/// A general immersion F: R^n -> R^{n+m} sampled on an n-dimensional grid
/// patch. Axes may be marked periodic (the last node duplicates the first);
/// non-periodic stencils are interior-only, never one-sided.
struct ChartPatch {
  int dim_n = 0;
  int codim_m = 0;
  std::vector<int> grid_shape;      // nodes per intrinsic axis
  std::vector<double> spacing;      // grid step per axis
  std::vector<uint8_t> periodic;    // optional per-axis wrap, default none
  std::vector<Vec> positions;       // F(x) in R^{n+m}, row-major

  int ambient_dim() const { return dim_n + codim_m; }

  long size() const {
    long s = 1;
    for (int k : grid_shape) s *= k;
    return s;
  }

  long flat(const std::vector<int>& idx) const {
    long f = 0;
    for (int a = 0; a < dim_n; ++a) f = f * grid_shape[a] + idx[a];
    return f;
  }

  bool is_periodic(int axis) const { return !periodic.empty() && periodic[axis] != 0; }

  /// Period in nodes (periodic axes store a duplicated endpoint).
  int period(int axis) const { return grid_shape[axis] - 1; }

  int wrap(int axis, int i) const {
    const int p = period(axis);
    int r = i % p;
    if (r < 0) r += p;
    return r;
  }

  const Vec& at(std::vector<int> idx) const {
    for (int a = 0; a < dim_n; ++a)
      if (is_periodic(a)) idx[a] = wrap(a, idx[a]);
    return positions[flat(idx)];
  }

  int axis_margin(const std::vector<int>& idx, int a) const {
    if (is_periodic(a)) return 1 << 20;
    return std::min(idx[a], grid_shape[a] - 1 - idx[a]);
  }

  /// Distance to the nearest boundary along any non-periodic axis.
  int margin(const std::vector<int>& idx) const {
    int mg = 1 << 20;
    for (int a = 0; a < dim_n; ++a) mg = std::min(mg, axis_margin(idx, a));
    return mg;
  }

  void validate() const {
    require(dim_n >= 1 && codim_m >= 1, ErrorKind::BadShape, "chart dimensions");
    require(static_cast<int>(grid_shape.size()) == dim_n, ErrorKind::BadShape, "grid_shape size");
    require(static_cast<int>(spacing.size()) == dim_n, ErrorKind::BadShape, "spacing size");
    for (int a = 0; a < dim_n; ++a)
      require(grid_shape[a] >= 5, ErrorKind::BadShape, "grid_shape entries must be >= 5");
    require(static_cast<long>(positions.size()) == size(), ErrorKind::BadShape, "positions size");
  }
};

/// Sample a chart patch from a callable F(x) on the box origin + [0, (shape-1)*h].
inline ChartPatch sample_patch(int n, int m, const std::vector<int>& shape,
                               const std::vector<double>& spacing, const Vec& origin,
                               const std::function<Vec(const Vec&)>& f,
                               const std::vector<uint8_t>& periodic = {}) {
  ChartPatch p;
  p.dim_n = n;
  p.codim_m = m;
  p.grid_shape = shape;
  p.spacing = spacing;
  p.periodic = periodic;
  p.positions.resize(p.size());
  std::vector<int> idx(n, 0);
  for (long fl = 0; fl < p.size(); ++fl) {
    Vec x(n);
    for (int a = 0; a < n; ++a) x[a] = origin[a] + idx[a] * spacing[a];
    p.positions[fl] = f(x);
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < shape[a]) break;
      idx[a] = 0;
    }
  }
  p.validate();
  return p;
}

namespace detail {
// Central stencils on uniform grids, by half-width: ext = 2 gives fourth
// order, ext = 1 second order. No one-sided stencils anywhere.
struct Stencil {
  std::vector<int> off;
  std::vector<double> w;
};

inline Stencil d1(double h, int ext) {
  if (ext >= 2)
    return {{-2, -1, 1, 2}, {1 / (12 * h), -8 / (12 * h), 8 / (12 * h), -1 / (12 * h)}};
  return {{-1, 1}, {-0.5 / h, 0.5 / h}};
}

inline Stencil d2(double h, int ext) {
  const double h2 = h * h;
  if (ext >= 2)
    return {{-2, -1, 0, 1, 2},
            {-1 / (12 * h2), 16 / (12 * h2), -30 / (12 * h2), 16 / (12 * h2), -1 / (12 * h2)}};
  return {{-1, 0, 1}, {1 / h2, -2 / h2, 1 / h2}};
}
}  // namespace detail

/// Finite-difference differential geometry on a ChartPatch with a smoothly
/// chosen normal frame. Two frames are kept: a seed-only Gram-Schmidt frame
/// used for all covariant differentiation (smooth even across |H| = 0), and
/// the exported frame with nu+ = H/|H| first wherever |H| is above eps_H.
/// Caches per-node fields; one evaluator per patch is the intended usage.
class PatchEvaluator {
 public:
  static constexpr double kEpsMetric = 1e-12;

  explicit PatchEvaluator(const ChartPatch& patch, double eps_H = 1e-10)
      : p_(patch), eps_H_(eps_H) {
    p_.validate();
    pick_seed_order();
  }

  const ChartPatch& patch() const { return p_; }

  /// All pointwise fields. Requires margin >= 2 (fourth-order stencils).
  FundamentalForms fundamental_forms(const std::vector<int>& idx) {
    require(p_.margin(idx) >= 2, ErrorKind::BadShape, "fundamental_forms: node not interior");
    FundamentalForms ff;
    export_forms(idx, ff);
    return ff;
  }

  /// |nabla A|, |nabla^perp H|, and optionally |nabla^2 A|. Requires margin
  /// >= 3 (>= 4 when the Hessian norm is requested); margins >= 4 (>= 6)
  /// keep every stencil at fourth order.
  void derivative_norms(const std::vector<int>& idx, FundamentalForms& ff,
                        bool with_hessian = false) {
    const int q = p_.margin(idx);
    require(q >= 3, ErrorKind::BadShape, "derivative_norms: need margin >= 3");
    if (with_hessian) require(q >= 4, ErrorKind::BadShape, "hessian norm: need margin >= 4");

    Node& c = node(idx);
    internal_torsion(idx, c);
    const GradA& ga = grad_A(idx);
    ff.grad_A_norm = tensor3_norm(ga.s, c);

    const int m = p_.codim_m, n = p_.dim_n;
    const int ext = q >= 4 ? 2 : 1;
    Mat dH = Mat::Zero(n, m);
    for (int k = 0; k < n; ++k) {
      auto st = detail::d1(p_.spacing[k], ext);
      for (size_t s = 0; s < st.off.size(); ++s) {
        std::vector<int> j = idx;
        j[k] += st.off[s];
        const Node& nj = node(j);
        for (int b = 0; b < m; ++b) dH(k, b) += st.w[s] * nj.H_comp[b];
      }
      for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) dH(k, b) += c.H_comp[a] * c.T[k](a, b);
    }
    double gh2 = 0;
    for (int k = 0; k < n; ++k)
      for (int kk = 0; kk < n; ++kk)
        for (int b = 0; b < m; ++b) gh2 += c.g_inv(k, kk) * dH(k, b) * dH(kk, b);
    ff.grad_H_norm = std::sqrt(std::max(0.0, gh2));

    if (with_hessian) ff.hess_A_norm = hess_A_norm(idx);
  }

  /// Laplace-Beltrami of a scalar field sampled over the patch.
  double laplace_beltrami(const std::vector<int>& idx,
                          const std::function<double(const std::vector<int>&)>& f) {
    Node& c = node(idx);
    const int n = p_.dim_n;
    Vec df(n);
    Mat d2f(n, n);
    for (int a = 0; a < n; ++a) {
      const int ext = std::min(p_.axis_margin(idx, a), 2);
      auto st = detail::d1(p_.spacing[a], ext);
      double v = 0;
      for (size_t s = 0; s < st.off.size(); ++s) {
        std::vector<int> j = idx;
        j[a] += st.off[s];
        v += st.w[s] * f(j);
      }
      df[a] = v;
      auto st2 = detail::d2(p_.spacing[a], ext);
      double v2 = 0;
      for (size_t s = 0; s < st2.off.size(); ++s) {
        std::vector<int> j = idx;
        j[a] += st2.off[s];
        v2 += st2.w[s] * f(j);
      }
      d2f(a, a) = v2;
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        auto sa = detail::d1(p_.spacing[a], std::min(p_.axis_margin(idx, a), 2));
        auto sb = detail::d1(p_.spacing[b], std::min(p_.axis_margin(idx, b), 2));
        double v = 0;
        for (size_t qa = 0; qa < sa.off.size(); ++qa)
          for (size_t qb = 0; qb < sb.off.size(); ++qb) {
            std::vector<int> j = idx;
            j[a] += sa.off[qa];
            j[b] += sb.off[qb];
            v += sa.w[qa] * sb.w[qb] * f(j);
          }
        d2f(a, b) = d2f(b, a) = v;
      }
    double lap = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double chr = 0;
        for (int k = 0; k < n; ++k) chr += c.gamma[k](a, b) * df[k];
        lap += c.g_inv(a, b) * (d2f(a, b) - chr);
      }
    return lap;
  }

  /// Cross-section area of the slice idx0 along axis 0; remaining axes must
  /// be periodic so the slice is closed. Node sum = trapezoid rule there.
  double slice_area(int idx0) {
    const int n = p_.dim_n;
    for (int a = 1; a < n; ++a)
      require(p_.is_periodic(a), ErrorKind::BadShape, "slice_area needs periodic angular axes");
    std::vector<int> idx(n, 0);
    idx[0] = idx0;
    double area = 0;
    double cell = 1;
    for (int a = 1; a < n; ++a) cell *= p_.spacing[a];
    std::function<void(int)> rec = [&](int a) {
      if (a == n) {
        Node& nd = node(idx);
        Mat gs = nd.g.block(1, 1, n - 1, n - 1);
        area += std::sqrt(std::max(0.0, gs.determinant())) * cell;
        return;
      }
      for (int i = 0; i < p_.period(a); ++i) {
        idx[a] = i;
        rec(a + 1);
      }
    };
    rec(1);
    return area;
  }

 private:
  struct Node {
    std::vector<Vec> Fi;
    Mat g, g_inv;
    double sqrt_det_g = 0;
    std::vector<Mat> gamma;               // gamma[k](i,j) = Gamma^k_ij
    std::vector<std::vector<Vec>> h_vec;  // ambient, sign h = -(F_ij)^perp
    Vec H;
    double H2 = 0, A2 = 0;
    std::vector<Vec> frame_int;  // seed-only smooth frame
    std::vector<Mat> h_comp;     // components in frame_int
    Vec H_comp;
    std::vector<Mat> T;  // internal torsion, antisymmetrized
    bool torsion_done = false;
  };

  struct GradA {
    std::vector<std::vector<Mat>> s;  // s[k][alpha](i,j) = (nabla_k h)^alpha_ij
  };

  void pick_seed_order() {
    // Seed order fixed per patch: ambient axes ranked by the size of their
    // normal-space residual at the anchor node, so Gram-Schmidt varies
    // smoothly across verification-scale patches. Bootstrap with identity
    // order, then rebuild the cache under the ranked order.
    seed_order_.resize(p_.ambient_dim());
    std::iota(seed_order_.begin(), seed_order_.end(), 0);
    std::vector<int> anchor(p_.dim_n);
    for (int a = 0; a < p_.dim_n; ++a) anchor[a] = p_.grid_shape[a] / 2;
    const Node c = node(anchor);
    nodes_.clear();
    const int d = p_.ambient_dim();
    std::vector<std::pair<double, int>> rank;
    for (int e = 0; e < d; ++e) {
      Vec v = Vec::Zero(d);
      v[e] = 1;
      rank.push_back({normal_project(c, v).norm(), e});
    }
    std::stable_sort(rank.begin(), rank.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    seed_order_.clear();
    for (auto& pr : rank) seed_order_.push_back(pr.second);
  }

  static Vec tangent_project(const Node& nd, const Vec& v) {
    const int n = static_cast<int>(nd.Fi.size());
    Vec coef(n);
    for (int i = 0; i < n; ++i) coef[i] = nd.Fi[i].dot(v);
    Vec t = Vec::Zero(v.size());
    Vec gc = nd.g_inv * coef;
    for (int i = 0; i < n; ++i) t += gc[i] * nd.Fi[i];
    return t;
  }

  static Vec normal_project(const Node& nd, const Vec& v) { return v - tangent_project(nd, v); }

  long canonical_key(std::vector<int> idx) const {
    for (int a = 0; a < p_.dim_n; ++a)
      if (p_.is_periodic(a)) idx[a] = p_.wrap(a, idx[a]);
    return p_.flat(idx);
  }

  Node& node(const std::vector<int>& idx) {
    long key = canonical_key(idx);
    auto it = nodes_.find(key);
    if (it != nodes_.end()) return it->second;
    Node nd = compute_node(idx);
    return nodes_.emplace(key, std::move(nd)).first->second;
  }

  Node compute_node(const std::vector<int>& idx) {
    require(p_.margin(idx) >= 1, ErrorKind::BadShape, "boundary node has no stencil");
    const int n = p_.dim_n, m = p_.codim_m, d = p_.ambient_dim();
    Node nd;
    nd.Fi.resize(n);
    for (int a = 0; a < n; ++a) {
      const int ext = std::min(p_.axis_margin(idx, a), 2);
      auto st = detail::d1(p_.spacing[a], ext);
      Vec v = Vec::Zero(d);
      for (size_t s = 0; s < st.off.size(); ++s) {
        std::vector<int> j = idx;
        j[a] += st.off[s];
        v += st.w[s] * p_.at(j);
      }
      nd.Fi[a] = v;
    }
    {
      Mat dF(d, n);
      for (int a = 0; a < n; ++a) dF.col(a) = nd.Fi[a];
      Eigen::JacobiSVD<Mat> svd(dF);
      const double smax = svd.singularValues()(0);
      int rank = 0;
      for (int i = 0; i < n; ++i)
        if (svd.singularValues()(i) > 1e-10 * smax) ++rank;
      require(rank == n, ErrorKind::RankDeficient, "dF rank below n");
    }
    nd.g = Mat(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) nd.g(a, b) = nd.g(b, a) = nd.Fi[a].dot(nd.Fi[b]);
    Eigen::SelfAdjointEigenSolver<Mat> es(nd.g);
    require(es.eigenvalues().minCoeff() >= kEpsMetric, ErrorKind::DegenerateMetric,
            "metric eigenvalue below 1e-12");
    nd.g_inv = nd.g.inverse();
    nd.sqrt_det_g = std::sqrt(nd.g.determinant());

    std::vector<std::vector<Vec>> Fij(n, std::vector<Vec>(n));
    for (int a = 0; a < n; ++a) {
      const int ext = std::min(p_.axis_margin(idx, a), 2);
      auto st = detail::d2(p_.spacing[a], ext);
      Vec v = Vec::Zero(d);
      for (size_t s = 0; s < st.off.size(); ++s) {
        std::vector<int> j = idx;
        j[a] += st.off[s];
        v += st.w[s] * p_.at(j);
      }
      Fij[a][a] = v;
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        auto sa = detail::d1(p_.spacing[a], std::min(p_.axis_margin(idx, a), 2));
        auto sb = detail::d1(p_.spacing[b], std::min(p_.axis_margin(idx, b), 2));
        Vec v = Vec::Zero(d);
        for (size_t qa = 0; qa < sa.off.size(); ++qa)
          for (size_t qb = 0; qb < sb.off.size(); ++qb) {
            std::vector<int> j = idx;
            j[a] += sa.off[qa];
            j[b] += sb.off[qb];
            v += sa.w[qa] * sb.w[qb] * p_.at(j);
          }
        Fij[a][b] = Fij[b][a] = v;
      }

    nd.gamma.assign(n, Mat(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Vec coef(n);
        for (int l = 0; l < n; ++l) coef[l] = Fij[i][j].dot(nd.Fi[l]);
        Vec gm = nd.g_inv * coef;
        for (int k = 0; k < n; ++k) nd.gamma[k](i, j) = gm[k];
      }

    nd.h_vec.assign(n, std::vector<Vec>(n));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Vec hv = -normal_project(nd, Fij[i][j]);
        nd.h_vec[i][j] = hv;
        if (j != i) nd.h_vec[j][i] = hv;
      }
    nd.H = Vec::Zero(d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) nd.H += nd.g_inv(i, j) * nd.h_vec[i][j];
    nd.H2 = nd.H.squaredNorm();

    Mat e = es.operatorInverseSqrt();
    nd.A2 = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Vec hb = Vec::Zero(d);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) hb += e(i, a) * e(j, b) * nd.h_vec[a][b];
        nd.A2 += hb.squaredNorm();
      }

    nd.frame_int = gram_schmidt(nd, nullptr);
    nd.h_comp.assign(m, Mat(n, n));
    for (int al = 0; al < m; ++al)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) nd.h_comp[al](i, j) = nd.h_vec[i][j].dot(nd.frame_int[al]);
    nd.H_comp = Vec(m);
    for (int al = 0; al < m; ++al) nd.H_comp[al] = nd.H.dot(nd.frame_int[al]);
    return nd;
  }

  /// Gram-Schmidt normal frame from the fixed seed order; `lead`, when given,
  /// is placed first (used for the exported nu+-first frame).
  std::vector<Vec> gram_schmidt(const Node& nd, const Vec* lead) const {
    const int m = p_.codim_m, d = p_.ambient_dim();
    std::vector<Vec> out;
    auto try_add = [&](Vec v, double tol) {
      v = normal_project(nd, v);
      for (const Vec& u : out) v -= u.dot(v) * u;
      const double nv = v.norm();
      if (nv <= tol) return false;
      out.push_back(v / nv);
      return true;
    };
    if (lead) try_add(*lead, 1e-14);
    for (int pass = 0; pass < 2 && static_cast<int>(out.size()) < m; ++pass) {
      const double tol = pass == 0 ? 0.3 : 1e-10;
      for (int e : seed_order_) {
        if (static_cast<int>(out.size()) == m) break;
        Vec v = Vec::Zero(d);
        v[e] = 1;
        try_add(v, tol);
      }
    }
    require(static_cast<int>(out.size()) == m, ErrorKind::Internal, "normal frame construction");
    return out;
  }

  std::vector<Vec> exported_frame(Node& nd) const {
    if (nd.H2 > eps_H_ * eps_H_) {
      Vec nu = nd.H / std::sqrt(nd.H2);
      return gram_schmidt(nd, &nu);
    }
    return nd.frame_int;
  }

  void internal_torsion(const std::vector<int>& idx, Node& nd) {
    if (nd.torsion_done) return;
    const int n = p_.dim_n, m = p_.codim_m;
    const int ext = p_.margin(idx) >= 4 ? 2 : 1;
    nd.T.assign(n, Mat::Zero(m, m));
    for (int k = 0; k < n; ++k) {
      auto st = detail::d1(p_.spacing[k], std::min(ext, p_.axis_margin(idx, k) - 1));
      std::vector<Vec> dnu(m, Vec::Zero(p_.ambient_dim()));
      for (size_t s = 0; s < st.off.size(); ++s) {
        std::vector<int> j = idx;
        j[k] += st.off[s];
        const Node& nj = node(j);
        for (int al = 0; al < m; ++al) dnu[al] += st.w[s] * nj.frame_int[al];
      }
      for (int al = 0; al < m; ++al)
        for (int be = 0; be < m; ++be)
          nd.T[k](al, be) =
              0.5 * (dnu[al].dot(nd.frame_int[be]) - dnu[be].dot(nd.frame_int[al]));
    }
    nd.torsion_done = true;
  }

  void export_forms(const std::vector<int>& idx, FundamentalForms& ff) {
    Node& nd = node(idx);
    const int n = p_.dim_n, m = p_.codim_m;
    ff.n = n;
    ff.m = m;
    ff.g = nd.g;
    ff.g_inv = nd.g_inv;
    ff.sqrt_det_g = nd.sqrt_det_g;
    ff.mean_curv = nd.H;
    ff.norm_H2 = nd.H2;
    ff.norm_A2 = nd.A2;
    ff.has_principal = nd.H2 > eps_H_ * eps_H_;

    ff.frame.vectors = exported_frame(nd);
    ff.frame.has_principal = ff.has_principal;
    ff.h.assign(m, Mat(n, n));
    for (int al = 0; al < m; ++al)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ff.h[al](i, j) = nd.h_vec[i][j].dot(ff.frame.vectors[al]);

    if (ff.has_principal) {
      ff.principal_normal = nd.H / std::sqrt(nd.H2);
      ff.weingarten_nu = nd.g_inv * ff.h[0];
      Eigen::SelfAdjointEigenSolver<Mat> es(nd.g);
      Mat e = es.operatorInverseSqrt();
      const double wn2 = (e * ff.h[0] * e).squaredNorm();
      ff.weingarten_nu_norm = std::sqrt(wn2);
      ff.weingarten_minus_norm = std::sqrt(std::max(0.0, nd.A2 - wn2));
    }

    // torsion of the exported frame field where the whole stencil has a
    // principal direction; elsewhere the seed-only frame's torsion
    const int ext = std::min(p_.margin(idx) >= 4 ? 2 : 1, p_.margin(idx) - 1);
    bool stencil_principal = ff.has_principal;
    if (stencil_principal) {
      for (int k = 0; k < n && stencil_principal; ++k) {
        auto st = detail::d1(p_.spacing[k], ext);
        for (size_t s = 0; s < st.off.size(); ++s) {
          std::vector<int> j = idx;
          j[k] += st.off[s];
          if (node(j).H2 <= eps_H_ * eps_H_) {
            stencil_principal = false;
            break;
          }
        }
      }
    }
    if (stencil_principal) {
      ff.torsion.assign(n, Mat::Zero(m, m));
      for (int k = 0; k < n; ++k) {
        auto st = detail::d1(p_.spacing[k], ext);
        std::vector<Vec> dnu(m, Vec::Zero(p_.ambient_dim()));
        for (size_t s = 0; s < st.off.size(); ++s) {
          std::vector<int> j = idx;
          j[k] += st.off[s];
          std::vector<Vec> fr = exported_frame(node(j));
          for (int al = 0; al < m; ++al) dnu[al] += st.w[s] * fr[al];
        }
        for (int al = 0; al < m; ++al)
          for (int be = 0; be < m; ++be)
            ff.torsion[k](al, be) = 0.5 * (dnu[al].dot(ff.frame.vectors[be]) -
                                           dnu[be].dot(ff.frame.vectors[al]));
      }
    } else {
      internal_torsion(idx, nd);
      ff.torsion = nd.T;
    }
  }

  const GradA& grad_A(const std::vector<int>& idx) {
    long key = canonical_key(idx);
    auto it = grads_.find(key);
    if (it != grads_.end()) return it->second;
    const int n = p_.dim_n, m = p_.codim_m;
    const int q = p_.margin(idx);
    require(q >= 2, ErrorKind::BadShape, "grad_A: need margin >= 2");
    Node& c = node(idx);
    internal_torsion(idx, c);
    const int ext = q >= 4 ? 2 : 1;
    GradA out;
    out.s.assign(n, std::vector<Mat>(m, Mat::Zero(n, n)));
    for (int k = 0; k < n; ++k) {
      auto st = detail::d1(p_.spacing[k], ext);
      std::vector<Mat> dh(m, Mat::Zero(n, n));
      for (size_t s = 0; s < st.off.size(); ++s) {
        std::vector<int> j = idx;
        j[k] += st.off[s];
        const Node& nj = node(j);
        for (int b = 0; b < m; ++b) dh[b] += st.w[s] * nj.h_comp[b];
      }
      for (int b = 0; b < m; ++b) {
        Mat s = dh[b];
        for (int a = 0; a < m; ++a) s += c.h_comp[a] * c.T[k](a, b);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double corr = 0;
            for (int l = 0; l < n; ++l)
              corr += c.gamma[l](k, i) * c.h_comp[b](l, j) + c.gamma[l](k, j) * c.h_comp[b](i, l);
            s(i, j) -= corr;
          }
        out.s[k][b] = s;
      }
    }
    return grads_.emplace(key, std::move(out)).first->second;
  }

  double tensor3_norm(const std::vector<std::vector<Mat>>& s, const Node& c) const {
    const int n = p_.dim_n, m = p_.codim_m;
    Eigen::SelfAdjointEigenSolver<Mat> es(c.g);
    Mat e = es.operatorInverseSqrt();
    double total = 0;
    for (int b = 0; b < m; ++b) {
      std::vector<Mat> tmp(n, Mat::Zero(n, n));
      for (int k = 0; k < n; ++k)
        for (int kk = 0; kk < n; ++kk) tmp[k] += e(k, kk) * s[kk][b];
      for (int k = 0; k < n; ++k) total += (e * tmp[k] * e).squaredNorm();
    }
    return std::sqrt(total);
  }

  double hess_A_norm(const std::vector<int>& idx) {
    const int n = p_.dim_n, m = p_.codim_m;
    const int q = p_.margin(idx);
    Node& c = node(idx);
    internal_torsion(idx, c);
    const GradA& gc = grad_A(idx);
    const int ext = q >= 6 ? 2 : 1;
    std::vector<std::vector<std::vector<Mat>>> R(
        n, std::vector<std::vector<Mat>>(n, std::vector<Mat>(m, Mat::Zero(n, n))));
    for (int l = 0; l < n; ++l) {
      auto st = detail::d1(p_.spacing[l], ext);
      std::vector<const GradA*> neigh(st.off.size());
      for (size_t s = 0; s < st.off.size(); ++s) {
        std::vector<int> j = idx;
        j[l] += st.off[s];
        neigh[s] = &grad_A(j);
      }
      for (int k = 0; k < n; ++k)
        for (int b = 0; b < m; ++b) {
          Mat r = Mat::Zero(n, n);
          for (size_t s = 0; s < st.off.size(); ++s) r += st.w[s] * neigh[s]->s[k][b];
          for (int a = 0; a < m; ++a) r += gc.s[k][a] * c.T[l](a, b);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              double corr = 0;
              for (int pp = 0; pp < n; ++pp)
                corr += c.gamma[pp](l, k) * gc.s[pp][b](i, j) +
                        c.gamma[pp](l, i) * gc.s[k][b](pp, j) +
                        c.gamma[pp](l, j) * gc.s[k][b](i, pp);
              r(i, j) -= corr;
            }
          R[l][k][b] = r;
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(c.g);
    Mat e = es.operatorInverseSqrt();
    double total = 0;
    for (int b = 0; b < m; ++b) {
      std::vector<std::vector<Mat>> t1(n, std::vector<Mat>(n));
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) t1[l][k] = e * R[l][k][b] * e;
      std::vector<std::vector<Mat>> t2(n, std::vector<Mat>(n, Mat::Zero(n, n)));
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
          for (int kk = 0; kk < n; ++kk) t2[l][k] += e(k, kk) * t1[l][kk];
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) {
          Mat t3 = Mat::Zero(n, n);
          for (int ll = 0; ll < n; ++ll) t3 += e(l, ll) * t2[ll][k];
          total += t3.squaredNorm();
        }
    }
    return std::sqrt(total);
  }

  ChartPatch p_;
  double eps_H_;
  std::vector<int> seed_order_;
  std::unordered_map<long, Node> nodes_;
  std::unordered_map<long, GradA> grads_;
};

/// One-shot convenience wrappers.
inline FundamentalForms fundamental_forms(const ChartPatch& patch, const std::vector<int>& idx) {
  PatchEvaluator ev(patch);
  return ev.fundamental_forms(idx);
}

inline FundamentalForms forms_with_derivatives(const ChartPatch& patch, const std::vector<int>& idx,
                                               bool with_hessian = false) {
  PatchEvaluator ev(patch);
  FundamentalForms ff = ev.fundamental_forms(idx);
  ev.derivative_norms(idx, ff, with_hessian);
  return ff;
}

}  // namespace hcflow
