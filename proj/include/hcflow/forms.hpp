#pragma once

#include <optional>
#include <vector>

#include "hcflow/common.hpp"

namespace hcflow {

/// Orthonormal frame of the normal space at a point. vectors[0] is the
/// principal normal H/|H| whenever the mean curvature is above the degeneracy
/// threshold (has_principal).
struct NormalFrame {
  std::vector<Vec> vectors;  // m ambient vectors, orthonormal
  bool has_principal = false;
};

/// Pointwise package of the first and second fundamental forms of an
/// immersion, with the splitting of the Weingarten map along the principal
/// normal. Sign convention: h_ij = -(F_ij)^perp, so W_{nu+} is positive
/// semi-definite on spheres and necks and the flow velocity is -H.
struct FundamentalForms {
  int n = 0;  // intrinsic dimension
  int m = 0;  // codimension

  Mat g;                 // metric, n x n
  Mat g_inv;             // inverse metric
  double sqrt_det_g = 0;

  NormalFrame frame;     // normal frame, frame.vectors[0] = nu+ when defined
  std::vector<Mat> h;    // h[alpha](i,j): components of h_ij in the frame
  Vec mean_curv;         // H = g^{ij} h_ij, ambient vector
  double norm_H2 = 0;    // |H|^2
  double norm_A2 = 0;    // |A|^2, full tensor norm

  bool has_principal = false;  // |H| >= eps_H; nu+ fields valid
  Vec principal_normal;        // nu+ = H/|H|
  Mat weingarten_nu;           // (W_{nu+})^i_j = g^{ik} h_kj . nu+
  double weingarten_nu_norm = 0;     // |W_{nu+}| tensor norm
  double weingarten_minus_norm = 0;  // |W_-|

  std::vector<Mat> torsion;  // torsion[i](alpha,beta) = T_{i alpha}^beta, antisymmetric

  std::optional<double> grad_A_norm;  // |nabla A|
  std::optional<double> grad_H_norm;  // |nabla^perp H|
  std::optional<double> hess_A_norm;  // |nabla^2 A|

  double ratio() const {
    require(norm_H2 > 0, ErrorKind::ZeroMeanCurvature, "|A|^2/|H|^2 with |H| = 0");
    return norm_A2 / norm_H2;
  }

  /// h with orthonormalized tangent indices: hb[alpha] = E^T h[alpha] E where
  /// E = g^{-1/2}. In this basis plain index sums are tensorially correct.
  std::vector<Mat> orthonormal_h() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    require(es.eigenvalues().minCoeff() > 0, ErrorKind::DegenerateMetric, "orthonormal_h");
    Mat e = es.operatorInverseSqrt();
    std::vector<Mat> out;
    out.reserve(h.size());
    for (const auto& ha : h) out.push_back(e * ha * e);
    return out;
  }
};

/// Residual of the Kato inequality |nabla A|^2 >= 3/(n+2) |nabla H|^2.
/// Callers assert residual >= -tol.
inline double kato_check(const FundamentalForms& ff) {
  require(ff.grad_A_norm && ff.grad_H_norm, ErrorKind::BadShape,
          "kato_check requires derivative norms");
  const double ga = *ff.grad_A_norm, gh = *ff.grad_H_norm;
  return ga * ga - 3.0 / (ff.n + 2) * gh * gh;
}

}  // namespace hcflow
