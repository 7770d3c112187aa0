#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hcflow/chart.hpp"
#include "test_charts.hpp"

using namespace hcflow;
using hctest::center_node;

TEST_CASE("round sphere patch: closed-form curvature values") {
  // unit S^2 in R^4, embedded in a coordinate 3-subspace
  auto patch = hctest::sphere_chart(2, 2, 1.0, 9, 0.02);
  PatchEvaluator ev(patch);
  auto ff = ev.fundamental_forms(center_node(patch));
  CHECK(std::sqrt(ff.norm_H2) == Catch::Approx(2.0).epsilon(1e-6));
  CHECK(ff.norm_A2 == Catch::Approx(2.0).epsilon(1e-6));
  CHECK(ff.weingarten_minus_norm < 1e-6);
  CHECK(ff.has_principal);

  // H points along the outward radial direction under the h = -(F_ij)^perp
  // convention; the flow moves by -H.
  Vec center = patch.at(center_node(patch));
  CHECK(ff.principal_normal.dot(center) > 0.99);
}

TEST_CASE("straight cylinder S^4 x R in R^7: |H| = 4/r0 and ratio 1/4") {
  const double r0 = 0.7;
  auto patch = hctest::cylinder_chart(5, 2, r0, 7, 0.02);
  PatchEvaluator ev(patch);
  auto ff = ev.fundamental_forms(center_node(patch));
  CHECK(std::sqrt(ff.norm_H2) == Catch::Approx(4.0 / r0).epsilon(1e-6));
  CHECK(ff.norm_A2 / ff.norm_H2 == Catch::Approx(0.25).epsilon(1e-8));
  CHECK(ff.weingarten_minus_norm < 1e-6 / r0);
}

TEST_CASE("flat plane patch: totally geodesic") {
  auto patch = hctest::plane_chart(3, 2, 7, 0.1);
  PatchEvaluator ev(patch);
  auto ff = ev.fundamental_forms(center_node(patch));
  CHECK(ff.norm_H2 < 1e-24);
  CHECK(ff.norm_A2 < 1e-24);
  CHECK((ff.g - Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK_FALSE(ff.has_principal);
}

TEST_CASE("trace identity g^{ij} h_ij = H at finite-difference accuracy") {
  auto patch = hctest::cylinder_chart(3, 2, 1.0, 9, 0.01);
  PatchEvaluator ev(patch);
  std::vector<int> idx = center_node(patch);
  auto ff = ev.fundamental_forms(idx);
  // recompute the trace from the frame components and compare with mean_curv
  Vec tr = Vec::Zero(patch.ambient_dim());
  for (int al = 0; al < ff.m; ++al) {
    double c = 0;
    for (int i = 0; i < ff.n; ++i)
      for (int j = 0; j < ff.n; ++j) c += ff.g_inv(i, j) * ff.h[al](i, j);
    tr += c * ff.frame.vectors[al];
  }
  CHECK((tr - ff.mean_curv).norm() < 1e-10 * std::max(1.0, ff.mean_curv.norm()));
}

TEST_CASE("torsion antisymmetry is exact by construction") {
  auto wdef = [](double z) { return 1e-3 * std::sin(3 * z); };
  auto patch = hctest::cylinder_chart(3, 3, 1.0, 9, 0.02, {}, wdef);
  PatchEvaluator ev(patch);
  auto ff = ev.fundamental_forms(center_node(patch));
  for (int i = 0; i < ff.n; ++i) CHECK((ff.torsion[i] + ff.torsion[i].transpose()).norm() == 0.0);
}

TEST_CASE("|A|^2 splits into principal and orthogonal Weingarten parts") {
  auto wdef = [](double z) { return 2e-3 * std::cos(2 * z); };
  auto patch = hctest::cylinder_chart(3, 2, 1.0, 9, 0.02, {}, wdef);
  PatchEvaluator ev(patch);
  auto ff = ev.fundamental_forms(center_node(patch));
  const double wnu2 = ff.weingarten_nu_norm * ff.weingarten_nu_norm;
  const double wm2 = ff.weingarten_minus_norm * ff.weingarten_minus_norm;
  CHECK(std::abs(ff.norm_A2 - (wnu2 + wm2)) < 1e-12 * ff.norm_A2);
  CHECK(ff.weingarten_minus_norm > 0);
}

TEST_CASE("finite differences converge to closed forms at order >= 3.5") {
  auto err_at = [](double h) {
    auto patch = hctest::sphere_chart(2, 1, 1.0, 9, h);
    PatchEvaluator ev(patch);
    auto ff = ev.fundamental_forms(center_node(patch));
    return std::abs(std::sqrt(ff.norm_H2) - 2.0);
  };
  const double e1 = err_at(0.08), e2 = err_at(0.04);
  const double order = std::log2(e1 / e2);
  INFO("errors " << e1 << " " << e2 << " order " << order);
  CHECK(order >= 3.5);

  auto err_cyl = [](double h) {
    auto patch = hctest::cylinder_chart(3, 2, 0.8, 9, h);
    PatchEvaluator ev(patch);
    auto ff = ev.fundamental_forms(center_node(patch));
    return std::abs(ff.norm_A2 - 2.0 / 0.64);
  };
  const double c1 = err_cyl(0.08), c2 = err_cyl(0.04);
  CHECK(std::log2(c1 / c2) >= 3.5);
}

TEST_CASE("derivative norms: parallel second fundamental form on models") {
  // cylinder at spacing 1e-2: |nabla A| = 0 up to discretization <= 1e-8
  {
    auto patch = hctest::cylinder_chart(3, 2, 1.0, 11, 0.01);
    PatchEvaluator ev(patch);
    std::vector<int> idx = center_node(patch);
    auto ff = ev.fundamental_forms(idx);
    ev.derivative_norms(idx, ff);
    CHECK(*ff.grad_A_norm <= 1e-8);
    CHECK(*ff.grad_H_norm <= 1e-8);
    CHECK(std::abs(kato_check(ff)) <= 1e-8);
  }
  // sphere likewise
  {
    auto patch = hctest::sphere_chart(2, 2, 1.0, 11, 0.01);
    PatchEvaluator ev(patch);
    std::vector<int> idx = center_node(patch);
    auto ff = ev.fundamental_forms(idx);
    ev.derivative_norms(idx, ff);
    CHECK(*ff.grad_A_norm <= 1e-8);
    CHECK(std::abs(kato_check(ff)) <= 1e-8);
  }
}

TEST_CASE("graph patch |nabla A| agrees with a dense-grid recomputation") {
  auto height = [](const Vec& x) {
    Vec v = Vec::Zero(2);
    v[0] = 1e-2 * std::sin(x[0]);
    return v;
  };
  auto val_at = [&](double h) {
    auto patch = hctest::graph_chart(2, 2, 13, h, height);
    PatchEvaluator ev(patch);
    std::vector<int> idx = center_node(patch);
    auto ff = ev.fundamental_forms(idx);
    ev.derivative_norms(idx, ff);
    return *ff.grad_A_norm;
  };
  const double coarse = val_at(0.04), fine = val_at(0.02);
  REQUIRE(fine > 0);
  CHECK(std::abs(coarse - fine) / fine < 0.10);
}

TEST_CASE("kato inequality on randomly perturbed cylinder patches") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a1 = 1e-3 * U(rng), a2 = 1e-3 * U(rng), k1 = 1 + 0.5 * U(rng);
    auto dr = [=](const Vec& th, double z) {
      return a1 * std::sin(k1 * z + th[0]) + a2 * std::cos(z) * std::sin(th[1]);
    };
    auto patch = hctest::cylinder_chart(3, 2, 1.0, 11, 0.02, dr);
    PatchEvaluator ev(patch);
    std::vector<int> idx = center_node(patch);
    auto ff = ev.fundamental_forms(idx);
    ev.derivative_norms(idx, ff);
    CHECK(kato_check(ff) >= -1e-9);
  }
}

TEST_CASE("degenerate and rank-deficient charts are rejected") {
  // collapse one axis to a point: dF loses rank
  auto f = [](const Vec& x) {
    Vec out = Vec::Zero(4);
    out[0] = x[0];
    out[1] = 0.0 * x[1];
    return out;
  };
  auto patch = hcflow::sample_patch(2, 2, {7, 7}, {0.1, 0.1}, Vec::Zero(2), f);
  auto probe = [&] {
    PatchEvaluator ev(patch);
    return ev.fundamental_forms(center_node(patch));
  };
  CHECK_THROWS_AS(probe(), FlowError);
}

TEST_CASE("hessian norm vanishes on the cylinder") {
  auto patch = hctest::cylinder_chart(2, 1, 1.0, 13, 0.02);
  PatchEvaluator ev(patch);
  std::vector<int> idx = center_node(patch);
  auto ff = ev.fundamental_forms(idx);
  ev.derivative_norms(idx, ff, true);
  CHECK(*ff.hess_A_norm <= 1e-6);
}
