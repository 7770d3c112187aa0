#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "hcflow/models.hpp"
#include "test_charts.hpp"

using namespace hcflow;

TEST_CASE("cylinder profile reproduces the closed-form curvature") {
  const int n = 5, m = 2;
  const double r0 = 0.8;
  auto a = models::cylinder(n, m, r0, 4.0, 64);
  ProfileGeometry pg(a);
  const int i = 20;
  const ProfileForms& pf = pg.forms(i);
  CHECK(std::sqrt(pf.H2) == Catch::Approx((n - 1) / r0).margin(1e-12));
  CHECK(pf.A2 == Catch::Approx((n - 1) / (r0 * r0)).margin(1e-12));
  CHECK(pf.Wminus2 < 1e-24);
  CHECK(pg.grad_A_norm(i) < 1e-12);
  CHECK(pg.grad_H_norm(i) < 1e-12);
  CHECK(pg.hess_A_norm(i) < 1e-12);
  // kato residual: both sides vanish
  auto ff = ansatz_forms(pg, i, true);
  CHECK(std::abs(kato_check(ff)) < 1e-12);
}

TEST_CASE("hemisphere cap profile is umbilic: ratio 1/n at every sampled z") {
  const int n = 5, m = 2;
  auto a = models::sphere(n, m, 1.3, 101);
  ProfileGeometry pg(a);
  for (int i = 5; i < a.nodes() - 5; i += 7) {
    const ProfileForms& pf = pg.forms(i);
    CHECK(pf.ratio() == Catch::Approx(1.0 / n).epsilon(1e-9));
    CHECK(std::sqrt(pf.H2) == Catch::Approx(n / 1.3).epsilon(1e-9));
    CHECK(pg.grad_A_norm(i) < 1e-7);
  }
}

TEST_CASE("sphere without closed form: psi = r^2 stencils are exact") {
  auto a = models::sphere(4, 1, 1.0, 81);
  a.closed_form.reset();
  ProfileGeometry pg(a);
  for (int i = 2; i < a.nodes() - 2; i += 11) {
    const ProfileForms& pf = pg.forms(i);
    CHECK(pf.ratio() == Catch::Approx(0.25).epsilon(1e-8));
    CHECK(std::sqrt(pf.H2) == Catch::Approx(4.0).epsilon(1e-8));
  }
  // includes nodes right next to the caps
  CHECK(pg.forms(1).ratio() == Catch::Approx(0.25).epsilon(1e-6));
  CHECK(pg.forms(a.nodes() - 2).ratio() == Catch::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("deflected cylinder: |W_-| positive, bounded by the deflection scale") {
  const int n = 5, m = 2;
  const double delta = 1e-3;
  auto a = models::deflected_cylinder(n, m, 1.0, delta, 1.0, 2 * M_PI, 128);
  ProfileGeometry pg(a);
  double wmax = 0;
  for (int i = 0; i < a.nodes() - 1; ++i) wmax = std::max(wmax, std::sqrt(pg.forms(i).Wminus2));
  CHECK(wmax > 1e-5);
  CHECK(wmax <= 2 * delta);
}

TEST_CASE("cross-backend equality: ansatz forms match the chart kernel") {
  const int n = 3, m = 2;
  auto a = models::deflected_cylinder(n, m, 1.0, 1e-3, 1.0, 2 * M_PI, 256);
  ProfileGeometry pg(a);
  const double z0 = a.z[100];

  auto patch = models::ansatz_chart(a, z0, 13, 0.02, 0.02);
  PatchEvaluator ev(patch);
  auto idx = hctest::center_node(patch);
  auto cf = ev.fundamental_forms(idx);
  ev.derivative_norms(idx, cf, true);

  const ProfileForms& pf = pg.forms(100);
  CHECK(std::sqrt(cf.norm_H2) == Catch::Approx(std::sqrt(pf.H2)).epsilon(1e-6));
  CHECK(cf.norm_A2 == Catch::Approx(pf.A2).epsilon(1e-6));
  CHECK(cf.weingarten_minus_norm == Catch::Approx(std::sqrt(pf.Wminus2)).epsilon(1e-3));
  CHECK(*cf.grad_A_norm == Catch::Approx(pg.grad_A_norm(100)).margin(1e-6));
  CHECK(*cf.grad_H_norm == Catch::Approx(pg.grad_H_norm(100)).margin(1e-6));
  CHECK(*cf.hess_A_norm == Catch::Approx(pg.hess_A_norm(100)).margin(2e-4));
}

TEST_CASE("cross-backend equality on a curved profile (sphere patch)") {
  const int n = 3, m = 2;
  auto a = models::sphere(n, m, 1.0, 301);
  ProfileGeometry pg(a);
  int i0 = 110;
  const double z0 = a.z[i0];
  auto patch = models::ansatz_chart(a, z0, 13, 0.01, 0.01);
  PatchEvaluator ev(patch);
  auto idx = hctest::center_node(patch);
  auto cf = ev.fundamental_forms(idx);
  ev.derivative_norms(idx, cf, true);
  const ProfileForms& pf = pg.forms(i0);
  CHECK(std::sqrt(cf.norm_H2) == Catch::Approx(std::sqrt(pf.H2)).epsilon(1e-6));
  CHECK(cf.norm_A2 == Catch::Approx(pf.A2).epsilon(1e-6));
  CHECK(*cf.grad_A_norm == Catch::Approx(pg.grad_A_norm(i0)).margin(1e-5));
  CHECK(*cf.hess_A_norm == Catch::Approx(pg.hess_A_norm(i0)).margin(1e-4));
}

TEST_CASE("cross-backend derivative norms on a varying neck profile") {
  // r(z) = 1 + 0.05 sin z: nontrivial |nabla A| and |nabla^2 A|
  const int n = 3, m = 1;
  SymmetricAnsatz a = models::cylinder(n, m, 1.0, 2 * M_PI, 256);
  for (int i = 0; i < a.nodes(); ++i) a.r[i] = 1.0 + 0.05 * std::sin(a.z[i]);
  a.closed_form = SymmetricAnsatz::ClosedForm{
      [](double z) { return 1.0 + 0.05 * std::sin(z); },
      [](double z) { return 0.05 * std::cos(z); },
      [](double z) { return -0.05 * std::sin(z); },
      [](double) { return models::zero_w(1); },
      [](double) { return models::zero_w(1); },
      [](double) { return models::zero_w(1); },
  };
  a.validate();
  ProfileGeometry pg(a);
  const int i0 = 100;
  auto patch = models::ansatz_chart(a, a.z[i0], 13, 0.015, 0.015);
  PatchEvaluator ev(patch);
  auto idx = hctest::center_node(patch);
  auto cf = ev.fundamental_forms(idx);
  ev.derivative_norms(idx, cf, true);
  REQUIRE(pg.grad_A_norm(i0) > 1e-3);
  CHECK(*cf.grad_A_norm == Catch::Approx(pg.grad_A_norm(i0)).epsilon(1e-4));
  CHECK(*cf.grad_H_norm == Catch::Approx(pg.grad_H_norm(i0)).epsilon(1e-4));
  REQUIRE(pg.hess_A_norm(i0) > 1e-3);
  CHECK(*cf.hess_A_norm == Catch::Approx(pg.hess_A_norm(i0)).epsilon(2e-3));
}

TEST_CASE("shrink_radius laws") {
  ShrinkingSolution cyl{ShrinkingSolution::Kind::Cylinder, 3.0, 5};
  CHECK(shrink_radius(cyl, 1.0) == Catch::Approx(1.0).margin(1e-15));
  ShrinkingSolution cyl2{ShrinkingSolution::Kind::Cylinder, 1.0, 5};
  CHECK(shrink_radius(cyl2, -1.0) == Catch::Approx(3.0).margin(1e-15));
  ShrinkingSolution sph{ShrinkingSolution::Kind::Sphere, 2.0, 7};
  CHECK(shrink_radius(sph, 0.0) == Catch::Approx(2.0));
  CHECK_THROWS_AS(shrink_radius(sph, 1.0), FlowError);
  CHECK(sph.extinction_time() == Catch::Approx(4.0 / 14.0));
}

TEST_CASE("dumbbell: near-cylindrical neck, no codimension bending unless asked") {
  models::DumbbellSpec spec;
  spec.nodes = 600;
  auto a = models::dumbbell(spec);
  ProfileGeometry pg(a);
  // ratio near 1/4 at the neck centre
  int ic = 0;
  for (int i = 1; i < a.nodes() - 1; ++i)
    if (std::abs(a.z[i]) < std::abs(a.z[ic]) || ic == 0) ic = i;
  CHECK(pg.forms(ic).ratio() > 0.20);
  CHECK(pg.forms(ic).ratio() < 0.30);
  // no deflection: |W_-|^2 = 0 up to the |A|^2 - |W_nu|^2 cancellation noise
  double wmax = 0;
  for (int i = 1; i < a.nodes() - 1; ++i) wmax = std::max(wmax, pg.forms(i).Wminus2);
  CHECK(wmax < 1e-12);
}

TEST_CASE("profile snapshot round trip is bit exact") {
  models::DumbbellSpec spec;
  spec.nodes = 50;
  spec.deflection = 1e-3;
  auto a = models::dumbbell(spec);
  std::ostringstream os;
  write_profile(a, os);
  std::istringstream is(os.str());
  auto b = read_profile(is);
  REQUIRE(b.nodes() == a.nodes());
  CHECK(b.n == a.n);
  CHECK(b.m == a.m);
  CHECK(b.end_lo == a.end_lo);
  for (int i = 0; i < a.nodes(); ++i) {
    CHECK(b.z[i] == a.z[i]);
    CHECK(b.r[i] == a.r[i]);
    CHECK((b.w[i] - a.w[i]).norm() == 0.0);
  }
}

TEST_CASE("degenerate profile radius is rejected") {
  auto a = models::cylinder(3, 1, 1.0, 4.0, 32);
  a.end_lo = a.end_hi = EndCondition::Open;
  a.r[5] = 1e-13;
  a.closed_form.reset();
  ProfileGeometry pg(a);
  CHECK_THROWS_AS(ansatz_forms(pg, 5), FlowError);
}
