#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psc/curvature.hpp"
#include "psc/oracle.hpp"
#include "psc/torpedo.hpp"

using namespace psc;

namespace {

double uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

WarpFunction round_beta(double delta) { return WarpFunction(sincap(delta), delta * M_PI); }

// Round case closed form with psi = c + delta cos(r / delta); psi' = -sin and
// psi'' = -cos / delta make the bend term enter with a plus sign.
double round_R(double delta, int n, double c, double r) {
  double cs = std::cos(r / delta);
  return (n * (n - 1.0) / delta + 2.0 * n * cs / (c + delta * cs)) / delta;
}

}  // namespace

TEST(Single, Examples) {
  EXPECT_NEAR(scalar_curvature_single(perfect_torpedo(1.0, M_PI), 4, 0.7), 12.0, 1e-12);
  EXPECT_NEAR(scalar_curvature_single(WarpFunction(identity(), 1.0), 4, 0.5), 0.0, 1e-14);
  EXPECT_NEAR(scalar_curvature_single(WarpFunction(constant(0.5), 1.0), 4, 0.5), 24.0, 1e-12);
}

TEST(Single, DegenerateWarp) {
  try {
    scalar_curvature_single(WarpFunction(linear(-1.0, 0.5), 1.0), 4, 0.7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMetric);
  }
}

TEST(Single, RoundSphereIdentity) {
  for (int n = 3; n <= 6; ++n)
    for (double d : {0.5, 1.0, 2.0}) {
      WarpFunction w = round_beta(d);
      for (int i = 1; i <= 100; ++i) {
        double r = d * M_PI * i / 101.0;
        EXPECT_NEAR(scalar_curvature_single(w, n, r), n * (n - 1.0) / (d * d), 1e-9) << n << " " << d << " " << r;
      }
    }
}

TEST(DoubleWarped, Examples) {
  EXPECT_NEAR(scalar_curvature_double_warped(constant(1.0), constant(1.0), 4, 0.3), 6.0, 1e-14);
  EXPECT_NEAR(scalar_curvature_double_warped(identity(), constant(1.0), 4, 0.3), 0.0, 1e-14);
  NodePtr cosr = affine(1.0, M_PI / 2, sincap(1.0));
  NodePtr psi = sum({constant(3.0), cosr});
  EXPECT_NEAR(scalar_curvature_double_warped(sincap(1.0), psi, 4, M_PI / 2), 12.0, 1e-12);
}

TEST(DoubleWarped, AgreesWithOracle) {
  auto phi = [](double r) { return std::sin(r); };
  auto psi = [](double r) { return 3.0 + std::cos(r); };
  auto chart = oracle::doubly_warped_chart(phi, psi, 4, 0.1, 3.0);
  NodePtr psin = sum({constant(3.0), affine(1.0, M_PI / 2, sincap(1.0))});
  std::vector<oracle::Vec> pts;
  for (double r : {0.6, 1.0, M_PI / 2, 2.2}) pts.push_back(oracle::with_equator({r}, 3));
  for (auto& p : pts) p.push_back(0.0);
  auto rep = oracle::cross_check(
      [&](const oracle::Vec& x) { return scalar_curvature_double_warped(sincap(1.0), psin, 4, x[0]); }, chart, pts,
      oracle::Vec(5, 1e-3), 1e-4);
  EXPECT_TRUE(rep.passed) << rep.max_residual;
  EXPECT_NEAR(rep.ratio, 4.0, 1.0);
}

TEST(BentCylinder, RoundCase) {
  WarpFunction b = round_beta(1.0);
  EXPECT_NEAR(bent_cylinder_curvature(b, 3.0, 4, M_PI / 2), 12.0, 1e-10);
  // r -> 0 limit 12 + 8/4; the closed form is 0/0 on the axis itself.
  EXPECT_NEAR(round_R(1.0, 4, 3.0, 0.0), 14.0, 1e-14);
  EXPECT_NEAR(bent_cylinder_curvature(b, 3.0, 4, 1e-3), round_R(1.0, 4, 3.0, 1e-3), 1e-8);
  EXPECT_NEAR(bent_cylinder_curvature(b, 3.0, 4, 1e-3), 14.0, 1e-5);
}

TEST(BentCylinder, AxisLimitAgreesWithOracle) {
  auto chart = oracle::doubly_warped_chart([](double r) { return std::sin(r); },
                                           [](double r) { return 3.0 + std::cos(r); }, 4, 0.01, 3.0);
  WarpFunction b = round_beta(1.0);
  BentCylinder bc = make_bent_cylinder(b, 3.0, 4);
  for (double r : {0.25, 0.4, 0.6}) {
    oracle::Vec x = oracle::with_equator({r}, 3);
    x.push_back(0.0);
    double fd = oracle::fd_scalar_curvature_richardson(chart, x, oracle::Vec(5, 1e-3));
    EXPECT_NEAR(fd, bc.R(r), 1e-5) << r;
    EXPECT_NEAR(fd, round_R(1.0, 4, 3.0, r), 1e-5) << r;
  }
}

TEST(BentCylinder, RoundFormulaConsistency) {
  for (double d : {0.5, 1.0}) {
    WarpFunction b = round_beta(d);
    for (double c : {2.05 * d, 3.0, 10.0})
      for (int n = 3; n <= 5; ++n) {
        BentCylinder bc = make_bent_cylinder(b, c, n);
        for (int i = 1; i < 64; ++i) {
          double r = d * M_PI * i / 64.0;
          EXPECT_NEAR(bc.R(r), round_R(d, n, c, r), 1e-10) << d << " " << c << " " << n << " " << r;
        }
      }
  }
}

TEST(BentCylinder, LargeRadiusLimit) {
  WarpFunction b = perfect_torpedo(1.0, M_PI);
  BentCylinder bc = make_bent_cylinder(b, 1e6, 4);
  for (int i = 1; i <= 64; ++i) {
    double r = M_PI * i / 65.0;
    EXPECT_NEAR(bc.R(r), scalar_curvature_single(b, 4, r), 1e-4) << r;
  }
}

TEST(BentCylinder, Errors) {
  try {
    bent_cylinder_curvature(round_beta(1.0), 1.5, 4, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidBend);
  }
  try {
    bent_cylinder_curvature(WarpFunction(linear(2.0), 1.0), 10.0, 4, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotUnitSpeedCompatible);
  }
}

TEST(BendFamily, UnbentReducesToCylinderValue) {
  WarpFunction b = perfect_torpedo(1.0, M_PI);
  WProfile flat = [](double, double) { return WValue{}; };
  for (int n = 4; n <= 6; ++n)
    for (int i = 1; i <= 32; ++i) {
      double r = M_PI * i / 33.0;
      double expect = scalar_curvature_single(b, n - 1, r);
      EXPECT_NEAR(bend_family_curvature(b, flat, n, r, 0.0), expect, 1e-12);
      EXPECT_NEAR(bend_family_curvature_geometric(b, flat, n, r, 0.0), expect, 1e-12);
    }
}

TEST(BendFamily, FullyBentMatchesBentCylinderOneDimensionDown) {
  // w = c + alpha over dr^2 + beta^2 ds^2_{n-2} is the bent cylinder with sphere S^{n-2}.
  WarpFunction b = round_beta(1.0);
  double c = 3.0;
  BentCylinder bc = make_bent_cylinder(b, c, 3);
  WProfile w = [&](double r, double) {
    Jet a = bc.psi->eval(r, 3);
    return WValue{a.c[0], a.c[1], 2.0 * a.c[2]};
  };
  for (int i = 1; i < 64; ++i) {
    double r = M_PI * i / 64.0;
    EXPECT_NEAR(bend_family_curvature_geometric(b, w, 4, r, 0.0), bc.R(r), 1e-10);
    // The displayed cross-term weight 2n differs from the geometric 2(n-2) by 4 beta' w'/(beta w).
    Jet bj = b.jet(r, 3);
    WValue v = w(r, 0.0);
    double gap = 4.0 * bj.c[1] * v.wr / (bj.c[0] * v.w);
    EXPECT_NEAR(bend_family_curvature_geometric(b, w, 4, r, 0.0) - bend_family_curvature(b, w, 4, r, 0.0), gap,
                1e-10);
  }
}

TEST(BendFamily, CrossTermSignBound) {
  // With w'' <= 0 and beta', w' >= 0 the two w-terms are >= -2n beta' w'/(beta w).
  WarpFunction b = perfect_torpedo(1.0, M_PI);
  for (double c : {3.0, 10.0, 100.0}) {
    WProfile w = [c](double r, double) { return WValue{c + r - 0.05 * r * r, 1.0 - 0.1 * r, -0.1}; };
    for (int i = 1; i <= 32; ++i) {
      double r = M_PI / 2 * i / 33.0;
      Jet bj = b.jet(r, 3);
      WValue v = w(r, 0.0);
      double terms = -(2.0 * 4 / bj.c[0]) * bj.c[1] * v.wr / v.w - 2.0 * v.wrr / v.w;
      EXPECT_GE(terms, -2.0 * 4 * bj.c[1] * v.wr / (bj.c[0] * v.w));
      double base = bend_family_curvature(b, [](double, double) { return WValue{}; }, 4, r, 0.0);
      EXPECT_NEAR(bend_family_curvature(b, w, 4, r, 0.0) - base, terms, 1e-10);
    }
  }
}

TEST(Certify, Examples) {
  auto t = certify_positive(RotSymMetric::single(perfect_torpedo(1.0, M_PI), 4));
  EXPECT_TRUE(t.passed);
  EXPECT_NEAR(t.min_R, 6.0, 1e-9);

  auto convex = certify_positive(RotSymMetric::single(WarpFunction(sum({identity(), product(identity(), product(identity(), identity()))}), 1.0), 4));
  EXPECT_FALSE(convex.passed);
  EXPECT_LT(convex.margin, 0.0);

  BentCylinder bc = make_bent_cylinder(round_beta(1.0), 2.05, 4);
  auto round = certify_positive(RotSymMetric::doubly(bc.beta, bc.psi, 4));
  EXPECT_TRUE(round.passed);
  EXPECT_GT(round.min_R, 0.0);
}

TEST(Certify, DimensionHypothesis) {
  for (double d : {0.5, 1.0, 2.0}) {
    WarpFunction w = perfect_torpedo(d, 4.0 * d);
    for (int n = 3; n <= 6; ++n) EXPECT_TRUE(certify_positive(RotSymMetric::single(w, n)).passed);
    auto two = certify_positive(RotSymMetric::single(w, 2));
    EXPECT_FALSE(two.passed);
    EXPECT_NEAR(two.min_R, 0.0, 1e-12);
  }
}

TEST(Certify, JsonRoundTrip) {
  BentCylinder bc = make_bent_cylinder(round_beta(1.0), 3.0, 4);
  RotSymMetric m = RotSymMetric::doubly(bc.beta, bc.psi, 4);
  RotSymMetric back = RotSymMetric::from_json(m.to_json());
  EXPECT_EQ(back.to_json(), m.to_json());
  EXPECT_EQ(back.R(1.0), m.R(1.0));
}

TEST(Oracle, RandomSingleWarped) {
  std::mt19937_64 g(2024);
  for (int k = 0; k < 20; ++k) {
    double A = 1.0 + uniform(g), B = 0.5 * uniform(g), f = 0.5 + 1.5 * uniform(g), ph = 2 * M_PI * uniform(g);
    int n = 3 + static_cast<int>(g() % 3);
    NodePtr tree = sum({constant(A), scale(B, compose(sincap(1.0), affine(f, ph, identity())))});
    WarpFunction w(tree, 3.0);
    auto chart = oracle::single_warped_chart([&](double r) { return w.eval(r); }, n, 0.5, 2.5);
    std::vector<oracle::Vec> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(oracle::with_equator({1.0 + uniform(g)}, n - 1));
    auto rep = oracle::cross_check([&](const oracle::Vec& x) { return scalar_curvature_single(w, n, x[0]); }, chart,
                                   pts, oracle::Vec(n, 1e-3), 1e-4);
    EXPECT_TRUE(rep.passed) << k << " residual " << rep.max_residual;
    EXPECT_NEAR(rep.ratio, 4.0, 1.0) << k;
  }
}
