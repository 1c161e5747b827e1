#include <gtest/gtest.h>

#include <cmath>

#include "psc/curves.hpp"
#include "psc/membership.hpp"
#include "psc/quadrature.hpp"
#include "psc/torpedo.hpp"

using namespace psc;

namespace {

NodePtr example_T() { return scale(0.3, sum({constant(1.0), scale(-1.0, step(0.1, 0.4))})); }

double arc_length(const AdmissibleCurve& c, double end) {
  return quad::adaptive_simpson(
      [&](double s) { return std::hypot(c.gamma_t->eval(s, 2).c[1], c.gamma_r->eval(s, 2).c[1]); }, 0.0, end, 1e-12);
}

}  // namespace

TEST(Validate, VerticalLine) {
  auto rep = validate_admissible(vertical_line(1.0));
  EXPECT_TRUE(rep.passed());
}

TEST(Validate, GromovLawsonCurve) {
  AdmissibleCurve c = gl_curve(0.2, 0.5, 1.0);
  auto rep = validate_admissible(c);
  EXPECT_TRUE(rep.passed());
  EXPECT_NEAR(c.pts[0].r, 0.5, 1e-10);
  // Initial segment is the delta-torpedo curve.
  WarpFunction eta = perfect_torpedo(0.2, perfect_neck_start(0.2));
  for (int i = 0; i <= 50; ++i) {
    double s = perfect_neck_start(0.2) * i / 50.0;
    EXPECT_NEAR(c.gamma_r->value(s), eta.eval(s), 1e-12);
  }
}

TEST(Validate, CuspFailsRegularity) {
  NodePtr a = linear(1.0, -0.5);
  NodePtr gr = sum({product(a, product(a, a)), constant(0.125)});
  NodePtr gt = sum({constant(1.0), scale(-1.0, sum({product(a, a), constant(-0.25)}))});
  auto rep = validate_admissible(parametric_curve(gt, gr, 1.0, 0.25, 0.25));
  EXPECT_FALSE(rep.passed("ii_regular"));
}

TEST(GL, FirstBendCanBeLowered) {
  AdmissibleCurve c = gl_curve(0.2, 0.25, 1.0);
  EXPECT_TRUE(validate_admissible(c).passed());
  EXPECT_NEAR(c.gamma_r->value(c.s_top), 0.25, 1e-10);
  EXPECT_NEAR(c.gamma_t->eval(c.s_top + 0.1, 2).c[1], 0.0, 1e-12);
}

TEST(GL, DegenerateIsVertical) {
  AdmissibleCurve c = gl_curve(0.0, 0.5, 1.0);
  EXPECT_EQ(c.kind, AdmissibleCurve::Kind::Vertical);
}

TEST(GL, InfeasibleGeometry) {
  try {
    gl_curve(0.6, 0.5, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Construction);
  }
}

TEST(Graph, ExampleValidates) {
  AdmissibleCurve c = graph_curve(example_T(), 0.5, 1.0);
  auto rep = validate_admissible(c);
  EXPECT_TRUE(rep.passed());
  EXPECT_NEAR(c.t_bar, 0.3, 1e-12);
}

TEST(ArcLength, VerticalLine) {
  auto p = arc_length_param(vertical_line(2.0));
  EXPECT_EQ(p.length, 2.0);
  for (double s : {0.0, 0.7, 2.0}) EXPECT_EQ(p.gamma_r->value(s), s);
}

TEST(ArcLength, QuarterCircle) {
  double rho = 0.8;
  auto p = arc_length_param(profile_curve(sincap(rho), rho * M_PI / 2, rho, rho));
  EXPECT_NEAR(p.length, rho * M_PI / 2, 1e-15);
  EXPECT_LE(p.unit_speed_residual, 1e-8);
  for (int i = 0; i <= 20; ++i) {
    double s = p.length * i / 20.0;
    EXPECT_NEAR(p.gamma_r->value(s), rho * std::sin(s / rho), 1e-14);
  }
}

TEST(ArcLength, GLProperties) {
  AdmissibleCurve c = gl_curve(0.2, 0.5, 1.0);
  auto p = arc_length_param(c);
  EXPECT_GE(p.length, c.r_bar);
  EXPECT_LE(p.unit_speed_residual, 1e-8);
  EXPECT_EQ(p.gamma_r->value(0.0), 0.0);
  EXPECT_NEAR(p.gamma_r->eval(0.0, 2).c[1], 1.0, 1e-12);
  EXPECT_NEAR(p.gamma_r->eval(p.length - 1e-3, 2).c[1], 1.0, 1e-12);
}

TEST(ArcLength, RoundTrip) {
  for (const AdmissibleCurve& c : {vertical_line(1.0), gl_curve(0.2, 0.5, 1.0), gl_curve(0.1, 0.3, 1.0),
                                   graph_curve(example_T(), 0.5, 1.0)}) {
    auto p = arc_length_param(c);
    EXPECT_NEAR(arc_length(c, p.length), p.length, 1e-8);
  }
}

TEST(SGamma, IdentityWhenLengthIsRadius) {
  WarpFunction s = s_gamma(1.0, 1.0, 0.3);
  for (int i = 0; i <= 100; ++i) EXPECT_NEAR(s.eval(i / 100.0), i / 100.0, 1e-14);
}

TEST(SGamma, BranchValues) {
  WarpFunction s = s_gamma(2.0, 1.0, 0.2);
  EXPECT_NEAR(s.eval(0.5), 1.0, 1e-14);
  EXPECT_NEAR(s.eval(0.95), 1.95, 1e-14);
  double min_d = INFINITY;
  for (int i = 0; i <= 4096; ++i) min_d = std::min(min_d, s.eval(i / 4096.0, 1));
  EXPECT_GT(min_d, 0.0);
}

TEST(SGamma, ShortCurveIsInfeasible) {
  try {
    s_gamma(0.9, 1.0, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(Homotopy, VerticalIsFixed) {
  for (double s : {0.0, 0.5, 1.0}) {
    AdmissibleCurve c = homotopy_to_vertical(vertical_line(1.0), s);
    EXPECT_EQ(c.kind, AdmissibleCurve::Kind::Vertical);
    EXPECT_EQ(c.length, 1.0);
  }
}

TEST(Homotopy, GraphScalesLinearly) {
  AdmissibleCurve c = homotopy_to_vertical(graph_curve(example_T(), 0.5, 1.0), 0.5);
  NodePtr T = example_T();
  for (int i = 0; i <= 40; ++i) EXPECT_NEAR(c.graph->value(i / 40.0), 0.5 * T->value(i / 40.0), 1e-15);
  EXPECT_TRUE(validate_admissible(c).passed());
}

TEST(Homotopy, GLSweepStaysAdmissible) {
  AdmissibleCurve c = gl_curve(0.3, 0.5, 1.0);
  for (int k = 0; k <= 10; ++k) {
    AdmissibleCurve h = homotopy_to_vertical(c, k / 10.0);
    auto rep = validate_admissible(h);
    EXPECT_TRUE(rep.passed()) << k;
    EXPECT_LE(h.pts[0].r, 0.5 + 1e-10);
    double top = h.kind == AdmissibleCurve::Kind::Vertical ? 0.0 : h.s_top;
    EXPECT_NEAR(h.gamma_t->eval(top + 0.25, 2).c[1], 0.0, 1e-12);
  }
  EXPECT_EQ(homotopy_to_vertical(c, 1.0).kind, AdmissibleCurve::Kind::Vertical);
}

TEST(Compose, VerticalIsIdentity) {
  WarpFunction w = perfect_torpedo(0.5, 2.0);
  WarpFunction v = compose_warp(w, vertical_line(2.0));
  for (int i = 0; i <= 50; ++i) EXPECT_EQ(v.eval(2.0 * i / 50.0), w.eval(2.0 * i / 50.0));
}

TEST(Compose, TorpedoThroughGLCurve) {
  WarpFunction w = perfect_torpedo(0.3, 2.0);
  AdmissibleCurve c = gl_curve(0.2, 0.5, 2.0);
  WarpFunction v = compose_warp(w, c);
  EXPECT_NEAR(v.domain_end(), c.s_top + 1.5, 1e-12);
  JetVector j = v.jet_at_end();
  EXPECT_NEAR(j[0], 0.3, 1e-12);
  for (int k = 1; k <= K; ++k) EXPECT_NEAR(j[k], 0.0, 1e-10) << k;
  EXPECT_TRUE(check_W_membership(v, 4).passed());
  EXPECT_EQ(v.eval(0.0), 0.0);
  EXPECT_NEAR(v.eval(0.0, 1), 1.0, 1e-12);
}

TEST(Compose, IteratedStaysInW) {
  WarpFunction w = perfect_torpedo(0.3, 2.0);
  WarpFunction once = compose_warp(w, gl_curve(0.2, 0.5, 2.0));
  WarpFunction twice = compose_warp(once, gl_curve(0.1, 0.3, once.domain_end()));
  EXPECT_TRUE(check_W_membership(twice, 4).passed());
  double prev = -1.0;
  for (int i = 0; i <= 2000; ++i) {
    double v = twice.eval(twice.domain_end() * i / 2000.0);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
}

TEST(Compose, TwoSphereFibreNeedsGentleBend) {
  // With q = 2 the convex bend term -2q w' gamma_r'' / w outweighs q(q-1)/w^2 for the
  // default rise speed; a slower rise keeps the bare warped product positive.
  WarpFunction w = perfect_torpedo(0.3, 2.0);
  auto sharp = check_W_membership(compose_warp(w, gl_curve(0.2, 0.5, 2.0)), 3);
  EXPECT_FALSE(sharp.passed("positive_curvature"));
  EXPECT_TRUE(sharp.passed("monotone"));
  EXPECT_TRUE(sharp.passed("horizontal_end"));
  EXPECT_TRUE(sharp.passed("concave_near_0"));
  BendProfile gentle{0.5, 0.25, 0.5};
  EXPECT_TRUE(check_W_membership(compose_warp(w, gl_curve(0.2, 0.5, 2.0, gentle)), 3).passed());
}

TEST(Compose, HomotopyEndpointRecoversOmega) {
  WarpFunction w = perfect_torpedo(0.3, 2.0);
  WarpFunction v = compose_warp(w, homotopy_to_vertical(gl_curve(0.2, 0.5, 2.0), 1.0));
  double sup = 0.0;
  for (int i = 0; i <= 500; ++i) sup = std::max(sup, std::abs(v.eval(2.0 * i / 500.0) - w.eval(2.0 * i / 500.0)));
  EXPECT_LE(sup, 1e-8);
}

TEST(Compose, DomainMismatch) {
  try {
    compose_warp(perfect_torpedo(0.1, 0.4), gl_curve(0.2, 0.5, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Range);
  }
}

TEST(Json, RoundTrip) {
  for (const AdmissibleCurve& c : {vertical_line(1.5), gl_curve(0.2, 0.5, 1.0), graph_curve(example_T(), 0.5, 1.0)}) {
    AdmissibleCurve d = AdmissibleCurve::from_json(c.to_json());
    EXPECT_EQ(d.to_json(), c.to_json());
    EXPECT_EQ(d.gamma_r->value(0.37), c.gamma_r->value(0.37));
  }
}

TEST(Samples, CountAndEndpoints) {
  AdmissibleCurve c = gl_curve(0.2, 0.5, 1.0);
  CurveSamples s = sample_curve(c, 512);
  ASSERT_EQ(s.s.size(), 512u);
  EXPECT_EQ(s.r.front(), 0.0);
  EXPECT_NEAR(s.r.back(), 1.0, 1e-10);
  EXPECT_NEAR(s.t.back(), 0.0, 1e-12);
}
