#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "psc/bend.hpp"

using namespace psc;

namespace {

template <class F>
std::optional<ErrorKind> kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

WarpFunction round_beta(double d) { return WarpFunction(sincap(d), M_PI * d); }

// 1.1 x the certified family radius for the delta = 1, l1 = 1, n = 5 boot torpedo.
double boot_c() {
  static const double c = default_bend_radius(boot_torpedo(1.0, 1.0), 5, 1.0);
  return c;
}

BootSpec boot_spec() {
  BootSpec s;
  s.c = boot_c();
  return s;
}

const BootAssembly& boot() {
  static const BootAssembly a = boot_metric(boot_spec());
  return a;
}

double stage_zone() { return 2.0 + M_PI / 2; }

StepSpec three_stage_spec() {
  StepSpec s;
  s.base = {1.0, 1.0, 3.0 * stage_zone() + 1.0, 5};
  s.c = boot_c();
  double t = s.base.length;
  s.stages = {{t, 1.0}, {t - stage_zone(), 0.6}, {t - 2.0 * stage_zone(), 1.0}};
  return s;
}

}  // namespace

TEST(BentCylinder, RoundCompanionIsCosine) {
  const double d = 0.8, c = 2.5;
  RotSymMetric m = bent_cylinder_metric(round_beta(d), c, 4);
  for (int i = 0; i <= 40; ++i) {
    double r = M_PI * d * i / 40.0;
    EXPECT_NEAR(m.psi->value(r), c + d * std::cos(r / d), 1e-9) << r;
  }
}

TEST(BentCylinder, FlatProfileIsProduct) {
  WarpFunction beta(identity(), 1.0);
  RotSymMetric m = bent_cylinder_metric(beta, 3.0, 4);
  double p0 = m.psi->value(0.0);
  for (int i = 0; i <= 20; ++i) {
    double r = i / 20.0;
    EXPECT_NEAR(m.psi->value(r), p0, 1e-12);
    EXPECT_NEAR(m.psi->eval(r, 2).c[1], 0.0, 1e-12);
  }
  for (double r : {0.2, 0.5, 0.9}) EXPECT_NEAR(m.R(r), 0.0, 1e-9);
}

TEST(BentCylinder, DoubleTorpedoCompanionDescends) {
  WarpFunction d = double_torpedo(perfect_torpedo(1.0, M_PI), 3);
  RotSymMetric m = bent_cylinder_metric(d, 2.5, 4);
  double prev = INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    double v = m.psi->value(d.domain_end() * i / 1000.0);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  EXPECT_GT(m.psi->value(0.0), m.psi->value(d.domain_end()));
}

TEST(BentCylinder, LargeRadiusApproachesProduct) {
  WarpFunction beta = perfect_torpedo(1.0, M_PI);
  const int n = 4;
  RotSymMetric m = bent_cylinder_metric(beta, 1e6, n);
  for (int i = 1; i <= 64; ++i) {
    double r = M_PI * i / 64.0;
    EXPECT_NEAR(m.R(r), scalar_curvature_single(beta, n, r), 1e-3) << r;
  }
}

TEST(BentCylinder, Errors) {
  EXPECT_EQ(kind_of([] { bent_cylinder_metric(round_beta(1.0), 1.5, 4); }), ErrorKind::InvalidBend);
  EXPECT_EQ(kind_of([] { bent_cylinder_metric(WarpFunction(linear(2.0), 1.0), 5.0, 4); }), ErrorKind::InvalidBend);
}

TEST(MinBendRadius, RoundEmbeddingConstraintDominates) {
  for (int n : {3, 4, 10}) {
    BendRadius br = min_bend_radius(round_beta(1.0), n);
    EXPECT_GT(br.c_star, 2.0) << n;
    EXPECT_LT(br.c_star, 2.0 + 1e-5) << n;
    EXPECT_TRUE(br.certificate.passed);
    EXPECT_DOUBLE_EQ(br.embedding_bound, 2.0);
    EXPECT_DOUBLE_EQ(br.crude_bound, 2.0 / (n - 1.0));
    EXPECT_DOUBLE_EQ(br.round_bound, 1.0 + 2.0 / (n - 1.0));
    EXPECT_LE(br.round_bound, br.embedding_bound);
  }
}

TEST(MinBendRadius, CurvatureConstraintBindsForSmallRadius) {
  // For n = 3 the round profile needs c > delta + delta = 2 delta exactly at the far tip.
  BendRadius br = min_bend_radius(round_beta(1.0), 3);
  RotSymMetric m = bent_cylinder_metric(round_beta(1.0), br.c_star, 3);
  EXPECT_NEAR(m.R(M_PI - 1e-3), 6.0 - 6.0 / (br.c_star - 1.0), 1e-3);
  EXPECT_EQ(kind_of([] { min_bend_radius(round_beta(1.0), 2); }), ErrorKind::Precondition);
}

TEST(Transition, FlatAtThetaZero) {
  TransitionProfile p = transition_profile(0.0, 1.0, 3.0, affine(1.0, M_PI / 2, sincap(1.0)), M_PI, false);
  for (double t : {-1.0, -0.3, 0.0, 0.7})
    for (double r : {0.0, 1.0, 3.0}) {
      WValue w = p.at(r, t);
      EXPECT_EQ(w.w, 1.0);
      EXPECT_EQ(w.wr, 0.0);
      EXPECT_EQ(w.wrr, 0.0);
    }
}

TEST(Transition, EndsAreFlatAndMiddleIsBent) {
  WarpFunction eta = boot_torpedo(1.0, 1.0);
  BendFamily f = torpedo_bend_family(eta, 5, 2.5, 1.0);
  TransitionProfile p = f.profile(M_PI / 2);
  for (double r : {0.2, 1.0, eta.domain_end()}) {
    EXPECT_EQ(p.at(r, -1.0 + 0.02).w, 1.0);
    EXPECT_EQ(p.at(r, p.t_hi() - 0.02).w, 1.0);
    EXPECT_NEAR(p.at(r, M_PI / 4).w, 2.5 + f.alpha->value(r), 1e-14);
  }
  // On the neck the companion is linear with unit slope.
  for (double r = perfect_neck_start(1.0) + 0.05; r < eta.domain_end(); r += 0.1) {
    WValue w = p.at(r, M_PI / 4);
    EXPECT_NEAR(std::abs(w.wr), 1.0, 1e-12) << r;
    EXPECT_NEAR(w.wrr, 0.0, 1e-12) << r;
  }
}

TEST(Transition, ConcavityCondition) {
  NodePtr alpha = affine(1.0, M_PI / 2, sincap(1.0));
  EXPECT_EQ(kind_of([&] { transition_profile(1.0, 1.0, 3.0, alpha, M_PI); }), ErrorKind::Construction);
  // cos is concave on [0, pi/2].
  TransitionProfile p = transition_profile(1.0, 1.0, 3.0, alpha, M_PI / 2);
  ConcavityReport rep = concavity_report(p);
  EXPECT_TRUE(rep.holds);
  EXPECT_LE(rep.max_abs_wr, 1.0);
}

TEST(Transition, Errors) {
  NodePtr alpha = affine(1.0, M_PI / 2, sincap(1.0));
  EXPECT_EQ(kind_of([&] { transition_profile(2.0, 1.0, 3.0, alpha, M_PI, false); }), ErrorKind::Range);
  EXPECT_EQ(kind_of([&] { transition_profile(1.0, 0.0, 3.0, alpha, M_PI, false); }), ErrorKind::Precondition);
  EXPECT_EQ(kind_of([&] { transition_profile(1.0, 1.0, 1.5, alpha, M_PI, false); }), ErrorKind::Precondition);
}

TEST(BendIsotopy, ThetaZeroIsCylinder) {
  WarpFunction eta = boot_torpedo(1.0, 1.0);
  BendSlice s = bend_isotopy(eta, 5, boot_c(), 0.0);
  EXPECT_TRUE(s.geometric.passed);
  for (double r : {0.3, 1.0, 2.0})
    for (double t : {-0.5, 0.0, 0.5})
      EXPECT_NEAR(bend_family_R(eta.jet(r, 3), s.w.at(r, t), 5), scalar_curvature_single(eta, 4, r), 1e-12);
}

TEST(BendIsotopy, FullBendCertifies) {
  BendSlice s = bend_isotopy(boot_torpedo(1.0, 1.0), 5, boot_c(), M_PI / 2);
  EXPECT_TRUE(s.geometric.passed);
  EXPECT_GE(s.geometric.margin, 0.0);
  EXPECT_EQ(kind_of([] { bend_isotopy(boot_torpedo(1.0, 1.0), 3, 3.0, 0.5); }), ErrorKind::Precondition);
}

TEST(BendIsotopy, MarginGrowsWithRadius) {
  BendFamily f = round_bend_family(1.0, 4, 2.05);
  BendSlice s = bend_isotopy(f, M_PI / 2);
  ASSERT_EQ(s.geometric.argmin.size(), 2u);
  double t = s.geometric.argmin[0], r = s.geometric.argmin[1];
  BendFamily g = round_bend_family(1.0, 4, 4.1);
  TransitionProfile w = g.profile(M_PI / 2);
  EXPECT_GE(bend_family_R(g.beta.jet(r, 3), w.at(r, t), 4), s.geometric.min_R);
}

TEST(BendFamily, RoundCaseCertifiesOverFamily) {
  BendFamily f = round_bend_family(1.0, 4, 2.05);
  BendFamilyCertificate c = bend_family_certificate(f);
  EXPECT_TRUE(c.geometric.passed);
  EXPECT_NEAR(c.geometric.min_R, 6.0 - 6.0 / (2.05 - 1.0), 1e-3);
  EXPECT_FALSE(c.displayed.passed);
}

TEST(BendFamily, OracleAgrees) {
  BendFamily f = round_bend_family(1.0, 4, 2.5);
  auto rep = bend_oracle_check(f, M_PI / 2, {{0.8, 0.3}, {1.5, 0.8}, {2.2, 1.2}, {1.1, -0.6}});
  EXPECT_TRUE(rep.passed) << rep.max_residual;
  BendFamily g = torpedo_bend_family(boot_torpedo(1.0, 1.0), 5, boot_c());
  auto rep2 = bend_oracle_check(g, 1.0, {{0.6, 0.4}, {1.2, -0.7}, {2.0, 0.9}});
  EXPECT_TRUE(rep2.passed) << rep2.max_residual;
}

TEST(Boot, AssemblyCertifies) {
  const BootAssembly& a = boot();
  EXPECT_TRUE(a.passed());
  EXPECT_TRUE(a.certificate.passed);
  ASSERT_EQ(a.interfaces.size(), 4u);
  for (const auto& i : a.interfaces) {
    EXPECT_LE(i.value_gap, 1e-6) << i.name;
    EXPECT_LE(i.slope_gap, 1e-6) << i.name;
  }
}

TEST(Boot, RegionClosedForms) {
  const BootAssembly& a = boot();
  ASSERT_EQ(a.regions.size(), 4u);
  for (const auto& r : a.regions) EXPECT_LE(r.closed_form_residual, 1e-9) << r.name;
  int m = a.spec.n - 2;
  for (double y : {0.1 * a.y_bend, 0.9 * a.y_bend})
    for (double x : {0.5, 1.0, 2.0}) EXPECT_NEAR(a.R(x, y), scalar_curvature_single(a.eta, a.spec.n - 1, x), 1e-9);
  for (double x = a.neck_start + 0.01; x < a.b(); x += 0.1)
    EXPECT_NEAR(a.R(x, 0.5 * (a.y_bend + a.y_foot)), m * (m - 1.0), 1e-9) << x;
}

TEST(Boot, RegionLengthsAndBoundaryCylinder) {
  const BootAssembly& a = boot();
  const auto& L = a.spec.region_lengths;
  EXPECT_NEAR(L.at("B2"), a.spec.l2, 1e-12);
  EXPECT_NEAR(L.at("R3"), a.y_bend, 1e-12);
  EXPECT_EQ(a.height(0.5 * a.y_bend), 0.0);
  EXPECT_GT(a.height(a.y_foot), 0.0);
}

TEST(Boot, ToeOracleAgrees) {
  const BootAssembly& a = boot();
  double y_mid = a.toe.y_c + 0.5 * a.toe.width, y_past = a.toe.y_c + 2.0 * a.toe.width;
  auto rep = toe_oracle_check(a, {{1.0, y_mid}, {2.0, y_mid}, {1.0, y_past}, {2.2, y_past}});
  EXPECT_TRUE(rep.passed) << rep.max_residual;
}

TEST(Boot, SpecErrors) {
  BootSpec s = boot_spec();
  s.n = 3;
  EXPECT_EQ(kind_of([&] { assemble_boot(s, 1.0); }), ErrorKind::Spec);
  s = boot_spec();
  s.c = 2.0;
  EXPECT_EQ(kind_of([&] { assemble_boot(s, 1.0); }), ErrorKind::Spec);
  s = boot_spec();
  s.l2 = 0.01;
  EXPECT_EQ(kind_of([&] { assemble_boot(s, 1.0); }), ErrorKind::Infeasible);
  EXPECT_EQ(kind_of([] { assemble_boot(boot_spec(), 1.5); }), ErrorKind::Range);
}

TEST(Boot, JsonRoundTrip) {
  BootSpec s = BootSpec::from_json(boot().spec.to_json());
  EXPECT_EQ(s.c, boot().spec.c);
  EXPECT_EQ(s.n, 5);
  EXPECT_EQ(s.to_json().at("delta"), 1.0);
}

TEST(BootIsotopy, EndpointsAndWitness) {
  BootIsotopyPlan plan = plan_boot_isotopy(1.0, 1.0, 5);
  EXPECT_GT(plan.l2_star, 0.0);
  EXPECT_TRUE(std::isfinite(plan.l2_star));
  BootIsotopySlice start = boot_isotopy(plan, 0.0);
  EXPECT_TRUE(start.assembly.passed());
  EXPECT_EQ(start.assembly.certificate.min_R, start.cylinder.min_R);
  for (double x : {0.3, 1.0, 2.0})
    for (double y : {0.0, start.assembly.y_foot - 0.1}) EXPECT_EQ(start.assembly.coefficients(x, y)[2], 1.0);
  for (double u : {0.5, 1.0}) EXPECT_TRUE(boot_isotopy(plan, u).assembly.passed()) << u;
  EXPECT_EQ(kind_of([] { plan_boot_isotopy(1.0, 1.0, 3); }), ErrorKind::Precondition);
}

TEST(Step, ZeroStagesIsCylinder) {
  StepSpec s;
  s.base = {1.0, 1.0, 4.0, 5};
  s.c = boot_c();
  StepMetric m = step_metric(s);
  EXPECT_TRUE(m.passed());
  EXPECT_EQ(m.certificate.min_R, m.product.min_R);
  for (auto row : step_profile(m)) EXPECT_EQ(row.height, 0.0);
}

TEST(Step, OneStageIsSidewaysBoot) {
  StepSpec s;
  s.base = {1.0, 1.0, stage_zone() + 1.0, 5};
  s.c = boot_c();
  s.stages = {{s.base.length, 1.0}};
  StepMetric m = step_metric(s);
  EXPECT_TRUE(m.passed());
  const BootAssembly& a = boot();
  double sup = 0.0;
  for (int i = 0; i <= 64; ++i) {
    double y = a.y_bend + (a.y_foot - a.y_bend) * i / 64.0;
    double t = s.base.length - (y - a.y_bend);
    for (double x : {0.1, 0.8, 1.6, 2.4}) sup = std::max(sup, std::abs(m.w_at(x, t) - std::sqrt(a.coefficients(x, y)[2])));
  }
  EXPECT_LE(sup, 1e-8);
}

TEST(Step, ThreeStagesCertify) {
  StepMetric m = step_metric(three_stage_spec());
  EXPECT_TRUE(m.passed());
  ASSERT_EQ(m.stage_certificates.size(), 3u);
  for (double g : m.product_zone_gap) EXPECT_EQ(g, 0.0);
  auto prof = step_profile(m);
  EXPECT_GT(prof.front().height, prof.back().height);
}

TEST(Step, NestingViolation) {
  StepSpec s = three_stage_spec();
  s.stages[1].t = s.stages[0].t - 1.0;
  EXPECT_EQ(kind_of([&] { step_metric(s); }), ErrorKind::Spec);
}

TEST(StepRetract, ZeroStagesIsFixed) {
  StepSpec s;
  s.base = {1.0, 1.0, 4.0, 5};
  s.c = boot_c();
  StepRetract r = step_retract(s);
  EXPECT_EQ(r.path.size(), 1u);
  EXPECT_TRUE(r.all_certified);
  EXPECT_TRUE(r.target == s.base);
}

TEST(StepRetract, ThreeStagesUnbend) {
  StepSpec s = three_stage_spec();
  StepRetract r = step_retract(s);
  EXPECT_TRUE(r.all_certified);
  EXPECT_TRUE(r.target == s.base);
  EXPECT_EQ(r.path.size(), 13u);
  EXPECT_LE(r.final_sup_difference, 1e-8);
  for (const auto& st : r.path.back().stages) EXPECT_EQ(st.s, 0.0);
  // The stage nearest t = 0 unbends first.
  EXPECT_LT(r.path[1].stages[2].s, 1.0);
  EXPECT_EQ(r.path[1].stages[0].s, 1.0);
}
