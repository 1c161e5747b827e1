#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psc/curvature.hpp"
#include "psc/io.hpp"
#include "psc/torpedo.hpp"

using namespace psc;

namespace {

double uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

double sup_diff(const WarpFunction& a, const WarpFunction& b, int samples = 2001) {
  double s = 0.0, end = std::min(a.domain_end(), b.domain_end());
  for (int i = 0; i < samples; ++i) {
    double r = end * i / (samples - 1.0);
    s = std::max(s, std::abs(a.eval(r) - b.eval(r)));
  }
  return s;
}

}  // namespace

TEST(PerfectTorpedo, UnitOnPi) {
  WarpFunction w = perfect_torpedo(1.0, M_PI);
  EXPECT_NEAR(w.eval(M_PI), 1.0, 1e-14);
  JetVector j = w.jet_at_end();
  EXPECT_NEAR(j[0], 1.0, 1e-14);
  for (int k = 1; k <= K; ++k) EXPECT_EQ(j[k], 0.0);
  EXPECT_NEAR(w.eval(M_PI / 4), std::sin(M_PI / 4), 1e-14);
}

TEST(PerfectTorpedo, RadiusTwoScales) {
  WarpFunction w = perfect_torpedo(2.0, 10.0);
  for (double r = perfect_neck_start(2.0); r <= 10.0; r += 0.25) EXPECT_EQ(w.eval(r), 2.0) << r;
  for (int i = 0; i <= 50; ++i) {
    double r = 0.95 * M_PI * i / 50.0;
    EXPECT_NEAR(w.eval(r), 2.0 * std::sin(r / 2.0), 1e-14);
  }
}

TEST(PerfectTorpedo, NeckTooShort) {
  try {
    perfect_torpedo(1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NeckTooShort);
  }
}

TEST(PerfectTorpedo, Neckline) {
  // The mollified join stays within 1 - sin(pi/2 (1 - window)) of the neckline value.
  for (double d : {0.5, 1.0, 3.0}) {
    WarpFunction w = perfect_torpedo(d, 2.0 * d * M_PI);
    EXPECT_NEAR(w.eval(d * M_PI / 2) / d, 1.0, 1.0 - std::sin(M_PI / 2 * (1.0 - kTorpedoWindow)));
    EXPECT_LE(w.eval(d * M_PI / 2), d);
    EXPECT_EQ(w.eval(perfect_neck_start(d)), d);
  }
}

TEST(IsTorpedo, Examples) {
  EXPECT_TRUE(is_torpedo(perfect_torpedo(1.0, M_PI), 3).passed());
  auto id = is_torpedo(WarpFunction(identity(), 1.0), 3);
  EXPECT_FALSE(id.passed());
  EXPECT_FALSE(id.passed("end_horizontal"));
}

TEST(IsTorpedo, BluntNeckBeforeNeckline) {
  WarpFunction w = blunt_torpedo(1.0, M_PI);
  auto rep = is_torpedo(w, 3);
  EXPECT_TRUE(rep.passed());
  EXPECT_LT(rep.neck_start, M_PI / 2);
}

TEST(Retract, BluntToPerfectOfSameRadius) {
  auto res = retract_to_perfect(blunt_torpedo(1.5, M_PI), 3);
  EXPECT_NEAR(res.delta, 1.5, 1e-12);
  EXPECT_TRUE(res.path_ok());
  EXPECT_EQ(res.path.size(), 5u);
}

TEST(Retract, LargeRadiusIsCapped) {
  WarpFunction w = blunt_torpedo(2.5, M_PI);
  ASSERT_TRUE(is_torpedo(w, 3).passed());
  auto res = retract_to_perfect(w, 3);
  EXPECT_NEAR(res.delta, max_perfect_radius(M_PI), 1e-15);
  EXPECT_LT(res.delta, 2.0);
  EXPECT_TRUE(res.path_ok());
}

TEST(Retract, PerfectIsFixed) {
  WarpFunction w = perfect_torpedo(1.0, M_PI);
  auto res = retract_to_perfect(w, 3);
  EXPECT_LE(sup_diff(res.target, w), 1e-8);
}

TEST(Retract, RejectsNonTorpedo) {
  try {
    retract_to_perfect(WarpFunction(identity(), 1.0), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
}

TEST(DoubleTorpedo, Capsule) {
  WarpFunction d = double_torpedo(perfect_torpedo(1.0, M_PI), 3);
  double b = d.domain_end();
  EXPECT_DOUBLE_EQ(b, 2.0 * M_PI);
  EXPECT_NEAR(d.eval(M_PI), 1.0, 1e-14);
  double sym = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    double t = b * i / 2000.0;
    sym = std::max(sym, std::abs(d.eval(t) - d.eval(b - t)));
  }
  EXPECT_LE(sym, 1e-14);  // b - t is itself rounded
  JetVector j = d.jet_at_end();
  EXPECT_NEAR(j[0], 0.0, 1e-14);
  EXPECT_NEAR(j[1], -1.0, 1e-14);
  for (int k = 2; k <= K; k += 2) EXPECT_NEAR(j[k], 0.0, 1e-12) << k;
}

TEST(DoubleTorpedo, PositiveScalarCurvature) {
  WarpFunction d = double_torpedo(perfect_torpedo(1.0, M_PI), 3);
  for (int n = 3; n <= 5; ++n) {
    auto cert = certify_positive(RotSymMetric::single(d, n));
    EXPECT_TRUE(cert.passed) << n;
    EXPECT_GT(cert.min_R, 0.0);
  }
}

TEST(DoubleTorpedo, RejectsNonTorpedo) {
  EXPECT_THROW(double_torpedo(WarpFunction(identity(), 1.0), 3), Error);
}

TEST(TorpedoCurve, NeckSlopeAndAxisAngle) {
  TorpedoCurve c = torpedo_curve(perfect_torpedo(1.0, M_PI), 512);
  ASSERT_EQ(c.r.size(), 512u);
  EXPECT_LT(c.unit_speed_residual, 1e-8);
  EXPECT_LE(std::abs(c.axis_slope), 1e-6);
  size_t i = 400, k = 500;
  ASSERT_GT(c.r[i], perfect_neck_start(1.0));
  EXPECT_NEAR((c.alpha[k] - c.alpha[i]) / (c.r[k] - c.r[i]), -1.0, 1e-9);
}

TEST(TorpedoCurve, CapIsCircularArc) {
  double d = 0.7;
  TorpedoCurve c = torpedo_curve(perfect_torpedo(d, 3.0), 512);
  double centre = c.alpha[0] - d;
  for (size_t i = 0; i < c.r.size(); ++i) {
    if (c.r[i] > d * M_PI / 2 * (1.0 - kTorpedoWindow)) break;
    double x = c.alpha[i] - centre;
    EXPECT_NEAR(std::hypot(x, c.beta[i]), d, 1e-9) << c.r[i];
  }
}

TEST(TorpedoCurve, RejectsSteepProfile) {
  try {
    torpedo_curve(WarpFunction(linear(2.0), 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotUnitSpeedCompatible);
  }
}

TEST(TorpedoCurve, Csv) {
  std::string text = io::torpedo_curve_csv(torpedo_curve(perfect_torpedo(1.0, M_PI))).text();
  EXPECT_EQ(text.substr(0, text.find('\n')), "r,alpha,beta");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 513);
}

TEST(Convexity, RandomPairs) {
  std::mt19937_64 g(7);
  const double b = M_PI;
  auto random_torpedo = [&] {
    if (g() & 1) return perfect_torpedo(0.3 + 1.5 * uniform(g), b);
    BluntShape s{0.6 + 0.3 * uniform(g), 0.15 + 0.2 * uniform(g)};
    return blunt_torpedo(0.3 + 1.5 * uniform(g), b, s);
  };
  for (int p = 0; p < 50; ++p) {
    WarpFunction x = random_torpedo(), y = random_torpedo();
    for (int i = 1; i <= 9; ++i) {
      double t = i / 10.0;
      WarpFunction h(sum({scale(1.0 - t, x.tree()), scale(t, y.tree())}), b);
      EXPECT_TRUE(is_torpedo(h, 3).passed()) << "pair " << p << " t=" << t;
    }
  }
}

TEST(Positivity, TorpedoesNeedDimensionThree) {
  WarpFunction w = perfect_torpedo(1.0, M_PI);
  EXPECT_TRUE(certify_positive(RotSymMetric::single(w, 3)).passed);
  EXPECT_FALSE(certify_positive(RotSymMetric::single(w, 2)).passed);
}
