// Torpedo, perfect-torpedo and double-torpedo warping functions, and the
// plane torpedo curve.
#pragma once

#include <cmath>
#include <vector>

#include "psc/arc.hpp"
#include "psc/membership.hpp"
#include "psc/warp.hpp"

namespace psc {

// Width of the cap-to-neck join, as a fraction of delta * pi / 2.
inline constexpr double kTorpedoWindow = 0.05;

struct TorpedoSpec {
  double delta = 1.0;
  double domain_end = M_PI;
  double neck_start = M_PI / 2;
};

// Phi(x) = integral_0^x (1 - S): equals x for x <= 0 and 1/2 for x >= 1.
inline const NodePtr& soft_clamp() {
  static const NodePtr node =
      extend(integral(sum({constant(1.0), scale(-1.0, step(0.0, 1.0))}), 0.0, 0.0, 1.0, 64), 0.0, 1.0);
  return node;
}

// w * (x - Phi(x)) with x = (r - r1) / w: zero before r1, slope 1 after r1 + w.
inline NodePtr soft_ramp(double r1, double w) {
  return scale(w, sum({linear(1.0 / w, -r1 / w), scale(-1.0, affine(1.0 / w, -r1 / w, soft_clamp()))}));
}

// eta_1 = sin(phi(r)) with phi(r) = r below the join and pi/2 above it.
inline const NodePtr& unit_torpedo() {
  static const NodePtr node = [] {
    double w = kTorpedoWindow * M_PI / 2;
    double a = M_PI / 2 - w / 2;
    NodePtr phi = sum({constant(a), scale(w, affine(1.0 / w, -a / w, soft_clamp()))});
    return compose(sincap(1.0), phi);
  }();
  return node;
}

// Jet of eta_1 at x: sin below the join, 1 above it, the tree inside it.
inline Jet unit_torpedo_jet(double x, int n) {
  double w = kTorpedoWindow * M_PI / 2;
  double a = M_PI / 2 - w / 2;
  if (x <= a) return sin(Jet::variable(x, n));
  if (x >= a + w) return Jet::constant(1.0, n);
  return unit_torpedo()->eval(x, n);
}

// Jet of delta * eta_1(r / delta).
inline Jet perfect_torpedo_jet(double delta, double r, int n) {
  Jet j = unit_torpedo_jet(r / delta, n);
  double f = delta;
  for (int k = 0; k < n; ++k, f /= delta) j.c[k] *= f;
  return j;
}

inline double perfect_neck_start(double delta) { return delta * M_PI / 2 * (1.0 + kTorpedoWindow / 2); }

// Largest radius whose perfect torpedo keeps an open neck on [0, b].
inline double max_perfect_radius(double b) { return 2.0 * b / (M_PI * (1.0 + kTorpedoWindow)); }

inline NodePtr perfect_torpedo_node(double delta) {
  if (delta == 1.0) return unit_torpedo();
  return scale(delta, affine(1.0 / delta, 0.0, unit_torpedo()));
}

inline WarpFunction perfect_torpedo(double delta, double b) {
  if (!(delta > 0.0)) fail(ErrorKind::Construction, "torpedo radius must be positive");
  if (b < delta * M_PI / 2) fail(ErrorKind::NeckTooShort, "b < delta pi / 2");
  return WarpFunction(perfect_torpedo_node(delta), b);
}

inline TorpedoSpec perfect_torpedo_spec(double delta, double b) { return {delta, b, perfect_neck_start(delta)}; }

// A torpedo whose neck begins before the neckline: eta' = cos r (1 - S) closing at
// r = close, rescaled to radius delta.
struct BluntShape {
  double close = 0.8;
  double width_frac = 0.25;
};

inline WarpFunction blunt_torpedo(double delta, double b, BluntShape shape = {}) {
  double w = shape.width_frac * shape.close;
  double r1 = shape.close - w;
  NodePtr slope = product(affine(1.0, M_PI / 2, sincap(1.0)),
                          sum({constant(1.0), scale(-1.0, step(r1, w))}));
  NodePtr eta = integral(slope, 0.0, 0.0, shape.close, 128);
  double d0 = eta->value(shape.close);
  double neck = shape.close * delta / d0;
  if (b < neck) fail(ErrorKind::NeckTooShort, "blunt torpedo neck does not fit in [0, b]");
  return WarpFunction(scale(delta / d0, affine(d0 / delta, 0.0, hold(eta, shape.close))), b);
}

// Detects the start of the constant neck: first grid point after which |eta'| and
// |eta''| stay below 1e-12.
inline double detect_neck_start(const WarpFunction& w, const Tolerances& tol) {
  auto g = r_grid(w.domain_end(), tol);
  double start = w.domain_end();
  for (int i = static_cast<int>(g.size()) - 1; i >= 0; --i) {
    Jet j = w.jet(g[i], 3);
    if (std::abs(j.c[1]) > 1e-12 || std::abs(j.c[2]) > 1e-12) break;
    start = g[i];
  }
  return start;
}

inline MembershipReport is_torpedo(const WarpFunction& w, int n, const Tolerances& tol = default_tolerances(),
                                   bool require_open_neck = true) {
  MembershipReport rep = check_B_membership(w, tol);
  double b = w.domain_end();
  rep.certificate = certify_positive(RotSymMetric::single(w, n), tol);
  rep.add("positive_curvature", rep.certificate.passed, rep.certificate.min_R);
  Jet je = w.jet(b, K + 1);
  rep.add("end_value", je.c[0] > 0.0, je.c[0]);
  double hmax = 0.0;
  for (int k = 1; k <= K; ++k) hmax = std::max(hmax, std::abs(je.derivative(k)));
  rep.add("end_horizontal", hmax <= tol.equality, hmax);
  double max_curv = -INFINITY, min_slope = INFINITY, max_slope = -INFINITY;
  for (double r : r_grid(b, tol)) {
    Jet j = w.jet(r, 3);
    max_curv = std::max(max_curv, 2.0 * j.c[2]);
    min_slope = std::min(min_slope, j.c[1]);
    max_slope = std::max(max_slope, j.c[1]);
  }
  rep.add("concave", max_curv <= 1e-10, max_curv);
  int cnt = 0;
  rep.r_d = detect_r_d(w, tol, &cnt);
  rep.add("concave_near_0", cnt >= kConcaveWindowPoints, rep.r_d);
  rep.add("slope_lower", min_slope >= -1e-10, min_slope);
  rep.add("slope_upper", max_slope <= 1.0 + 1e-10, max_slope);
  rep.neck_start = detect_neck_start(w, tol);
  if (require_open_neck) rep.add("open_neck", rep.neck_start < b, rep.neck_start);
  return rep;
}

struct RetractResult {
  WarpFunction target;
  double delta = 0.0;
  std::vector<double> path_t;
  std::vector<MembershipReport> path;
  bool path_ok() const {
    for (const auto& r : path)
      if (!r.passed()) return false;
    return true;
  }
};

inline RetractResult retract_to_perfect(const WarpFunction& w, int n, const Tolerances& tol = default_tolerances()) {
  if (!is_torpedo(w, n, tol).passed()) fail(ErrorKind::Precondition, "input is not a torpedo");
  double b = w.domain_end();
  RetractResult res;
  res.delta = std::min(max_perfect_radius(b), w.eval(b));
  res.target = perfect_torpedo(res.delta, b);
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    WarpFunction h(sum({scale(1.0 - t, res.target.tree()), scale(t, w.tree())}), b);
    res.path_t.push_back(t);
    res.path.push_back(is_torpedo(h, n, tol));
  }
  return res;
}

inline WarpFunction double_torpedo(const WarpFunction& eta, int n, const Tolerances& tol = default_tolerances()) {
  if (!is_torpedo(eta, n, tol).passed()) fail(ErrorKind::Precondition, "input is not a torpedo");
  double b = eta.domain_end();
  NodePtr mirrored = affine(-1.0, 2.0 * b, eta.tree());
  return WarpFunction(glue(eta.tree(), mirrored, b, 1e-6 * b), 2.0 * b);
}

struct TorpedoCurve {
  std::vector<double> r, alpha, beta;
  double unit_speed_residual = 0.0;  // max |alpha'^2 + beta'^2 - 1| with alpha' by central differences
  double axis_slope = 0.0;           // alpha'(0)
};

inline TorpedoCurve torpedo_curve(const WarpFunction& beta, int samples = 512) {
  require_unit_speed_compatible(beta);
  double b = beta.domain_end();
  double extent = horizontal_extent(beta);
  NodePtr alpha = alpha_node(beta, extent);
  TorpedoCurve c;
  c.r.resize(samples);
  c.alpha.resize(samples);
  c.beta.resize(samples);
  double h = 1e-5 * b;
  for (int i = 0; i < samples; ++i) {
    double r = b * i / double(samples - 1);
    c.r[i] = r;
    c.alpha[i] = alpha->value(r);
    Jet bj = beta.jet(r, 2);
    c.beta[i] = bj.c[0];
    if (r - h >= 0.0 && r + h <= b) {
      double ad = (alpha->value(r + h) - alpha->value(r - h)) / (2.0 * h);
      c.unit_speed_residual = std::max(c.unit_speed_residual, std::abs(ad * ad + bj.c[1] * bj.c[1] - 1.0));
    }
  }
  c.axis_slope = alpha->eval(0.0, 2).c[1];
  return c;
}

}  // namespace psc
