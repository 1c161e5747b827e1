// Admissible curves in the (t, r) quadrant and the composed warping omega o gamma_r.
//
// Curves are stored by their unit-speed components (gamma_t, gamma_r) on
// [0, length] except for the parametric kind, which keeps an arbitrary
// parameterization.  For every non-parametric kind gamma_r continues past the
// top as s -> r0 + (s - s_top), which is how compose_warp reaches height b.
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "psc/membership.hpp"
#include "psc/torpedo.hpp"
#include "psc/warp.hpp"

namespace psc {

struct BendProfile {
  double neck_length = 0.5;   // horizontal neck after the cap, in units of delta
  double v1 = 0.5;            // r-speed along the straight segment
  double width_frac = 0.5;    // each bend spans width_frac * (r0 - delta) of arc length
};

struct Breakpoint {
  double t = 0.0, r = 0.0;
};

// Second-derivative constraint on gamma_r inside a rectangle.
enum class Shape { Concave, Straight, Convex };

struct Rectangle {
  double s_lo = 0.0, s_hi = 0.0;
  Shape shape = Shape::Straight;
};

struct AdmissibleCurve {
  enum class Kind { Vertical, GL, Graph, Profile, Parametric };
  Kind kind = Kind::Vertical;
  NodePtr gamma_t, gamma_r;
  double length = 0.0;  // arc length (or parameter length) up to height r_bar
  double s_top = 0.0;   // vertical above gamma_r(s_top) = r0
  double t_bar = 0.0;
  double r_bar = 1.0;
  double r0 = 1.0;
  double delta = 0.0;
  BendProfile bend;
  NodePtr graph;  // Graph kind: t = T(r)
  std::array<Breakpoint, 6> pts{};
  std::array<Rectangle, 5> rects{};  // rects[i] spans breakpoints i+1 -> i along the curve
  bool unit_speed = true;

  json to_json() const;
  static AdmissibleCurve from_json(const json& j);
};

inline AdmissibleCurve vertical_line(double height) {
  AdmissibleCurve c;
  c.kind = AdmissibleCurve::Kind::Vertical;
  c.gamma_r = identity();
  c.gamma_t = constant(0.0);
  c.length = height;
  c.r_bar = height;
  c.r0 = 0.0;
  c.s_top = 0.0;
  for (auto& r : c.rects) r = {0.0, 0.0, Shape::Straight};
  return c;
}

inline AdmissibleCurve gl_curve(double delta, double r0, double r_bar, BendProfile bend = {}) {
  if (!(r0 > 0.0 && r0 < r_bar)) fail(ErrorKind::Construction, "require 0 < r0 < r_bar");
  if (delta < 0.0) fail(ErrorKind::Construction, "negative torpedo radius");
  if (delta == 0.0) return vertical_line(r_bar);
  if (!(delta < r0)) fail(ErrorKind::Construction, "torpedo radius too large for the first bend");
  double rise = r0 - delta;
  double W = bend.width_frac * rise;
  double v1 = bend.v1;
  double L1 = (rise - v1 * W / 2 - W * (1.0 + v1) / 2) / v1;
  if (!(W > 0.0) || L1 < 0.0) fail(ErrorKind::Construction, "bend geometry infeasible");
  double s_c = perfect_neck_start(delta);
  double s1 = s_c + bend.neck_length * delta;
  double s2 = s1 + W + L1;
  double s3 = s2 + W;

  NodePtr eta = perfect_torpedo_node(delta);
  NodePtr v = sum({scale(v1, step(s1, W)), scale(1.0 - v1, step(s2, W))});
  NodePtr rise_node = extend(integral(v, 0.0, 0.0, s3, 512), 0.0, s3);
  AdmissibleCurve c;
  c.kind = AdmissibleCurve::Kind::GL;
  c.gamma_r = sum({eta, rise_node});
  NodePtr speed_t = unit_speed_integrand(c.gamma_r);
  NodePtr run = integral(speed_t, 0.0, 0.0, s3, 512);
  double t_bar = run->value(s3);
  c.gamma_t = extend(sum({constant(t_bar), scale(-1.0, run)}), -s3, s3);
  c.t_bar = t_bar;
  c.r_bar = r_bar;
  if (std::abs(c.gamma_r->value(s3) - r0) > 1e-10) fail(ErrorKind::Construction, "bend rise misses r0");
  c.r0 = r0;
  c.delta = delta;
  c.bend = bend;
  c.s_top = s3;
  c.length = s3 + (r_bar - c.r0);
  std::array<double, 6> s_at = {s3, s2, s1 + W, s1, s_c, 0.0};
  for (int i = 0; i < 6; ++i) c.pts[i] = {c.gamma_t->value(s_at[i]), c.gamma_r->value(s_at[i])};
  c.pts[5] = {t_bar, 0.0};
  c.rects[4] = {0.0, s_c, Shape::Concave};
  c.rects[3] = {s_c, s1, Shape::Straight};
  c.rects[2] = {s1, s1 + W, Shape::Convex};
  c.rects[1] = {s1 + W, s2, Shape::Straight};
  c.rects[0] = {s2, s3, Shape::Convex};
  return c;
}

// Graph t = T(r) over [0, r_bar]; T must vanish identically on [r0, r_bar].
// A decreasing T that is flat past r0 is concave up to its inflection r_i and
// convex after it, so Rec4 covers [0, r_i] and Rec0 covers [r_i, r0].
inline AdmissibleCurve graph_curve(NodePtr T, double r0, double r_bar, int samples = 1024) {
  AdmissibleCurve c;
  c.kind = AdmissibleCurve::Kind::Graph;
  c.graph = T;
  NodePtr dT = deriv(T, 1);
  NodePtr speed = sqrt(sum({constant(1.0), product(dT, dT)}));
  NodePtr s_of_r = integral(speed, 0.0, 0.0, r_bar, 256);
  double len = s_of_r->value(r_bar);
  c.gamma_r = extend(inverse(s_of_r, 0.0, r_bar), 0.0, len);
  c.gamma_t = compose(T, c.gamma_r);
  c.length = len;
  c.s_top = s_of_r->value(r0);
  c.t_bar = T->value(0.0);
  c.r_bar = r_bar;
  c.r0 = r0;
  auto convex_at = [&](double r) { return T->eval(r, 3).c[2] > 0.0; };
  double r_i = r0;
  for (int i = 1; i <= samples; ++i) {
    double r = r0 * i / samples;
    if (convex_at(r)) {
      double lo = r0 * (i - 1) / samples, hi = r;
      for (int it = 0; it < 60 && hi - lo > 1e-15 * r0; ++it) {
        double m = 0.5 * (lo + hi);
        (convex_at(m) ? hi : lo) = m;
      }
      r_i = lo;
      break;
    }
  }
  double t_i = T->value(r_i), s_i = s_of_r->value(r_i);
  c.pts[0] = {0.0, r0};
  for (int i = 1; i < 5; ++i) c.pts[i] = {t_i, r_i};
  c.pts[5] = {c.t_bar, 0.0};
  for (auto& r : c.rects) r = {s_i, s_i, Shape::Straight};
  c.rects[4] = {0.0, s_i, Shape::Concave};
  c.rects[0] = {s_i, c.s_top, Shape::Convex};
  return c;
}

// Unit-speed curve given by gamma_r alone, gamma_t = t_bar - integral sqrt(1 - gamma_r'^2).
inline AdmissibleCurve profile_curve(NodePtr gamma_r, double length, double r0, double r_bar) {
  AdmissibleCurve c;
  c.kind = AdmissibleCurve::Kind::Profile;
  c.gamma_r = gamma_r;
  NodePtr run = integral(unit_speed_integrand(gamma_r), 0.0, 0.0, length, 512);
  c.t_bar = run->value(length);
  c.gamma_t = sum({constant(c.t_bar), scale(-1.0, run)});
  c.length = length;
  c.s_top = length;
  c.r0 = r0;
  c.r_bar = r_bar;
  for (int i = 0; i < 5; ++i) c.pts[i] = {0.0, gamma_r->value(length)};
  c.pts[5] = {c.t_bar, 0.0};
  for (auto& r : c.rects) r = {length, length, Shape::Straight};
  c.rects[4] = {0.0, length, Shape::Concave};
  return c;
}

inline AdmissibleCurve parametric_curve(NodePtr gamma_t, NodePtr gamma_r, double s_end, double r0, double r_bar) {
  AdmissibleCurve c;
  c.kind = AdmissibleCurve::Kind::Parametric;
  c.gamma_t = gamma_t;
  c.gamma_r = gamma_r;
  c.length = s_end;
  c.s_top = s_end;
  c.t_bar = gamma_t->value(0.0);
  c.r0 = r0;
  c.r_bar = r_bar;
  c.unit_speed = false;
  c.pts[5] = {c.t_bar, 0.0};
  for (auto& r : c.rects) r = {s_end, s_end, Shape::Straight};
  c.rects[4] = {0.0, s_end, Shape::Concave};
  return c;
}

inline json AdmissibleCurve::to_json() const {
  switch (kind) {
    case Kind::Vertical: return {{"kind", "vertical"}, {"height", r_bar}};
    case Kind::GL:
      return {{"kind", "gl"}, {"delta", delta}, {"r0", r0}, {"r_bar", r_bar},
              {"bend", {{"neck_length", bend.neck_length}, {"v1", bend.v1}, {"width_frac", bend.width_frac}}}};
    case Kind::Graph: return {{"kind", "graph"}, {"T", graph->to_json()}, {"r0", r0}, {"r_bar", r_bar}};
    case Kind::Profile:
      return {{"kind", "profile"}, {"gamma_r", gamma_r->to_json()}, {"length", length}, {"r0", r0}, {"r_bar", r_bar}};
    case Kind::Parametric:
      return {{"kind", "parametric"}, {"gamma_t", gamma_t->to_json()}, {"gamma_r", gamma_r->to_json()},
              {"length", length}, {"r0", r0}, {"r_bar", r_bar}};
  }
  return {};
}

inline AdmissibleCurve AdmissibleCurve::from_json(const json& j) {
  std::string k = j.at("kind").get<std::string>();
  if (k == "vertical") return vertical_line(j.at("height").get<double>());
  if (k == "gl") {
    BendProfile b;
    if (j.contains("bend")) {
      const auto& jb = j.at("bend");
      b.neck_length = jb.value("neck_length", b.neck_length);
      b.v1 = jb.value("v1", b.v1);
      b.width_frac = jb.value("width_frac", b.width_frac);
    }
    return gl_curve(j.at("delta").get<double>(), j.at("r0").get<double>(), j.at("r_bar").get<double>(), b);
  }
  if (k == "graph")
    return graph_curve(node_from_json(j.at("T")), j.at("r0").get<double>(), j.at("r_bar").get<double>());
  if (k == "profile")
    return profile_curve(node_from_json(j.at("gamma_r")), j.at("length").get<double>(), j.at("r0").get<double>(),
                         j.at("r_bar").get<double>());
  if (k == "parametric")
    return parametric_curve(node_from_json(j.at("gamma_t")), node_from_json(j.at("gamma_r")),
                            j.at("length").get<double>(), j.at("r0").get<double>(), j.at("r_bar").get<double>());
  fail(ErrorKind::Spec, "unknown curve kind '" + k + "'");
}

inline MembershipReport validate_admissible(const AdmissibleCurve& c, int samples = 2048) {
  MembershipReport rep;
  const double tol = 1e-8;
  Jet t0 = c.gamma_t->eval(0.0, 2), r0j = c.gamma_r->eval(0.0, 2);
  bool start = std::abs(r0j.c[0]) <= tol && std::abs(t0.c[0] - c.t_bar) <= tol;
  rep.add("i_start_on_axis", start, r0j.c[0]);
  double speed0 = std::hypot(t0.c[1], r0j.c[1]);
  double angle_res = speed0 > 0.0 ? std::abs(t0.c[1]) / speed0 : 1.0;
  rep.add("i_right_angle", angle_res <= 1e-6, angle_res);

  double min_speed = INFINITY, max_unit_res = 0.0;
  double end = c.s_top + (c.r_bar - c.r0);
  if (c.kind == AdmissibleCurve::Kind::Parametric) end = c.length;
  for (int i = 0; i <= samples; ++i) {
    double s = end * i / samples;
    Jet tj = c.gamma_t->eval(s, 2), rj = c.gamma_r->eval(s, 2);
    double sp = std::hypot(tj.c[1], rj.c[1]);
    min_speed = std::min(min_speed, sp);
    max_unit_res = std::max(max_unit_res, std::abs(sp * sp - 1.0));
  }
  rep.add("ii_regular", min_speed >= 1e-8, min_speed);
  if (c.unit_speed) rep.add("unit_speed", max_unit_res <= tol, max_unit_res);

  if (c.kind != AdmissibleCurve::Kind::Parametric) {
    double worst = 0.0;
    for (int i = 0; i <= samples; ++i) {
      double s = c.s_top + (end - c.s_top) * i / samples;
      Jet tj = c.gamma_t->eval(s, 2);
      worst = std::max({worst, std::abs(tj.c[1]), std::abs(tj.c[0] - c.pts[0].t)});
    }
    rep.add("iii_vertical_above_r0", worst <= tol, worst);
  }

  bool ordered = std::abs(c.pts[0].t) <= tol && std::abs(c.pts[5].r) <= tol && c.pts[0].r < c.r_bar + tol;
  for (int i = 0; i < 5; ++i) ordered = ordered && c.pts[i].t <= c.pts[i + 1].t + tol && c.pts[i + 1].r <= c.pts[i].r + tol;
  rep.add("iv_breakpoint_order", ordered, 0.0);

  // Rectangle containment and second-derivative signs.
  double contain = 0.0, sign = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Rectangle& R = c.rects[k];
    if (!(R.s_hi > R.s_lo)) continue;
    double tlo = c.pts[k].t, thi = c.pts[k + 1].t, rlo = c.pts[k + 1].r, rhi = c.pts[k].r;
    if (c.kind == AdmissibleCurve::Kind::Profile || c.kind == AdmissibleCurve::Kind::Parametric) {
      tlo = 0.0, thi = c.t_bar, rlo = 0.0, rhi = c.r0;
    }
    int m = samples / 4;
    for (int i = 0; i <= m; ++i) {
      double s = R.s_lo + (R.s_hi - R.s_lo) * i / m;
      double t = c.gamma_t->value(s);
      Jet rj = c.gamma_r->eval(s, 3);
      double out = std::max({tlo - t, t - thi, rlo - rj.c[0], rj.c[0] - rhi, 0.0});
      contain = std::max(contain, out);
      if (c.kind == AdmissibleCurve::Kind::Parametric) continue;
      double acc = 2.0 * rj.c[2];
      double v = R.shape == Shape::Concave ? acc : (R.shape == Shape::Convex ? -acc : std::abs(acc));
      sign = std::max(sign, v);
    }
  }
  rep.add("iv_rectangles", contain <= 1e-7, contain);
  rep.add("v_vii_shape", sign <= 1e-10, sign);
  if (c.kind == AdmissibleCurve::Kind::Graph) {
    double worst = 0.0;
    for (int i = 0; i <= samples; ++i) {
      double r = c.r_bar * i / samples;
      Jet tj = c.graph->eval(r, 2);
      if (r <= c.r0) worst = std::max(worst, tj.c[1]);
      else worst = std::max({worst, std::abs(tj.c[0]), std::abs(tj.c[1])});
    }
    rep.add("graph_shape", worst <= 1e-10, worst);
  }
  return rep;
}

struct UnitSpeedPair {
  NodePtr gamma_t, gamma_r;
  double length = 0.0;
  double unit_speed_residual = 0.0;
};

inline UnitSpeedPair arc_length_param(const AdmissibleCurve& c, int samples = 2048) {
  if (!c.unit_speed) fail(ErrorKind::Precondition, "parametric curves carry no unit-speed form");
  UnitSpeedPair p{c.gamma_t, c.gamma_r, c.length, 0.0};
  for (int i = 0; i <= samples; ++i) {
    double s = c.length * i / samples;
    double a = c.gamma_t->eval(s, 2).c[1], b = c.gamma_r->eval(s, 2).c[1];
    p.unit_speed_residual = std::max(p.unit_speed_residual, std::abs(a * a + b * b - 1.0));
  }
  return p;
}

// s_gamma: l r on [0, r_bar - r0], l - r_bar + r on [r_bar - r0/2, r_bar], smoothstep blend between.
inline WarpFunction s_gamma(double l, double r_bar, double r0, int samples = 4096) {
  if (l < r_bar) fail(ErrorKind::Infeasible, "curve length below r_bar");
  NodePtr lin = linear(l, 0.0);
  NodePtr sh = linear(1.0, l - r_bar);
  WarpFunction s(glue(lin, sh, r_bar - r0, r0 / 2), r_bar);
  for (int i = 0; i <= samples; ++i)
    if (!(s.jet(r_bar * i / samples, 2).c[1] >= 1e-8))
      fail(ErrorKind::Infeasible, "reparameterization is not monotone");
  return s;
}
inline WarpFunction s_gamma(const AdmissibleCurve& c, double r_bar, double r0) { return s_gamma(c.length, r_bar, r0); }

inline AdmissibleCurve homotopy_to_vertical(const AdmissibleCurve& c, double s) {
  if (s <= 0.0) return c;
  switch (c.kind) {
    case AdmissibleCurve::Kind::Vertical: return c;
    case AdmissibleCurve::Kind::Graph:
      if (s >= 1.0) return vertical_line(c.r_bar);
      return graph_curve(scale(1.0 - s, c.graph), c.r0, c.r_bar);
    case AdmissibleCurve::Kind::GL: {
      if (s >= 1.0) return vertical_line(c.r_bar);
      // neck_length is relative to delta, so the neck shrinks with the cap
      return gl_curve(c.delta * (1.0 - s), c.r0, c.r_bar, c.bend);
    }
    default: fail(ErrorKind::Precondition, "homotopy defined for vertical, graph and GL curves");
  }
}

inline WarpFunction compose_warp(const WarpFunction& omega, const AdmissibleCurve& c) {
  double b = omega.domain_end();
  if (c.kind == AdmissibleCurve::Kind::Vertical) return omega;
  if (c.kind == AdmissibleCurve::Kind::Parametric) fail(ErrorKind::Precondition, "curve is not unit speed");
  if (!(c.r0 <= b)) fail(ErrorKind::Range, "curve rises above the domain of omega before turning vertical");
  double l = c.s_top + (b - c.r0);
  return WarpFunction(compose(omega.tree(), c.gamma_r), l);
}

struct CurveSamples {
  std::vector<double> s, t, r;
};
inline CurveSamples sample_curve(const AdmissibleCurve& c, int count = 512) {
  CurveSamples out;
  double end = c.kind == AdmissibleCurve::Kind::Parametric ? c.length : c.s_top + (c.r_bar - c.r0);
  for (int i = 0; i < count; ++i) {
    double s = end * i / double(count - 1);
    out.s.push_back(s);
    out.t.push_back(c.gamma_t->value(s));
    out.r.push_back(c.gamma_r->value(s));
  }
  return out;
}

}  // namespace psc
