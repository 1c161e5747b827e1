// Bent cylinders, the transition family w_theta, boot metrics and step metrics.
//
// Every metric here has the form
//   g = g_2(x, y) + B(x, y)^2 ds^2_{n-2}
// over a two-dimensional base with coordinates (x, y), x the radial coordinate
// of the torpedo disk (x = 0 is its tip) and y the cylinder direction.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "psc/arc.hpp"
#include "psc/certificate.hpp"
#include "psc/curvature.hpp"
#include "psc/oracle.hpp"
#include "psc/quadrature.hpp"
#include "psc/torpedo.hpp"
#include "psc/warp.hpp"

namespace psc {

inline constexpr double kBendTheta0 = 0.1 * M_PI / 2;

namespace detail {

// Smallest passing value above lo: lo (1 + 1e-6) first, then lo + step with the
// step doubling, then bisection between the last failure and the first pass.
template <class Pred>
double search_min(double lo, double first_step, const Pred& ok, int max_doublings, int bisections,
                  int* evaluations, const std::string& what) {
  int evals = 0;
  auto test = [&](double v) {
    ++evals;
    return ok(v);
  };
  double fail_at = lo * (1.0 + 1e-6);
  double pass_at = fail_at;
  bool found = test(fail_at);
  for (int d = 0; !found && d <= max_doublings; ++d) {
    double v = lo + first_step * std::ldexp(1.0, d);
    if (test(v)) {
      pass_at = v;
      found = true;
    } else {
      fail_at = v;
    }
  }
  if (!found) fail(ErrorKind::NoCertificate, what + ": search exhausted");
  if (pass_at != fail_at)
    for (int i = 0; i < bisections; ++i) {
      double mid = 0.5 * (fail_at + pass_at);
      (test(mid) ? pass_at : fail_at) = mid;
    }
  if (evaluations) *evaluations = evals;
  return pass_at;
}

}  // namespace detail

// Scalar curvature of dx^2 + A^2 dy^2 + B^2 ds^2_m from first and second
// partials of A and B.
struct SurfaceJet {
  double A = 1, Ax = 0, Axx = 0, Ay = 0;
  double B = 1, Bx = 0, Bxx = 0, By = 0, Byy = 0;
};

inline double surface_warped_R(const SurfaceJet& s, int m) {
  if (!(s.A > 0.0) || !(s.B > 0.0)) fail(ErrorKind::DegenerateMetric, "scale not positive");
  double grad2 = s.Bx * s.Bx + s.By * s.By / (s.A * s.A);
  double lap = s.Bxx + s.Ax * s.Bx / s.A + s.Byy / (s.A * s.A) - s.Ay * s.By / (s.A * s.A * s.A);
  return -2.0 * s.Axx / s.A + m * (m - 1.0) * (1.0 - grad2) / (s.B * s.B) - 2.0 * m * lap / s.B;
}

// ---- bent cylinder ----

inline RotSymMetric bent_cylinder_metric(const WarpFunction& beta, double c, int n) {
  BentCylinder bc;
  try {
    bc = make_bent_cylinder(beta, c, n);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotUnitSpeedCompatible) fail(ErrorKind::InvalidBend, e.what());
    throw;
  }
  double b = beta.domain_end(), worst = 0.0;
  for (int i = 0; i <= 512; ++i) {
    double r = b * i / 512.0;
    double ad = bc.alpha->eval(r, 2).c[1], bd = beta.jet(r, 2).c[1];
    worst = std::max(worst, std::abs(ad * ad + bd * bd - 1.0));
  }
  if (worst > 1e-9) fail(ErrorKind::InvalidBend, "companion is not unit speed");
  return RotSymMetric::doubly(beta, bc.psi, n);
}

struct BendRadius {
  double c_star = 0.0;
  double delta = 0.0;             // max beta
  double embedding_bound = 0.0;   // 2 delta
  double crude_bound = 0.0;       // 2 delta / (n - 1): drops delta cos from the denominator
  double round_bound = 0.0;       // delta + 2 delta / (n - 1): exact threshold for the round profile
  int evaluations = 0;
  PositivityCertificate certificate;

  json to_json() const {
    return {{"c_star", c_star}, {"delta", delta}, {"embedding_bound", embedding_bound},
            {"crude_bound", crude_bound}, {"round_bound", round_bound}, {"evaluations", evaluations},
            {"certificate", certificate.to_json()}};
  }
};

inline BendRadius min_bend_radius(const WarpFunction& beta, int n, const Tolerances& tol = default_tolerances()) {
  if (n < 3) fail(ErrorKind::Precondition, "bend radius search needs n >= 3");
  Jet j0 = beta.jet(0.0, 2);
  if (std::abs(j0.c[0]) > tol.equality || std::abs(j0.c[1] - 1.0) > 1e-6)
    fail(ErrorKind::Precondition, "beta must close up at 0 with unit slope");
  try {
    require_unit_speed_compatible(beta);
  } catch (const Error& e) {
    fail(ErrorKind::InvalidBend, e.what());
  }
  BendRadius out;
  out.delta = max_value(beta);
  out.embedding_bound = 2.0 * out.delta;
  out.crude_bound = 2.0 * out.delta / (n - 1.0);
  out.round_bound = out.delta + out.crude_bound;
  GridAxis axis = default_r_axis(beta, tol);
  auto ok = [&](double c) { return certify_positive(bent_cylinder_metric(beta, c, n), axis, tol.floor).passed; };
  out.c_star = detail::search_min(out.embedding_bound, 1e-3 * out.embedding_bound, ok, 40, 20, &out.evaluations,
                                  "bend radius");
  out.certificate = certify_positive(bent_cylinder_metric(beta, out.c_star, n), axis, tol.floor);
  return out;
}

// ---- transition family ----

// w_theta(r, t) = 1 + sigma(theta) chi_theta(t) (c + alpha(r) - 1) on [0, r_end] x [-L, L + theta].
// chi = 1 on [-0.05 L, theta + 0.05 L] and vanishes within 0.05 L of either end;
// sigma = S(theta / theta0) is 1 once theta >= theta0.
struct TransitionProfile {
  double theta = 0.0, L = 1.0, c = 2.0, theta0 = kBendTheta0;
  double r_end = 1.0;
  NodePtr alpha;

  double t_lo() const { return -L; }
  double t_hi() const { return L + theta; }
  double sigma() const { return smoothstep(theta / theta0); }

  Jet chi(double t, int n) const {
    Jet x = Jet::variable(t, n);
    Jet up = smoothstep((1.0 / (0.9 * L)) * (0.95 * L + x));
    Jet down = smoothstep((1.0 / (0.9 * L)) * ((-theta - 0.05 * L) + x));
    return up * (1.0 + (-down));
  }
  double weight(double t) const { return sigma() * chi(t, 1).c[0]; }

  WValue at(double r, double t) const {
    Jet a = alpha->eval(r, 3);
    double s = weight(t);
    return {1.0 + s * (c + a.c[0] - 1.0), s * a.c[1], 2.0 * s * a.c[2]};
  }
  double w_t(double r, double t) const { return sigma() * chi(t, 2).c[1] * (c + alpha->value(r) - 1.0); }

  WProfile profile() const {
    return [p = *this](double r, double t) { return p.at(r, t); };
  }

  // integral_{-L}^{t} (w(r, .) - 1).
  double excess(double r, double t) const {
    double k = sigma() * (c + alpha->value(r) - 1.0);
    if (k == 0.0) return 0.0;
    double hi = std::clamp(t, t_lo(), t_hi());
    return k * quad::adaptive_simpson([&](double s) { return chi(s, 1).c[0]; }, t_lo(), hi, 1e-13);
  }

  json to_json() const {
    return {{"theta", theta}, {"L", L}, {"c", c}, {"theta0", theta0}, {"r_end", r_end},
            {"alpha", alpha->to_json()}};
  }
};

struct ConcavityReport {
  double max_abs_wr = 0.0;
  double max_wrr = -std::numeric_limits<double>::infinity();
  double min_w = std::numeric_limits<double>::infinity();
  bool holds = false;
  json to_json() const {
    return {{"max_abs_wr", max_abs_wr}, {"max_wrr", max_wrr}, {"min_w", min_w}, {"holds", holds}};
  }
};

// |w_r| <= 1 and w_rr <= 0 on a grid; both are linear in the weight, so the
// weight-one slice decides them.
inline ConcavityReport concavity_report(const TransitionProfile& p, int samples = 512) {
  ConcavityReport rep;
  double s = p.sigma();
  for (int i = 0; i <= samples; ++i) {
    double r = p.r_end * i / samples;
    Jet a = p.alpha->eval(r, 3);
    rep.min_w = std::min(rep.min_w, p.c + a.c[0]);
    rep.max_abs_wr = std::max(rep.max_abs_wr, s * std::abs(a.c[1]));
    rep.max_wrr = std::max(rep.max_wrr, s * 2.0 * a.c[2]);
  }
  rep.holds = rep.max_abs_wr <= 1.0 + 1e-9 && rep.max_wrr <= 1e-9;
  return rep;
}

inline TransitionProfile transition_profile(double theta, double L, double c, NodePtr alpha, double r_end,
                                            bool require_concave = true, double theta0 = kBendTheta0) {
  if (!(theta >= 0.0 && theta <= M_PI / 2 + 1e-12)) fail(ErrorKind::Range, "theta outside [0, pi/2]");
  if (!(L > 0.0)) fail(ErrorKind::Precondition, "L must be positive");
  if (!(theta0 > 0.0 && theta0 < M_PI / 2)) fail(ErrorKind::Precondition, "theta0 outside (0, pi/2)");
  if (!alpha) fail(ErrorKind::Construction, "missing alpha");
  TransitionProfile p;
  p.theta = theta;
  p.L = L;
  p.c = c;
  p.theta0 = theta0;
  p.r_end = r_end;
  p.alpha = std::move(alpha);
  ConcavityReport rep = concavity_report(p);
  if (rep.min_w < 1.0 - 1e-12) fail(ErrorKind::Precondition, "c + alpha drops below 1");
  if (require_concave && !rep.holds) fail(ErrorKind::Construction, "w_theta violates |w_r| <= 1, w_rr <= 0");
  return p;
}

// ---- bend family ----

struct BendFamily {
  WarpFunction beta;
  NodePtr alpha;
  int n = 4;  // total dimension; the sphere factor is S^{n-2}
  double c = 2.0;
  double L = 1.0;
  bool require_concave = true;
  std::string kind;

  TransitionProfile profile(double theta) const {
    return transition_profile(theta, L, c, alpha, beta.domain_end(), require_concave);
  }
  json to_json() const {
    return {{"kind", kind}, {"n", n}, {"c", c}, {"L", L}, {"require_concave", require_concave},
            {"beta", beta.to_json()}, {"alpha", alpha->to_json()}};
  }
};

// beta = delta sin(r / delta), alpha = delta cos(r / delta): the tip at r = 0 faces
// away from the bending axis and the one at r = pi delta faces it, so w_rr > 0 on
// the far half.
inline BendFamily round_bend_family(double delta, int n, double c, double L = 1.0) {
  BendFamily f;
  f.kind = "round";
  f.beta = WarpFunction(sincap(delta), M_PI * delta);
  f.alpha = affine(1.0, delta * M_PI / 2, sincap(delta));
  f.n = n;
  f.c = c;
  f.L = L;
  f.require_concave = false;
  return f;
}

// Torpedo with its tip facing the bending axis: w = c + integral_0^r sqrt(1 - eta'^2),
// the half of a bent double torpedo that closes up on the inner side.
// Its w_rr = -eta' eta'' / sqrt(1 - eta'^2) is >= 0, so concavity is not required.
inline BendFamily torpedo_bend_family(const WarpFunction& eta, int n, double c, double L = 1.0) {
  BendFamily f;
  f.kind = "torpedo_tip_inner";
  f.beta = eta;
  f.alpha = scale(-1.0, alpha_node(eta, 0.0));
  f.n = n;
  f.c = c;
  f.L = L;
  f.require_concave = false;
  return f;
}

struct BendGrid {
  int theta = 9;
  int t = 33;
  int r = 129;
};

inline GridAxis bend_r_axis(const WarpFunction& beta, int count) {
  GridAxis a = default_r_axis(beta);
  a.count = count;
  return a;
}

struct BendSlice {
  double theta = 0.0;
  TransitionProfile w;
  PositivityCertificate geometric;  // cross term 2(n-2)
  PositivityCertificate displayed;  // cross term 2n
  json to_json() const {
    return {{"theta", theta}, {"w", w.to_json()}, {"geometric", geometric.to_json()},
            {"displayed", displayed.to_json()}};
  }
};

// Certificate of g_theta^c over the (t, r) grid.
inline BendSlice bend_isotopy(const BendFamily& f, double theta, const BendGrid& grid = {},
                              double floor = default_tolerances().floor) {
  if (f.n < 4) fail(ErrorKind::Precondition, "bend family needs n >= 4");
  BendSlice s;
  s.theta = theta;
  s.w = f.profile(theta);
  std::vector<GridAxis> axes = {{"t", s.w.t_lo(), s.w.t_hi(), grid.t}, bend_r_axis(f.beta, grid.r)};
  auto eval = [&](bool geometric) {
    return certify_grid(axes, [&](const std::vector<double>& p) {
      Jet bj = f.beta.jet(p[1], 3);
      WValue w = s.w.at(p[1], p[0]);
      return geometric ? bend_family_R(bj, w, f.n) : bend_family_R_displayed(bj, w, f.n);
    }, floor);
  };
  s.geometric = eval(true);
  s.displayed = eval(false);
  return s;
}

inline BendSlice bend_isotopy(const WarpFunction& eta, int n, double c, double theta, const BendGrid& grid = {}) {
  return bend_isotopy(torpedo_bend_family(eta, n, c), theta, grid);
}

struct BendFamilyCertificate {
  PositivityCertificate geometric;
  PositivityCertificate displayed;
  json to_json() const { return {{"geometric", geometric.to_json()}, {"displayed", displayed.to_json()}}; }
};

// Over (theta, tau, r) with t = -L + tau (2L + theta).
inline BendFamilyCertificate bend_family_certificate(const BendFamily& f, const BendGrid& grid = {},
                                                     double floor = default_tolerances().floor) {
  if (f.n < 4) fail(ErrorKind::Precondition, "bend family needs n >= 4");
  std::vector<TransitionProfile> slices;
  GridAxis th{"theta", 0.0, M_PI / 2, grid.theta};
  for (int i = 0; i < th.count; ++i) slices.push_back(f.profile(th.at(i)));
  GridAxis tau{"tau", 0.0, 1.0, grid.t};
  GridAxis r = bend_r_axis(f.beta, grid.r);
  auto eval = [&](bool geometric) {
    return certify_grid({th, tau, r}, [&](const std::vector<double>& p) {
      int i = static_cast<int>(std::lround((p[0] - th.lo) / (th.hi - th.lo) * (th.count - 1)));
      const TransitionProfile& w = slices[std::clamp(i, 0, th.count - 1)];
      double t = w.t_lo() + p[1] * (w.t_hi() - w.t_lo());
      Jet bj = f.beta.jet(p[2], 3);
      WValue wv = w.at(p[2], t);
      return geometric ? bend_family_R(bj, wv, f.n) : bend_family_R_displayed(bj, wv, f.n);
    }, floor);
  };
  return {eval(true), eval(false)};
}

// Smallest c > 2 max beta whose family certificate passes.
inline double min_bend_family_radius(const BendFamily& f, const BendGrid& grid = {}, int* evaluations = nullptr) {
  double lo = 2.0 * max_value(f.beta);
  auto ok = [&](double c) {
    BendFamily g = f;
    g.c = c;
    try {
      return bend_family_certificate(g, grid).geometric.passed;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Precondition) return false;  // c + alpha < 1
      throw;
    }
  };
  return detail::search_min(lo, 1e-3 * lo, ok, 40, 20, evaluations, "bend family radius");
}

// Closed form against the finite-difference chart at the given (r, t) points.
inline oracle::CrossCheckReport bend_oracle_check(const BendFamily& f, double theta,
                                                  const std::vector<std::pair<double, double>>& rt,
                                                  double h = 1e-3, double tol = 1e-3) {
  TransitionProfile w = f.profile(theta);
  double b = f.beta.domain_end();
  auto chart = oracle::bend_family_chart([&](double r) { return f.beta.jet(r, 1).c[0]; },
                                         [w](double r, double t) { return w.at(r, t).w; }, f.n, {0.0, b},
                                         {w.t_lo(), w.t_hi()});
  std::vector<oracle::Vec> pts;
  for (auto [r, t] : rt) pts.push_back(oracle::with_equator({r, t}, f.n - 2));
  auto closed = [&](const oracle::Vec& x) { return bend_family_R(f.beta.jet(x[0], 3), w.at(x[0], x[1]), f.n); };
  oracle::Vec steps(f.n, h);
  for (int a = 2; a < f.n; ++a) steps[a] = 1e-3;
  return oracle::cross_check(closed, chart, pts, steps, tol);
}

// ---- toe ----

// The torpedo-disk cylinder capped by half of the n-dimensional torpedo, realised
// as the hypersurface of revolution
//   { (y', y, z) : |y'|^2 + h(y)^2 = eta(rho)^2, z = alpha(rho) },
// with h = 0 on the straight part and h(y) = y - const past the join.
struct Toe {
  WarpFunction eta;
  NodePtr alpha;  // unit-speed companion of eta
  NodePtr h;
  int n = 5;
  double y0 = 0.0;    // start of the straight part
  double y_c = 0.0;   // start of the join
  double width = 0.0; // join width
  double y_end = 0.0; // h(y_end) = max eta

  struct Local {
    double rho_s = 0.0;  // |y'|
    double E = 1, F = 0, G = 1;
    double R = 0.0;
  };

  // Coefficients and Gauss-equation curvature; rho_s <= 0 outside the image.
  Local local(double rho, double y, bool with_R = true) const {
    Local out;
    Jet e = eta.jet(rho, 3), a = alpha->eval(rho, 3), hj = h->eval(y, 3);
    double eta0 = e.c[0], eta1 = e.c[1], eta2 = 2.0 * e.c[2];
    double h0 = hj.c[0], h1 = hj.c[1], h2 = 2.0 * hj.c[2];
    double a1 = a.c[1], a2 = 2.0 * a.c[2];
    double s2 = eta0 * eta0 - h0 * h0;
    if (!(s2 > 0.0)) {
      out.rho_s = 0.0;
      return out;
    }
    double s = std::sqrt(s2);
    double sr = eta0 * eta1 / s, sy = -h0 * h1 / s;
    double srr = (eta1 * eta1 + eta0 * eta2 - sr * sr) / s;
    double syy = (-(h1 * h1 + h0 * h2) - sy * sy) / s;
    double sry = -sr * sy / s;
    out.rho_s = s;
    out.E = sr * sr + a1 * a1;
    out.F = sr * sy;
    out.G = sy * sy + 1.0;
    if (!with_R) return out;
    // X = (s, y, alpha); normal X_rho x X_y.
    double N0 = -a1, N1 = a1 * sy, N2 = sr;
    double nn = std::sqrt(N0 * N0 + N1 * N1 + N2 * N2);
    N0 /= nn;
    N1 /= nn;
    N2 /= nn;
    double ee = srr * N0 + a2 * N2, ff = sry * N0, gg = syy * N0;
    double det = out.E * out.G - out.F * out.F;
    double K = (ee * gg - ff * ff) / det;
    double H = (ee * out.G - 2.0 * ff * out.F + gg * out.E) / det;
    double mu = -N0 / s;
    int m = n - 2;
    out.R = 2.0 * K + 2.0 * m * H * mu + m * (m - 1.0) * mu * mu;
    return out;
  }

  oracle::ChartMetric chart(double rho_lo, double rho_hi) const {
    oracle::ChartMetric m;
    m.dim = n;
    m.components = [t = *this](const oracle::Vec& x, oracle::Mat& g) {
      Local l = t.local(x[0], x[1], false);
      g(0, 0) = l.E;
      g(0, 1) = l.F;
      g(1, 1) = l.G;
      oracle::sphere_block(x, 2, t.n - 2, l.rho_s * l.rho_s, g);
    };
    m.box = {{rho_lo, rho_hi}, {y0, y_end}};
    auto sb = oracle::sphere_box(n - 2);
    m.box.insert(m.box.end(), sb.begin(), sb.end());
    return m;
  }
};

inline Toe make_toe(const WarpFunction& eta, int n, double y0, double straight, double width) {
  Toe t;
  t.eta = eta;
  t.alpha = alpha_node(eta, horizontal_extent(eta));
  t.n = n;
  t.y0 = y0;
  t.y_c = y0 + straight;
  t.width = width;
  t.h = soft_ramp(t.y_c, width);
  t.y_end = t.y_c + 0.5 * width + max_value(eta);
  return t;
}

// ---- boot ----

struct BootSpec {
  double delta = 1.0;
  double l1 = 1.0;   // toe neck length
  double l2 = 1.0;   // length of the straight boundary cylinder B2
  double c = 0.0;    // bend radius; 0 selects 1.1 x the certified minimum
  int n = 5;
  double L = 0.0;          // half-length of the bend collars; 0 selects delta
  double foot = 0.0;       // straight part of the toe; 0 selects delta
  double join_frac = 0.05; // toe join width as a fraction of the shorter adjacent extent
  std::map<std::string, double> region_lengths;  // filled on assembly

  json to_json() const {
    return {{"delta", delta}, {"l1", l1}, {"l2", l2}, {"c", c}, {"n", n}, {"L", L}, {"foot", foot},
            {"join_frac", join_frac}, {"region_lengths", region_lengths}};
  }
  static BootSpec from_json(const json& j) {
    BootSpec s;
    s.delta = j.value("delta", s.delta);
    s.l1 = j.value("l1", s.l1);
    s.l2 = j.value("l2", s.l2);
    s.c = j.value("c", s.c);
    s.n = j.value("n", s.n);
    s.L = j.value("L", s.L);
    s.foot = j.value("foot", s.foot);
    s.join_frac = j.value("join_frac", s.join_frac);
    return s;
  }
};

struct BootGrid {
  int r = 48;
  int y = 32;
  double axis_band = 0.02;  // toe points closer than axis_band * delta to the axis are skipped
};

struct InterfaceReport {
  std::string name;
  double y = 0.0;
  double value_gap = 0.0;  // max over g_xx, g_xy, g_yy, B
  double slope_gap = 0.0;  // same for d/dx and d/dy
  int points = 0;
  json to_json() const {
    return {{"name", name}, {"y", y}, {"value_gap", value_gap}, {"slope_gap", slope_gap}, {"points", points}};
  }
};

struct RegionReport {
  std::string name;
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  PositivityCertificate certificate;
  double closed_form_residual = 0.0;  // against the region's closed form where one exists
  int skipped = 0;
  json to_json() const {
    return {{"name", name}, {"x", {x_lo, x_hi}}, {"y", {y_lo, y_hi}}, {"certificate", certificate.to_json()},
            {"closed_form_residual", closed_form_residual}, {"skipped", skipped}};
  }
};

// Coordinates: y = 0 is the face B3; the leg R3 is [0, y_bend], the bend
// zone [y_bend, y_foot] is split at the neck start into R2 (cap side) and R4
// (neck side), and the toe R1 occupies [y_foot, toe.y_end].
struct BootAssembly {
  BootSpec spec;
  double u = 1.0;
  WarpFunction eta;
  double neck_start = 0.0;
  TransitionProfile w;
  Toe toe;
  double y_bend = 0.0, y_foot = 0.0;
  std::vector<RegionReport> regions;
  std::vector<InterfaceReport> interfaces;
  PositivityCertificate certificate;
  double interface_tol = 1e-6;

  double b() const { return eta.domain_end(); }
  double bend_t(double y) const { return y - y_bend - w.L; }

  // g_xx, g_xy, g_yy, B at (x, y).
  std::array<double, 4> coefficients(double x, double y) const {
    if (y >= y_foot) {
      Toe::Local l = toe.local(x, y, false);
      return {l.E, l.F, l.G, l.rho_s};
    }
    double A = y <= y_bend ? 1.0 : w.at(x, bend_t(y)).w;
    return {1.0, 0.0, A * A, eta.jet(x, 1).c[0]};
  }

  SurfaceJet diagonal_jet(double x, double y) const {
    SurfaceJet s;
    Jet e = eta.jet(x, 3);
    s.B = e.c[0];
    s.Bx = e.c[1];
    s.Bxx = 2.0 * e.c[2];
    if (y > y_bend) {
      WValue wv = w.at(x, bend_t(y));
      s.A = wv.w;
      s.Ax = wv.wr;
      s.Axx = wv.wrr;
      s.Ay = w.w_t(x, bend_t(y));
    }
    return s;
  }

  double R(double x, double y) const {
    if (y >= y_foot) return toe.local(x, y).R;
    return surface_warped_R(diagonal_jet(x, y), spec.n - 2);
  }

  // Excess length of the boundary x = b over the straight cylinder, from y = 0.
  double height(double y) const {
    if (y <= y_bend) return 0.0;
    return w.excess(b(), std::min(bend_t(y), w.t_hi()));
  }

  bool passed() const {
    if (!certificate.passed) return false;
    for (const auto& i : interfaces)
      if (i.value_gap > interface_tol || i.slope_gap > interface_tol) return false;
    return true;
  }

  json to_json() const {
    json regs = json::array(), ifs = json::array();
    for (const auto& r : regions) regs.push_back(r.to_json());
    for (const auto& i : interfaces) ifs.push_back(i.to_json());
    return {{"spec", spec.to_json()}, {"u", u}, {"eta", eta.to_json()}, {"neck_start", neck_start},
            {"w", w.to_json()}, {"y_bend", y_bend}, {"y_foot", y_foot}, {"y_end", toe.y_end},
            {"toe_join", {{"start", toe.y_c}, {"width", toe.width}}}, {"regions", regs},
            {"interfaces", ifs}, {"interface_tol", interface_tol}, {"certificate", certificate.to_json()},
            {"passed", passed()}};
  }
};

inline void validate_boot_spec(const BootSpec& s) {
  if (s.n < 4) fail(ErrorKind::Spec, "boot metrics need n >= 4");
  if (!(s.delta > 0.0)) fail(ErrorKind::Spec, "delta must be positive");
  if (!(s.l1 > 0.0) || !(s.l2 > 0.0)) fail(ErrorKind::Spec, "l1 and l2 must be positive");
  if (!(s.c > 2.0 * s.delta)) fail(ErrorKind::Spec, "bend radius must exceed 2 delta");
  if (!(s.join_frac > 0.0 && s.join_frac <= 0.5)) fail(ErrorKind::Spec, "join_frac outside (0, 1/2]");
}

inline WarpFunction boot_torpedo(double delta, double l1) {
  return perfect_torpedo(delta, perfect_neck_start(delta) + l1);
}

// 1.1 x the certified minimum bend radius of the tip-inner torpedo family.
inline double default_bend_radius(const WarpFunction& eta, int n, double L, const BendGrid& grid = {}) {
  return 1.1 * min_bend_family_radius(torpedo_bend_family(eta, n, 0.0, L), grid);
}

namespace detail {

// One-sided second-order difference into the region on the side `dir`.
template <class F>
double one_sided(const F& f, double y, double h, int dir) {
  return dir * (-3.0 * f(y) + 4.0 * f(y + dir * h) - f(y + 2.0 * dir * h)) / (2.0 * h);
}

inline RegionReport certify_region(const BootAssembly& a, const std::string& name, double x_lo, double x_hi,
                                   double y_lo, double y_hi, const BootGrid& g,
                                   const std::function<double(double, double)>& closed) {
  RegionReport rep;
  rep.name = name;
  rep.x_lo = x_lo;
  rep.x_hi = x_hi;
  rep.y_lo = y_lo;
  rep.y_hi = y_hi;
  GridAxis ya{"y", y_lo, y_hi, g.y}, xa{"x", x_lo, x_hi, g.r};
  bool toe = name == "R1";
  double band = g.axis_band * a.spec.delta;
  auto skip = [&](double x, double y) { return toe && a.toe.local(x, y, false).rho_s < band; };
  rep.certificate = certify_grid({ya, xa}, [&](const std::vector<double>& p) {
    if (skip(p[1], p[0])) return std::numeric_limits<double>::infinity();
    return a.R(p[1], p[0]);
  }, default_tolerances().floor);
  for (int i = 0; i < ya.count; ++i)
    for (int k = 0; k < xa.count; ++k) {
      double y = ya.at(i), x = xa.at(k);
      if (skip(x, y)) {
        ++rep.skipped;
        continue;
      }
      if (closed) {
        double v = closed(x, y);
        if (std::isfinite(v)) rep.closed_form_residual = std::max(rep.closed_form_residual, std::abs(a.R(x, y) - v));
      }
    }
  return rep;
}

inline InterfaceReport interface_report(const BootAssembly& a, const std::string& name, double y, double x_lo,
                                        double x_hi, int count, const std::function<std::array<double, 4>(double, double)>& left,
                                        const std::function<std::array<double, 4>(double, double)>& right) {
  InterfaceReport rep;
  rep.name = name;
  rep.y = y;
  const double h = 1e-5 * std::max(1.0, a.spec.delta);
  for (int i = 0; i < count; ++i) {
    double x = x_lo + (x_hi - x_lo) * i / (count - 1.0);
    auto L0 = left(x, y), R0 = right(x, y);
    for (int c = 0; c < 4; ++c) {
      rep.value_gap = std::max(rep.value_gap, std::abs(L0[c] - R0[c]));
      auto fl = [&](double s) { return left(x, s)[c]; };
      auto fr = [&](double s) { return right(x, s)[c]; };
      double dl = one_sided(fl, y, h, -1), dr = one_sided(fr, y, h, +1);
      rep.slope_gap = std::max(rep.slope_gap, std::abs(dl - dr));
      double xl = std::max(x_lo, x - h), xr = std::min(x_hi, x + h);
      if (xr > xl) {
        double gl = (left(xr, y)[c] - left(xl, y)[c]) / (xr - xl);
        double gr = (right(xr, y)[c] - right(xl, y)[c]) / (xr - xl);
        rep.slope_gap = std::max(rep.slope_gap, std::abs(gl - gr));
      }
    }
    ++rep.points;
  }
  return rep;
}

}  // namespace detail

// Boot slice with bend progress u in [0, 1]; the bend zone has length
// 2L + u pi / 2 and the leg absorbs the remainder, so the manifold is fixed.
inline BootAssembly assemble_boot(const BootSpec& spec_in, double u, const BootGrid& grid = {}) {
  validate_boot_spec(spec_in);
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorKind::Range, "u outside [0, 1]");
  BootAssembly a;
  a.spec = spec_in;
  a.u = u;
  BootSpec& s = a.spec;
  if (s.L <= 0.0) s.L = s.delta;
  if (s.foot <= 0.0) s.foot = s.delta;
  a.eta = boot_torpedo(s.delta, s.l1);
  a.neck_start = perfect_neck_start(s.delta);
  double theta = u * M_PI / 2;
  BendFamily fam = torpedo_bend_family(a.eta, s.n, s.c, s.L);
  a.w = fam.profile(theta);

  // B2 is the boundary x = b over the leg and the first straight collar of the
  // bend zone, where w = 1: length l3 + 0.05 L at u = 1.
  double l3 = s.l2 - 0.05 * s.L;
  if (!(l3 > 0.0)) fail(ErrorKind::Infeasible, "l2 shorter than the bend collar");
  a.y_bend = l3 + (M_PI / 2 - theta);
  a.y_foot = a.y_bend + 2.0 * s.L + theta;
  double width = s.join_frac * std::min(s.foot, s.delta);
  a.toe = make_toe(a.eta, s.n, a.y_foot, s.foot, width);
  s.region_lengths = {{"R1", a.toe.y_end - a.y_foot}, {"R2", a.y_foot - a.y_bend}, {"R3", a.y_bend},
                      {"R4", a.y_foot - a.y_bend}, {"B2", l3 + 0.05 * s.L}};

  double b = a.b(), x_lo = 1e-3 * b;
  int m = s.n - 2;
  double neck_R = m * (m - 1.0) / (s.delta * s.delta);
  auto single = [&](double x, double) { return scalar_curvature_single(a.eta, s.n - 1, x); };
  auto bendR = [&](double x, double y) { return bend_family_R(a.eta.jet(x, 3), a.w.at(x, a.bend_t(y)), s.n); };
  auto toeR = [&](double x, double y) {
    if (y <= a.toe.y_c) return scalar_curvature_single(a.eta, s.n - 1, x);
    // Past the join the toe is the n-torpedo; the chart is trusted away from the axis.
    if (y >= a.toe.y_c + a.toe.width && a.toe.local(x, y, false).rho_s >= 0.1 * s.delta)
      return scalar_curvature_single(a.eta, s.n, x);
    return std::numeric_limits<double>::quiet_NaN();
  };
  a.regions.push_back(detail::certify_region(a, "R3", x_lo, b, 0.0, a.y_bend, grid, single));
  a.regions.push_back(detail::certify_region(a, "R2", x_lo, a.neck_start, a.y_bend, a.y_foot, grid, bendR));
  a.regions.push_back(detail::certify_region(a, "R4", a.neck_start, b, a.y_bend, a.y_foot, grid,
                                             [&](double, double) { return neck_R; }));
  a.regions.push_back(detail::certify_region(a, "R1", x_lo, b, a.y_foot, a.toe.y_end, grid, toeR));
  std::vector<PositivityCertificate> parts;
  for (const auto& r : a.regions) parts.push_back(r.certificate);
  a.certificate = merge(parts);

  auto leg = [&](double x, double) -> std::array<double, 4> { return {1.0, 0.0, 1.0, a.eta.jet(x, 1).c[0]}; };
  auto bend = [&](double x, double y) -> std::array<double, 4> {
    double A = a.w.at(x, a.bend_t(y)).w;
    return {1.0, 0.0, A * A, a.eta.jet(x, 1).c[0]};
  };
  auto toe = [&](double x, double y) -> std::array<double, 4> {
    Toe::Local l = a.toe.local(x, y, false);
    return {l.E, l.F, l.G, l.rho_s};
  };
  int cnt = 33;
  a.interfaces.push_back(detail::interface_report(a, "R3|R2", a.y_bend, x_lo, a.neck_start, cnt, leg, bend));
  a.interfaces.push_back(detail::interface_report(a, "R3|R4", a.y_bend, a.neck_start, b, cnt, leg, bend));
  a.interfaces.push_back(detail::interface_report(a, "R2|R1", a.y_foot, x_lo, a.neck_start, cnt, bend, toe));
  a.interfaces.push_back(detail::interface_report(a, "R4|R1", a.y_foot, a.neck_start, b, cnt, bend, toe));
  return a;
}

inline BootAssembly boot_metric(const BootSpec& spec, const BootGrid& grid = {}) {
  BootSpec s = spec;
  if (s.c <= 0.0) {
    if (!(s.delta > 0.0) || !(s.l1 > 0.0)) fail(ErrorKind::Spec, "delta and l1 must be positive");
    s.c = default_bend_radius(boot_torpedo(s.delta, s.l1), s.n, s.L > 0.0 ? s.L : s.delta);
  }
  BootAssembly a = assemble_boot(s, 1.0, grid);
  for (const auto& i : a.interfaces)
    if (i.value_gap > a.interface_tol || i.slope_gap > a.interface_tol)
      fail(ErrorKind::Assembly, "interface " + i.name + " mismatch " + std::to_string(std::max(i.value_gap, i.slope_gap)));
  return a;
}

struct BootIsotopySlice {
  BootAssembly assembly;
  double l2_star = 0.0;
  int l2_evaluations = 0;
  PositivityCertificate cylinder;  // the plain product g_torp^{n-1} + dt^2
  json to_json() const {
    return {{"assembly", assembly.to_json()}, {"l2_star", l2_star}, {"l2_evaluations", l2_evaluations},
            {"cylinder", cylinder.to_json()}};
  }
};

struct BootIsotopyPlan {
  BootSpec spec;  // c and l2 = l2_star filled in
  double l2_star = 0.0;
  int evaluations = 0;
};

// Searches the shortest B2 length for which the u = 1 boot assembles and certifies.
inline BootIsotopyPlan plan_boot_isotopy(double delta, double l1, int n, const BootGrid& grid = {}) {
  if (n < 4) fail(ErrorKind::Precondition, "boot isotopy needs n >= 4");
  BootIsotopyPlan plan;
  BootSpec& s = plan.spec;
  s.delta = delta;
  s.l1 = l1;
  s.n = n;
  s.L = delta;
  s.c = default_bend_radius(boot_torpedo(delta, l1), n, s.L);
  BootGrid coarse = grid;
  coarse.r = std::max(8, grid.r / 2);
  coarse.y = std::max(8, grid.y / 2);
  auto ok = [&](double l2) {
    BootSpec t = s;
    t.l2 = l2;
    try {
      return assemble_boot(t, 1.0, coarse).passed();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Infeasible) return false;
      throw;
    }
  };
  double lo = 1e-3 * delta;
  plan.l2_star = detail::search_min(lo, lo, ok, 40, 20, &plan.evaluations, "boot l2");
  s.l2 = plan.l2_star;
  return plan;
}

inline PositivityCertificate plain_cylinder_certificate(const WarpFunction& eta, int n, const BootGrid& grid = {}) {
  GridAxis x{"x", 1e-3 * eta.domain_end(), eta.domain_end(), grid.r};
  return certify_grid({x}, [&](const std::vector<double>& p) { return scalar_curvature_single(eta, n - 1, p[0]); },
                      default_tolerances().floor);
}

inline BootIsotopySlice boot_isotopy(const BootIsotopyPlan& plan, double u, const BootGrid& grid = {}) {
  BootIsotopySlice out;
  out.assembly = assemble_boot(plan.spec, u, grid);
  out.l2_star = plan.l2_star;
  out.l2_evaluations = plan.evaluations;
  out.cylinder = plain_cylinder_certificate(out.assembly.eta, plan.spec.n, grid);
  return out;
}

inline BootIsotopySlice boot_isotopy(double delta, double l1, int n, double u, const BootGrid& grid = {}) {
  return boot_isotopy(plan_boot_isotopy(delta, l1, n, grid), u, grid);
}

// One row per certified grid point: region, x, y, R.
struct TraceRow {
  std::string region;
  double x, y, R;
};

inline std::vector<TraceRow> boot_curvature_trace(const BootAssembly& a, int nx = 16, int ny = 16,
                                                  double axis_band = BootGrid{}.axis_band) {
  std::vector<TraceRow> rows;
  for (const auto& reg : a.regions)
    for (int i = 0; i < ny; ++i)
      for (int k = 0; k < nx; ++k) {
        double y = reg.y_lo + (reg.y_hi - reg.y_lo) * i / (ny - 1.0);
        double x = reg.x_lo + (reg.x_hi - reg.x_lo) * k / (nx - 1.0);
        if (reg.name == "R1" && a.toe.local(x, y, false).rho_s < axis_band * a.spec.delta) continue;
        rows.push_back({reg.name, x, y, a.R(x, y)});
      }
  return rows;
}

// Gauss-equation toe curvature against the finite-difference chart of the induced metric.
// Truncation error scales with the join curvature, so the step is small.
inline oracle::CrossCheckReport toe_oracle_check(const BootAssembly& a, const std::vector<std::pair<double, double>>& xy,
                                                 double h = 2.5e-4, double tol = 1e-2) {
  auto chart = a.toe.chart(0.0, a.b());
  std::vector<oracle::Vec> pts;
  for (auto [x, y] : xy) {
    if (a.toe.local(x, y, false).rho_s < 0.1 * a.spec.delta)
      fail(ErrorKind::Range, "oracle point too close to the axis");
    pts.push_back(oracle::with_equator({x, y}, a.spec.n - 2));
  }
  return oracle::cross_check([&](const oracle::Vec& p) { return a.toe.local(p[0], p[1]).R; }, chart, pts,
                             oracle::Vec(a.spec.n, h), tol);
}

// ---- step metrics ----

struct StepStage {
  double t = 0.0;  // the stage acts on [0, t]
  double s = 0.0;  // bend progress in [0, 1]
};

struct StepBase {
  double delta = 1.0;
  double neck = 1.0;    // torpedo neck length
  double length = 1.0;  // horizontal length of the cylinder
  int n = 5;
  bool operator==(const StepBase&) const = default;
  json to_json() const { return {{"delta", delta}, {"neck", neck}, {"length", length}, {"n", n}}; }
  static StepBase from_json(const json& j) {
    StepBase b;
    b.delta = j.value("delta", b.delta);
    b.neck = j.value("neck", b.neck);
    b.length = j.value("length", b.length);
    b.n = j.value("n", b.n);
    return b;
  }
};

struct StepSpec {
  StepBase base;
  std::vector<StepStage> stages;  // t strictly decreasing
  double c = 0.0;                 // 0 selects the boot default
  double L = 0.0;                 // 0 selects delta

  double zone() const { return 2.0 * L + M_PI / 2; }

  json to_json() const {
    json st = json::array();
    for (const auto& s : stages) st.push_back({{"t", s.t}, {"s", s.s}});
    return {{"base", base.to_json()}, {"stages", st}, {"c", c}, {"L", L}};
  }
  static StepSpec from_json(const json& j) {
    StepSpec s;
    s.base = StepBase::from_json(j.at("base"));
    for (const auto& e : j.value("stages", json::array())) s.stages.push_back({e.at("t").get<double>(), e.at("s").get<double>()});
    s.c = j.value("c", 0.0);
    s.L = j.value("L", 0.0);
    return s;
  }
};

// Stage k bends on [t_k - (2L + theta_k), t_k], reading the bend coordinate
// from t_k towards 0; [0, t_k - zone] stays a product for every progress.
struct StepMetric {
  StepSpec spec;
  WarpFunction eta;
  std::vector<TransitionProfile> w;  // one per stage
  std::vector<PositivityCertificate> stage_certificates;
  PositivityCertificate product;
  PositivityCertificate certificate;
  std::vector<double> product_zone_gap;  // max |w - 1| on [0, t_{k+1}] over sampled progress

  double bend_t(size_t k, double t) const { return -spec.L + (spec.stages[k].t - t); }

  double w_at(double x, double t) const {
    double v = 1.0;
    for (size_t k = 0; k < w.size(); ++k) {
      double tl = bend_t(k, t);
      if (tl > w[k].t_lo() && tl < w[k].t_hi()) v = w[k].at(x, tl).w;
    }
    return v;
  }

  // Excess length of the boundary x = b, accumulated from t = length downwards.
  double height(double t) const {
    double h = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
      double tl = bend_t(k, t);
      if (tl > w[k].t_lo()) h += w[k].excess(eta.domain_end(), tl);
    }
    return h;
  }

  bool passed() const { return certificate.passed; }

  json to_json() const {
    json st = json::array();
    for (size_t k = 0; k < stage_certificates.size(); ++k)
      st.push_back({{"stage", k}, {"certificate", stage_certificates[k].to_json()},
                    {"product_zone_gap", k < product_zone_gap.size() ? json(product_zone_gap[k]) : json(nullptr)}});
    return {{"spec", spec.to_json()}, {"eta", eta.to_json()}, {"stages", st}, {"product", product.to_json()},
            {"certificate", certificate.to_json()}, {"passed", passed()}};
  }
};

inline void validate_step_spec(const StepSpec& s) {
  if (s.base.n < 4) fail(ErrorKind::Spec, "step metrics need n >= 4");
  if (!(s.base.delta > 0.0) || !(s.base.neck > 0.0) || !(s.base.length > 0.0))
    fail(ErrorKind::Spec, "base parameters must be positive");
  double z = s.zone();
  for (size_t k = 0; k < s.stages.size(); ++k) {
    const auto& st = s.stages[k];
    if (!(st.s >= 0.0 && st.s <= 1.0)) fail(ErrorKind::Spec, "stage progress outside [0, 1]");
    if (!(st.t <= s.base.length)) fail(ErrorKind::Spec, "stage beyond the cylinder");
    if (!(st.t - z >= 0.0)) fail(ErrorKind::Spec, "stage " + std::to_string(k) + " does not fit in [0, t]");
    if (k > 0 && !(st.t <= s.stages[k - 1].t - z))
      fail(ErrorKind::Spec, "stage " + std::to_string(k) + " leaves the product zone of stage " + std::to_string(k - 1));
  }
}

inline StepSpec resolve_step_spec(StepSpec s) {
  if (s.L <= 0.0) s.L = s.base.delta;
  if (s.c <= 0.0) s.c = default_bend_radius(boot_torpedo(s.base.delta, s.base.neck), s.base.n, s.L);
  return s;
}

inline StepMetric step_metric(const StepSpec& spec_in, const BootGrid& grid = {}) {
  StepMetric m;
  m.spec = resolve_step_spec(spec_in);
  validate_step_spec(m.spec);
  const StepSpec& s = m.spec;
  m.eta = boot_torpedo(s.base.delta, s.base.neck);
  BendFamily fam = torpedo_bend_family(m.eta, s.base.n, s.c, s.L);
  double b = m.eta.domain_end();
  m.product = plain_cylinder_certificate(m.eta, s.base.n, grid);
  std::vector<PositivityCertificate> parts = {m.product};
  for (size_t k = 0; k < s.stages.size(); ++k) {
    m.w.push_back(fam.profile(s.stages[k].s * M_PI / 2));
    const TransitionProfile& w = m.w.back();
    GridAxis ta{"t", w.t_lo(), w.t_hi(), grid.y}, xa{"x", 1e-3 * b, b, grid.r};
    auto cert = certify_grid({ta, xa}, [&](const std::vector<double>& p) {
      return bend_family_R(m.eta.jet(p[1], 3), w.at(p[1], p[0]), s.base.n);
    }, default_tolerances().floor);
    if (!cert.passed) fail(ErrorKind::NoCertificate, "step stage " + std::to_string(k) + " fails certification");
    m.stage_certificates.push_back(cert);
    parts.push_back(cert);
    if (k + 1 < s.stages.size()) {
      // The next stage consumes [0, t_{k+1}]; stage k must be a product there for every progress.
      double gap = 0.0, t_next = s.stages[k + 1].t;
      for (int j = 0; j <= 4; ++j) {
        TransitionProfile wj = fam.profile(j / 4.0 * M_PI / 2);
        for (int i = 0; i <= 64; ++i) {
          double t = t_next * i / 64.0, tl = -s.L + (s.stages[k].t - t);
          for (int q = 0; q <= 8; ++q) {
            double x = b * q / 8.0;
            double v = (tl > wj.t_lo() && tl < wj.t_hi()) ? wj.at(x, tl).w : 1.0;
            gap = std::max(gap, std::abs(v - 1.0));
          }
        }
      }
      m.product_zone_gap.push_back(gap);
      if (gap > 0.0) fail(ErrorKind::Spec, "stage " + std::to_string(k) + " is not a product on [0, t_next]");
    }
  }
  m.certificate = merge(parts);
  return m;
}

struct StepRetract {
  StepBase target;
  std::vector<StepSpec> path;  // stage-reversed unbending, ending at the bare cylinder
  std::vector<PositivityCertificate> certificates;
  double final_sup_difference = 0.0;  // height profile against the target cylinder
  bool all_certified = false;

  json to_json() const {
    json p = json::array(), c = json::array();
    for (const auto& s : path) p.push_back(s.to_json());
    for (const auto& x : certificates) c.push_back(x.to_json());
    return {{"target", target.to_json()}, {"path", p}, {"certificates", c},
            {"final_sup_difference", final_sup_difference}, {"all_certified", all_certified}};
  }
};

// Unbends from the stage nearest t = 0 outwards, each in `substeps` equal decrements.
inline StepRetract step_retract(const StepSpec& spec_in, int substeps = 4, const BootGrid& grid = {}) {
  StepSpec cur = resolve_step_spec(spec_in);
  validate_step_spec(cur);
  StepRetract out;
  out.target = cur.base;
  out.path.push_back(cur);
  for (size_t k = cur.stages.size(); k-- > 0;) {
    double s0 = cur.stages[k].s;
    for (int j = 1; j <= substeps && s0 > 0.0; ++j) {
      cur.stages[k].s = s0 * (1.0 - double(j) / substeps);
      out.path.push_back(cur);
    }
  }
  out.all_certified = true;
  for (const auto& p : out.path) {
    StepMetric m = step_metric(p, grid);
    out.certificates.push_back(m.certificate);
    out.all_certified = out.all_certified && m.passed();
  }
  StepMetric last = step_metric(out.path.back(), grid);
  for (int i = 0; i <= 256; ++i)
    out.final_sup_difference = std::max(out.final_sup_difference, std::abs(last.height(cur.base.length * i / 256.0)));
  return out;
}

struct ProfileRow {
  double t, height;
};

inline std::vector<ProfileRow> step_profile(const StepMetric& m, int samples = 257) {
  std::vector<ProfileRow> rows;
  for (int i = 0; i < samples; ++i) {
    double t = m.spec.base.length * i / (samples - 1.0);
    rows.push_back({t, m.height(t)});
  }
  return rows;
}

}  // namespace psc
