// Deformations of warping functions: concordance from an isotopy, torpedo neck
// stretching and radius normalization, stretching functions, and the
// standardization of an element of W to a torpedo.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "psc/curves.hpp"
#include "psc/membership.hpp"
#include "psc/oracle.hpp"
#include "psc/torpedo.hpp"
#include "psc/warp.hpp"

namespace psc {

// nu_lambda(t) = S((t - 0.05 lambda) / (0.9 lambda)): 0 on [0, 0.05 lambda], 1 on [0.95 lambda, lambda].
inline NodePtr cutoff(double lambda) {
  if (!(lambda > 0.0)) fail(ErrorKind::Precondition, "cutoff scale must be positive");
  return step(0.05 * lambda, 0.9 * lambda);
}
inline double cutoff_value(double lambda, double t) { return smoothstep((t - 0.05 * lambda) / (0.9 * lambda)); }

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// ---- isotopies ----

struct WarpIsotopy {
  std::string kind;  // constant | linear | torpedo_radius
  int n = 3;         // disk dimension q + 1
  double domain_end = 1.0;
  json descriptor;
  std::function<Jet(double u, double r, int order)> jet;
  std::function<WarpFunction(double u)> slice;

  double value(double u, double r) const { return jet(u, r, 1).c[0]; }
  json to_json() const { return descriptor; }
  static WarpIsotopy from_json(const json& j);
};

inline void require_smooth_in_u(const WarpIsotopy& iso) {
  // First u-differences at steps h and h/2 must agree to second order.
  const double h = 1e-3;
  double b = iso.domain_end, worst = 0.0;
  for (int i = 1; i < 10; ++i)
    for (int k = 1; k < 16; ++k) {
      double u = i / 10.0, r = b * k / 16.0;
      double d1 = (iso.value(u + h, r) - iso.value(u - h, r)) / (2 * h);
      double d2 = (iso.value(u + h / 2, r) - iso.value(u - h / 2, r)) / h;
      if (!std::isfinite(d1) || !std::isfinite(d2)) fail(ErrorKind::Construction, "isotopy not finite");
      worst = std::max(worst, std::abs(d1 - d2));
    }
  if (worst > 1e-4) fail(ErrorKind::Construction, "isotopy is not smooth in u");
}

inline WarpIsotopy constant_isotopy(const WarpFunction& w, int n) {
  WarpIsotopy iso;
  iso.kind = "constant";
  iso.n = n;
  iso.domain_end = w.domain_end();
  iso.descriptor = {{"kind", "constant"}, {"n", n}, {"warp", w.to_json()}};
  iso.jet = [w](double, double r, int order) { return w.jet(r, order); };
  iso.slice = [w](double) { return w; };
  return iso;
}

// (1 - u) a + u b.
inline WarpIsotopy linear_isotopy(const WarpFunction& a, const WarpFunction& b, int n) {
  if (std::abs(a.domain_end() - b.domain_end()) > 1e-12 * a.domain_end())
    fail(ErrorKind::Precondition, "isotopy endpoints must share a domain");
  WarpIsotopy iso;
  iso.kind = "linear";
  iso.n = n;
  iso.domain_end = a.domain_end();
  iso.descriptor = {{"kind", "linear"}, {"n", n}, {"from", a.to_json()}, {"to", b.to_json()}};
  iso.jet = [a, b](double u, double r, int order) { return (1.0 - u) * a.jet(r, order) + u * b.jet(r, order); };
  iso.slice = [a, b](double u) {
    return WarpFunction(sum({scale(1.0 - u, a.tree()), scale(u, b.tree())}), a.domain_end());
  };
  require_smooth_in_u(iso);
  return iso;
}

// u -> perfect torpedo of radius (1 - u) d0 + u d1 on [0, b].
inline WarpIsotopy torpedo_radius_isotopy(double d0, double d1, double b, int n) {
  if (!(d0 > 0.0 && d1 > 0.0)) fail(ErrorKind::Precondition, "torpedo radii must be positive");
  if (b < perfect_neck_start(std::max(d0, d1))) fail(ErrorKind::NeckTooShort, "domain shorter than the largest cap");
  WarpIsotopy iso;
  iso.kind = "torpedo_radius";
  iso.n = n;
  iso.domain_end = b;
  iso.descriptor = {{"kind", "torpedo_radius"}, {"n", n}, {"delta0", d0}, {"delta1", d1}, {"b", b}};
  iso.jet = [d0, d1](double u, double r, int order) { return perfect_torpedo_jet((1 - u) * d0 + u * d1, r, order); };
  iso.slice = [d0, d1, b](double u) { return perfect_torpedo((1 - u) * d0 + u * d1, b); };
  require_smooth_in_u(iso);
  return iso;
}

inline WarpIsotopy WarpIsotopy::from_json(const json& j) {
  std::string k = j.at("kind").get<std::string>();
  int n = j.at("n").get<int>();
  if (k == "constant") return constant_isotopy(WarpFunction::from_json(j.at("warp")), n);
  if (k == "linear")
    return linear_isotopy(WarpFunction::from_json(j.at("from")), WarpFunction::from_json(j.at("to")), n);
  if (k == "torpedo_radius")
    return torpedo_radius_isotopy(j.at("delta0").get<double>(), j.at("delta1").get<double>(),
                                  j.at("b").get<double>(), n);
  fail(ErrorKind::Spec, "unknown isotopy kind '" + k + "'");
}

// ---- concordance ----

struct ConcordanceOptions {
  double lambda0 = 0.0;  // zero selects 1e-3 b
  int r_points = 48;
  int t_points = 48;
  double r_lo_frac = 0.02;
  int bisections = 20;
  int max_doublings = 20;
  double floor = 1e-6;
  double scaling_k = 4.0;
  double scaling_tol = 0.35;
};

struct ScalingCheck {
  double k = 4.0;
  double sup_lambda = 0.0;    // sup |Rbar - R| at lambda*
  double sup_k_lambda = 0.0;  // at k lambda*
  double ratio = 0.0;         // sup_lambda / sup_k_lambda
  bool passed = false;        // |ratio / k - 1| <= tolerance
  json to_json() const {
    return {{"k", k}, {"sup_lambda", sup_lambda}, {"sup_k_lambda", sup_k_lambda}, {"ratio", ratio}, {"passed", passed}};
  }
};

struct ConcordanceResult {
  double lambda_star = 0.0;
  int evaluations = 0;
  PositivityCertificate certificate;           // at lambda*
  PositivityCertificate certificate_double;    // at 2 lambda*
  PositivityCertificate certificate_hundredth; // at lambda* / 100
  std::vector<PositivityCertificate> slices;   // u = 0, 0.1, .., 1
  ScalingCheck scaling;
  std::function<double(double r, double t)> profile;
  double max_end_t_derivative = 0.0;  // |d nu / dt| on the product ends

  json to_json() const {
    json s = json::array();
    for (const auto& c : slices) s.push_back(c.to_json());
    return {{"lambda_star", lambda_star}, {"evaluations", evaluations}, {"certificate", certificate.to_json()},
            {"certificate_double", certificate_double.to_json()},
            {"certificate_hundredth", certificate_hundredth.to_json()}, {"slices", s},
            {"scaling", scaling.to_json()}, {"max_end_t_derivative", max_end_t_derivative}};
  }
};

namespace detail {

struct ConcordanceProbe {
  const WarpIsotopy& iso;
  ConcordanceOptions opt;
  double b;
  int q;

  oracle::ChartMetric chart(double lambda) const {
    const WarpIsotopy* p = &iso;
    auto F = [p, lambda](double r, double t) { return p->value(cutoff_value(lambda, t), r); };
    return oracle::concordance_chart(F, q, {1e-9 * b, INFINITY}, {-INFINITY, INFINITY});
  }
  oracle::Vec steps(double lambda) const {
    oracle::Vec h(q + 2, 1e-3 * M_PI);
    h[0] = 1e-4 * b;
    h[1] = 1e-3 * lambda;
    return h;
  }
  std::vector<GridAxis> axes(double lambda) const {
    return {{"r", opt.r_lo_frac * b, b, opt.r_points}, {"t", 0.0, lambda, opt.t_points}};
  }
  double Rbar(const oracle::ChartMetric& m, const oracle::Vec& h, double r, double t) const {
    return oracle::fd_scalar_curvature(m, oracle::with_equator({r, t}, q), h);
  }
  // Oracle value for the slice frozen at u = nu(t); same stencil as Rbar.
  double R_static(double lambda, double r, double t) const {
    const WarpIsotopy* p = &iso;
    double u = cutoff_value(lambda, t);
    auto frozen = oracle::concordance_chart([p, u](double rr, double) { return p->value(u, rr); }, q,
                                            {1e-9 * b, INFINITY}, {-INFINITY, INFINITY});
    return Rbar(frozen, steps(lambda), r, t);
  }
  PositivityCertificate certify(double lambda) const {
    auto m = chart(lambda);
    auto h = steps(lambda);
    return certify_grid(axes(lambda), [&](const std::vector<double>& p) { return Rbar(m, h, p[0], p[1]); },
                        opt.floor);
  }
  double sup_correction(double lambda) const {
    auto m = chart(lambda);
    auto h = steps(lambda);
    auto ax = axes(lambda);
    double worst = 0.0;
    for (int i = 0; i < ax[0].count; ++i)
      for (int k = 0; k < ax[1].count; ++k) {
        double r = ax[0].at(i), t = ax[1].at(k);
        worst = std::max(worst, std::abs(Rbar(m, h, r, t) - R_static(lambda, r, t)));
      }
    return worst;
  }
};

}  // namespace detail

inline ConcordanceResult concordance_from_isotopy(const WarpIsotopy& iso, ConcordanceOptions opt = {}) {
  ConcordanceResult res;
  const double b = iso.domain_end;
  const int q = iso.n - 1;
  if (q < 2) fail(ErrorKind::Precondition, "concordance needs sphere dimension q >= 2");
  for (int i = 0; i <= 10; ++i) {
    auto c = certify_positive(RotSymMetric::single(iso.slice(i / 10.0), iso.n));
    res.slices.push_back(c);
    if (!c.passed) fail(ErrorKind::Precondition, "isotopy slice u = " + std::to_string(i / 10.0) + " is not positive");
  }
  detail::ConcordanceProbe probe{iso, opt, b, q};
  double lambda = opt.lambda0 > 0.0 ? opt.lambda0 : 1e-3 * b;

  PositivityCertificate best;
  best.min_R = -INFINITY;
  double lo = 0.0, hi = 0.0;
  PositivityCertificate hi_cert;
  for (int d = 0; d <= opt.max_doublings; ++d, lambda *= 2.0) {
    auto c = probe.certify(lambda);
    ++res.evaluations;
    if (c.passed) {
      hi = lambda;
      hi_cert = c;
      break;
    }
    if (c.min_R > best.min_R) best = c;
    lo = lambda;
  }
  if (hi == 0.0)
    fail(ErrorKind::NoCertificate, "no certified cutoff scale up to 2^" + std::to_string(opt.max_doublings) +
                                       " lambda0; best min R " + std::to_string(best.min_R));
  if (lo > 0.0) {
    for (int i = 0; i < opt.bisections; ++i) {
      double mid = 0.5 * (lo + hi);
      auto c = probe.certify(mid);
      ++res.evaluations;
      if (c.passed) {
        hi = mid;
        hi_cert = c;
      } else {
        lo = mid;
      }
    }
  }
  res.lambda_star = hi;
  res.certificate = hi_cert;
  res.certificate_double = probe.certify(2.0 * hi);
  res.certificate_hundredth = probe.certify(hi / 100.0);

  res.scaling.k = opt.scaling_k;
  res.scaling.sup_lambda = probe.sup_correction(hi);
  res.scaling.sup_k_lambda = probe.sup_correction(opt.scaling_k * hi);
  res.scaling.ratio = res.scaling.sup_k_lambda > 0.0 ? res.scaling.sup_lambda / res.scaling.sup_k_lambda : 0.0;
  res.scaling.passed = std::abs(res.scaling.ratio / opt.scaling_k - 1.0) <= opt.scaling_tol;

  NodePtr nu = cutoff(hi);
  for (int i = 0; i <= 64; ++i) {
    for (double t : {0.05 * hi * i / 64.0, hi - 0.05 * hi * i / 64.0})
      res.max_end_t_derivative = std::max(res.max_end_t_derivative, std::abs(nu->eval(t, 2).c[1]));
  }
  res.profile = [iso, hi](double r, double t) { return iso.value(cutoff_value(hi, t), r); };
  return res;
}

// ---- torpedo isotopies ----

// The neck of eta lengthened by u * extra; the cap is untouched.
inline WarpFunction neck_stretch(const WarpFunction& eta, double extra, double u, int n = 3,
                                 const Tolerances& tol = default_tolerances()) {
  if (!(extra > 0.0)) fail(ErrorKind::Precondition, "neck extension must be positive");
  if (!is_torpedo(eta, n, tol).passed()) fail(ErrorKind::Precondition, "input is not a torpedo");
  if (u <= 0.0) return eta;
  double start = detect_neck_start(eta, tol);
  return WarpFunction(hold(eta.tree(), start), eta.domain_end() + u * extra);
}

struct RadiusNormalization {
  WarpFunction source;  // possibly neck-stretched input
  double delta = 1.0;
  double a = 0.0;       // chi = 1 on [0, a]
  double L_chi = 0.0;   // chi falls to 0 over [a, a + L_chi]
  double extension = 0.0;
  int n = 3;

  WarpFunction at(double u) const {
    if (delta == 1.0 || u <= 0.0) return source;
    NodePtr chi = sum({constant(1.0), scale(-1.0, step(a, L_chi))});
    NodePtr uchi = scale(u, chi);
    NodePtr f = sum({product(sum({constant(1.0), scale(-1.0, uchi)}), source.tree()), product(uchi, unit_torpedo())});
    return WarpFunction(f, source.domain_end());
  }
};

// B conditions, positive curvature and a horizontal end; the normalized
// functions need not be monotone when delta < 1.
inline MembershipReport check_normalized_slice(const WarpFunction& w, int n, const Tolerances& tol) {
  MembershipReport rep = check_B_membership(w, tol);
  Jet je = w.jet(w.domain_end(), K + 1);
  double hmax = 0.0;
  for (int k = 1; k <= K; ++k) hmax = std::max(hmax, std::abs(je.derivative(k)));
  rep.add("horizontal_end", hmax <= tol.equality, hmax);
  rep.certificate = certify_positive(RotSymMetric::single(w, n), tol);
  rep.add("positive_curvature", rep.certificate.passed, rep.certificate.min_R);
  return rep;
}

// Plan for moving eta_delta to a torpedo that agrees with eta_1 near 0: doubles
// L_chi until every u in {0, 0.1, .., 1} certifies, stretching the neck as needed.
inline RadiusNormalization plan_radius_normalization(const WarpFunction& eta, int n,
                                                     const Tolerances& tol = default_tolerances(),
                                                     int max_doublings = 12) {
  if (!is_torpedo(eta, n, tol).passed()) fail(ErrorKind::Precondition, "input is not a torpedo");
  RadiusNormalization plan;
  plan.source = eta;
  plan.n = n;
  plan.delta = eta.eval(eta.domain_end());
  if (std::abs(plan.delta - 1.0) <= 1e-12) {
    plan.delta = 1.0;
    return plan;
  }
  plan.a = std::max(detect_neck_start(eta, tol), perfect_neck_start(1.0));
  double L = std::max(plan.delta, 1.0);
  for (int d = 0; d <= max_doublings; ++d, L *= 2.0) {
    plan.L_chi = L;
    plan.source = eta;
    plan.extension = std::max(0.0, plan.a + 1.5 * L - eta.domain_end());
    if (plan.extension > 0.0) plan.source = neck_stretch(eta, plan.extension, 1.0, n, tol);
    bool ok = true;
    for (int i = 1; i <= 10 && ok; ++i) ok = check_normalized_slice(plan.at(i / 10.0), n, tol).passed();
    if (ok) return plan;
  }
  fail(ErrorKind::NoCertificate, "radius normalization not certified after maximal extension");
}

inline WarpFunction radius_normalize(const WarpFunction& eta, double u, int n,
                                     const Tolerances& tol = default_tolerances()) {
  return plan_radius_normalization(eta, n, tol).at(u);
}

// ---- stretching ----


// c(t) = t on [0, t_a]; c' = 1 - (1 - k) S((t - t_a) / (t_d - t_a)); linear with
// slope k on [t_d, b + lambda] and c(b + lambda) = b.
struct StretchFunction {
  double r_d = 0.0, lambda = 0.0, b = 0.0;
  double t_a = 0.0, t_d = 0.0;
  double slope = 1.0;  // k
  NodePtr node;

  double operator()(double t) const { return node->value(t); }
  Jet jet(double t, int n) const { return node->eval(t, n); }
  json to_json() const { return {{"r_d", r_d}, {"lambda", lambda}, {"b", b}, {"t_a", t_a}, {"t_d", t_d}, {"slope", slope}}; }
};

inline StretchFunction stretching_function(double r_d, double lambda, double b) {
  if (!(r_d > 0.0 && r_d < b)) fail(ErrorKind::Precondition, "require 0 < r_d < b");
  if (lambda < 0.0) fail(ErrorKind::Precondition, "negative stretch");
  StretchFunction c;
  c.r_d = r_d;
  c.lambda = lambda;
  c.b = b;
  c.t_a = 0.4 * r_d;
  c.t_d = 0.8 * r_d;
  double w = c.t_d - c.t_a;
  double B = b - c.t_a - w / 2;
  if (!(w > 0.0 && B > 0.0)) fail(ErrorKind::Construction, "stretch window collapses");
  c.slope = B / (B + lambda);
  if (lambda == 0.0) {
    c.node = identity();
    return c;
  }
  c.node = sum({identity(), scale(-(1.0 - c.slope), soft_ramp(c.t_a, w))});
  return c;
}

struct StretchAudit {
  double min_R = INFINITY;
  double min_gap = INFINITY;          // R - (c'^2 bracket + correction)
  double min_correction = INFINITY;   // -2q c'' w'/w
  bool passed = false;
  json to_json() const {
    return {{"min_R", min_R}, {"min_gap", min_gap}, {"min_correction", min_correction}, {"passed", passed}};
  }
};

inline WarpFunction stretch_warp(const WarpFunction& omega, const StretchFunction& c) {
  if (std::abs(c.b - omega.domain_end()) > 1e-12 * c.b) fail(ErrorKind::Precondition, "stretch built for another domain");
  if (c.lambda == 0.0) return omega;
  return WarpFunction(compose(omega.tree(), c.node), c.b + c.lambda);
}

inline WarpFunction stretch_warp(const WarpFunction& omega, double r_d, double lambda, int n,
                                 const Tolerances& tol = default_tolerances()) {
  auto rep = check_W_membership(omega, n, tol);
  if (!rep.passed()) fail(ErrorKind::Precondition, "omega is not in W");
  if (rep.r_d + 1e-12 < r_d) fail(ErrorKind::Precondition, "concavity window does not reach r_d");
  return stretch_warp(omega, stretching_function(r_d, lambda, omega.domain_end()));
}

// Pointwise audit of R(omega o c) >= c'^2 R_omega(c) - 2q c'' omega'/omega.
inline StretchAudit audit_stretch(const WarpFunction& omega, const StretchFunction& c, int n,
                                  const Tolerances& tol = default_tolerances()) {
  StretchAudit a;
  const double q = n - 1;
  double L = c.b + c.lambda;
  for (double t : r_grid(L, tol)) {
    Jet cj = c.jet(t, 3);
    Jet w = omega.jet(std::min(cj.c[0], c.b), 3);
    double c1 = cj.c[1], c2 = 2.0 * cj.c[2];
    double f = w.c[0], f1 = w.c[1] * c1, f2 = 2.0 * w.c[2] * c1 * c1 + w.c[1] * c2;
    double R = single_warped_R(f, f1, f2, n);
    double bracket = single_warped_R(w.c[0], w.c[1], 2.0 * w.c[2], n);
    double corr = -2.0 * q * c2 * w.c[1] / w.c[0];
    a.min_R = std::min(a.min_R, R);
    a.min_gap = std::min(a.min_gap, R - (c1 * c1 * bracket + corr));
    a.min_correction = std::min(a.min_correction, corr);
  }
  a.passed = a.min_gap >= -1e-9 * std::max(1.0, std::abs(a.min_R)) && a.min_correction >= -1e-12;
  return a;
}

// ---- standardization ----

struct SixTermAudit {
  double max_identity_residual = 0.0;  // |sum of terms - R|
  double min_mixed_terms = INFINITY;   // T3 and T4, each non-negative
  double min_last_four = INFINITY;
  json to_json() const {
    return {{"max_identity_residual", max_identity_residual}, {"min_mixed_terms", min_mixed_terms},
            {"min_last_four", min_last_four}};
  }
};

struct StandardizeOptions {
  int equispaced = 21;
  int random_slices = 10;
  uint64_t seed = 1;
  int bisections = 20;
  int max_doublings = 20;
};

struct StandardizeResult {
  double Lambda_star = 0.0;
  double delta = 0.0;
  double r_d = 0.0;
  StretchFunction stretch;
  WarpFunction stretched, target;
  std::vector<double> s_values;
  std::vector<PositivityCertificate> slice_certs;
  PositivityCertificate certificate;
  double max_end_jet_residual = 0.0;
  bool origin_conditions = true;
  SixTermAudit audit;
  MembershipReport final_torpedo;
  int evaluations = 0;

  WarpFunction path(double s) const {
    return WarpFunction(sum({scale(1.0 - s, stretched.tree()), scale(s, target.tree())}), stretched.domain_end());
  }
  bool passed() const {
    return certificate.passed && max_end_jet_residual <= 1e-8 && origin_conditions && final_torpedo.passed();
  }
  json to_json() const {
    json m = json::array();
    for (size_t i = 0; i < s_values.size(); ++i)
      m.push_back({{"s", s_values[i]}, {"min_R", slice_certs[i].min_R}, {"margin", slice_certs[i].margin}});
    return {{"Lambda_star", Lambda_star}, {"delta", delta}, {"r_d", r_d}, {"stretch", stretch.to_json()},
            {"slices", m}, {"certificate", certificate.to_json()}, {"max_end_jet_residual", max_end_jet_residual},
            {"origin_conditions", origin_conditions}, {"six_term_audit", audit.to_json()},
            {"final_torpedo", final_torpedo.to_json()}, {"evaluations", evaluations}, {"passed", passed()}};
  }
};

inline std::vector<double> homotopy_slices(const StandardizeOptions& opt) {
  std::vector<double> s;
  for (int i = 0; i < opt.equispaced; ++i) s.push_back(i / double(opt.equispaced - 1));
  std::mt19937_64 g(opt.seed);
  for (int i = 0; i < opt.random_slices; ++i) s.push_back(unit_uniform(g));
  return s;
}

namespace detail {

// Jets of the two homotopy endpoints on the certification grid.
struct HomotopyTable {
  std::vector<double> r;
  std::vector<Jet> A, B, C;  // omega o c, eta_delta, c
  std::vector<Jet> W;        // omega at c(r)
};

inline HomotopyTable tabulate(const WarpFunction& omega, const StretchFunction& c, double delta,
                              const Tolerances& tol) {
  HomotopyTable T;
  double L = c.b + c.lambda;
  T.r = r_grid(L, tol);
  for (double t : T.r) {
    Jet cj = c.jet(t, 3);
    Jet w = omega.jet(std::min(cj.c[0], c.b), 3);
    Jet a(3);
    a.c[0] = w.c[0];
    a.c[1] = w.c[1] * cj.c[1];
    a.c[2] = w.c[2] * cj.c[1] * cj.c[1] + w.c[1] * cj.c[2];
    T.A.push_back(a);
    T.B.push_back(perfect_torpedo_jet(delta, t, 3));
    T.C.push_back(cj);
    T.W.push_back(w);
  }
  return T;
}

inline PositivityCertificate certify_slice(const HomotopyTable& T, double s, int n, double floor) {
  GridAxis ax{"r", T.r.front(), T.r.back(), static_cast<int>(T.r.size())};
  return certify_grid({ax}, [&](const std::vector<double>& p) {
    // grid points coincide with T.r
    size_t i = static_cast<size_t>(std::lround((p[0] - ax.lo) / (ax.hi - ax.lo) * (ax.count - 1)));
    Jet f = (1.0 - s) * T.A[i] + s * T.B[i];
    return single_warped_R(f.c[0], f.c[1], 2.0 * f.c[2], n);
  }, floor);
}

}  // namespace detail

inline StandardizeResult standardize_to_torpedo(const WarpFunction& omega, int n, StandardizeOptions opt = {},
                                                const Tolerances& tol = default_tolerances()) {
  auto rep = check_W_membership(omega, n, tol);
  if (!rep.passed()) fail(ErrorKind::Precondition, "omega is not in W");
  StandardizeResult res;
  const double b = omega.domain_end();
  res.delta = omega.eval(b);
  res.r_d = rep.r_d;
  res.s_values = homotopy_slices(opt);

  auto try_Lambda = [&](double Lam, std::vector<PositivityCertificate>* out) {
    auto c = stretching_function(res.r_d, Lam, b);
    auto T = detail::tabulate(omega, c, res.delta, tol);
    bool ok = true;
    for (double s : res.s_values) {
      auto cert = detail::certify_slice(T, s, n, tol.floor);
      ok = ok && cert.passed;
      if (out) out->push_back(cert);
      else if (!ok) break;
    }
    ++res.evaluations;
    return ok;
  };

  // the target needs an open neck inside [0, b + Lambda]
  double Lam_lo = std::max(0.0, 1.05 * perfect_neck_start(res.delta) - b);
  double lo = -1.0, hi = Lam_lo;
  if (!try_Lambda(Lam_lo, nullptr)) {
    lo = Lam_lo;
    double step = 0.25 * b;
    bool found = false;
    for (int d = 0; d < opt.max_doublings; ++d, step *= 2.0) {
      hi = Lam_lo + step;
      if (try_Lambda(hi, nullptr)) {
        found = true;
        break;
      }
      lo = hi;
    }
    if (!found) fail(ErrorKind::NoCertificate, "no certified stretch up to Lambda = " + std::to_string(hi));
    for (int i = 0; i < opt.bisections; ++i) {
      double mid = 0.5 * (lo + hi);
      (try_Lambda(mid, nullptr) ? hi : lo) = mid;
    }
  }
  res.Lambda_star = hi;
  res.stretch = stretching_function(res.r_d, hi, b);
  res.stretched = stretch_warp(omega, res.stretch);
  double L = b + hi;
  res.target = perfect_torpedo(res.delta, L);
  try_Lambda(hi, &res.slice_certs);
  res.certificate = merge(res.slice_certs);

  // endpoint conditions along the path
  for (double s : res.s_values) {
    WarpFunction f = res.path(s);
    Jet je = f.jet(L, K + 1);
    res.max_end_jet_residual = std::max(res.max_end_jet_residual, std::abs(je.c[0] - res.delta));
    for (int k = 1; k <= K; ++k) res.max_end_jet_residual = std::max(res.max_end_jet_residual, std::abs(je.derivative(k)));
    auto b0 = check_B_membership(f, tol);
    res.origin_conditions = res.origin_conditions && b0.passed("value_at_0") && b0.passed("slope_at_0") &&
                            b0.passed("even_derivatives_at_0");
  }

  // six-term expansion of R along the path
  auto T = detail::tabulate(omega, res.stretch, res.delta, tol);
  const double q = n - 1;
  for (double s : res.s_values) {
    for (size_t i = 0; i < T.r.size(); ++i) {
      const Jet &A = T.A[i], &B = T.B[i], &C = T.C[i], &W = T.W[i];
      double D = (1 - s) * A.c[0] + s * B.c[0];
      double c1 = C.c[1], c2 = 2.0 * C.c[2], w1 = W.c[1], w2 = 2.0 * W.c[2];
      double a = (1 - s) * w1 * c1, bb = s * B.c[1];
      double t1 = -2 * q * (1 - s) * c1 * c1 * w2 / D;
      double t2 = q * (q - 1) * (1 - a * a) / (D * D);
      double t3 = -2 * q * c2 * (1 - s) * w1 / D;
      double t4 = -2 * q * s * 2.0 * B.c[2] / D;
      double t5 = q * (q - 1) * (1 - bb * bb) / (D * D);
      double t6 = -q * (q - 1) * (1 + 2 * a * bb) / (D * D);
      Jet f = (1.0 - s) * A + s * B;
      double R = single_warped_R(f.c[0], f.c[1], 2.0 * f.c[2], n);
      double sum6 = t1 + t2 + t3 + t4 + t5 + t6;
      res.audit.max_identity_residual =
          std::max(res.audit.max_identity_residual, std::abs(sum6 - R) / std::max(1.0, std::abs(R)));
      res.audit.min_mixed_terms = std::min({res.audit.min_mixed_terms, t3, t4});
      res.audit.min_last_four = std::min(res.audit.min_last_four, t3 + t4 + t5 + t6);
    }
  }
  res.final_torpedo = is_torpedo(res.path(1.0), n, tol);
  res.final_torpedo.add("radius", std::abs(res.path(1.0).eval(L) - res.delta) <= 1e-12, res.path(1.0).eval(L));
  return res;
}

// Certificate of the unstretched homotopy (1 - s) omega + s eta_delta on [0, b].
inline PositivityCertificate naive_homotopy_certificate(const WarpFunction& omega, int n, StandardizeOptions opt = {},
                                                        const Tolerances& tol = default_tolerances()) {
  double b = omega.domain_end();
  double delta = omega.eval(b);
  auto c = stretching_function(0.5 * b, 0.0, b);
  auto T = detail::tabulate(omega, c, delta, tol);
  std::vector<PositivityCertificate> parts;
  for (double s : homotopy_slices(opt)) parts.push_back(detail::certify_slice(T, s, n, tol.floor));
  return merge(parts);
}

struct SteepShape {
  double eps = 0.05;     // cap radius
  double slope = 0.5;    // slope of the ramp
  double kick = 0.1;     // width of the convex turn onto the ramp
  double run = 2.0;      // ramp length
  double flatten = 1.0;  // width of the concave turn off the ramp
  double tail = 0.5;
};

// Element of W whose plain homotopy to its torpedo loses positivity: a torpedo of
// radius eps, a sharp convex turn onto a ramp of the given slope, then a gentle
// concave turn to the horizontal end.
inline WarpFunction steep_witness(SteepShape sh = {}) {
  double r1 = perfect_neck_start(sh.eps) + 0.05;
  double r2 = r1 + sh.run;
  NodePtr f = sum({perfect_torpedo_node(sh.eps),
                   scale(sh.slope, sum({soft_ramp(r1, sh.kick), scale(-1.0, soft_ramp(r2, sh.flatten))}))});
  return WarpFunction(f, r2 + sh.flatten + sh.tail);
}

}  // namespace psc
