// Closed-form scalar curvature of warped-product model metrics.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "psc/arc.hpp"
#include "psc/certificate.hpp"
#include "psc/warp.hpp"

namespace psc {

// dr^2 + beta^2 ds^2_{n-1}.
inline double single_warped_R(double b0, double b1, double b2, int n) {
  if (!(b0 > 0.0)) fail(ErrorKind::DegenerateMetric, "warping function not positive");
  double m = n - 1;
  return -2.0 * m * b2 / b0 + m * (m - 1.0) * (1.0 - b1 * b1) / (b0 * b0);
}

inline double scalar_curvature_single(const WarpFunction& beta, int n, double r) {
  Jet j = beta.jet(r, 3);
  return single_warped_R(j.c[0], j.c[1], 2.0 * j.c[2], n);
}

// dr^2 + phi^2 ds^2_{n-1} + psi^2 dl^2.
inline double double_warped_R(const Jet& phi, const Jet& psi, int n) {
  if (!(phi.c[0] > 0.0) || !(psi.c[0] > 0.0)) fail(ErrorKind::DegenerateMetric, "scale not positive");
  double p = phi.c[0], pr = phi.c[1], prr = 2.0 * phi.c[2];
  double s = psi.c[0], sr = psi.c[1], srr = 2.0 * psi.c[2];
  double m = n - 1;
  return m * (m - 1.0) / (p * p) * (1.0 - pr * pr) - 2.0 * m / p * (prr + pr * sr / s) - 2.0 * srr / s;
}

inline double scalar_curvature_double_warped(const NodePtr& phi, const NodePtr& psi, int n, double r) {
  return double_warped_R(phi->eval(r, 3), psi->eval(r, 3), n);
}

// Bent cylinder dr^2 + beta^2 ds^2_{n-1} + (c + alpha)^2 dl^2 with alpha the
// centred unit-speed companion of beta.
struct BentCylinder {
  WarpFunction beta;
  double c = 0.0;
  int n = 0;
  NodePtr alpha;
  NodePtr psi;  // c + alpha

  double R(double r) const { return double_warped_R(beta.jet(r, 3), psi->eval(r, 3), n); }
};

inline double max_value(const WarpFunction& w, int samples = 4096) {
  double m = 0.0;
  for (int i = 0; i <= samples; ++i) m = std::max(m, w.jet(w.domain_end() * i / samples, 1).c[0]);
  return m;
}

inline BentCylinder make_bent_cylinder(const WarpFunction& beta, double c, int n) {
  require_unit_speed_compatible(beta);
  double mb = max_value(beta);
  if (!(c > 2.0 * mb)) fail(ErrorKind::InvalidBend, "bend radius must exceed 2 max beta");
  BentCylinder bc{beta, c, n, centred_alpha_node(beta), nullptr};
  bc.psi = sum({constant(c), bc.alpha});
  return bc;
}

inline double bent_cylinder_curvature(const WarpFunction& beta, double c, int n, double r) {
  return make_bent_cylinder(beta, c, n).R(r);
}

// Values of a two-variable profile w and its first two r-derivatives.
struct WValue {
  double w = 1.0, wr = 0.0, wrr = 0.0;
};
using WProfile = std::function<WValue(double r, double t)>;

// dr^2 + w(r,t)^2 dt^2 + beta^2 ds^2_{n-2}, cross term weighted 2n.
inline double bend_family_R_displayed(const Jet& beta, const WValue& w, int n) {
  if (!(beta.c[0] > 0.0) || !(w.w > 0.0)) fail(ErrorKind::DegenerateMetric, "scale not positive");
  double b = beta.c[0], br = beta.c[1], brr = 2.0 * beta.c[2];
  return (n - 2.0) * (n - 3.0) / (b * b) * (1.0 - br * br) - 2.0 * (n - 2.0) / b * brr -
         (2.0 * n / b) * (br * w.wr / w.w) - 2.0 * w.wrr / w.w;
}

// Same metric, cross term weighted 2(n-2); this is the value the chart oracle reproduces.
inline double bend_family_R(const Jet& beta, const WValue& w, int n) {
  if (!(beta.c[0] > 0.0) || !(w.w > 0.0)) fail(ErrorKind::DegenerateMetric, "scale not positive");
  double b = beta.c[0], br = beta.c[1], brr = 2.0 * beta.c[2];
  return (n - 2.0) * (n - 3.0) / (b * b) * (1.0 - br * br) - 2.0 * (n - 2.0) / b * brr -
         2.0 * (n - 2.0) / b * (br * w.wr / w.w) - 2.0 * w.wrr / w.w;
}

inline double bend_family_curvature(const WarpFunction& beta, const WProfile& w, int n, double r, double t) {
  return bend_family_R_displayed(beta.jet(r, 3), w(r, t), n);
}
inline double bend_family_curvature_geometric(const WarpFunction& beta, const WProfile& w, int n, double r,
                                              double t) {
  return bend_family_R(beta.jet(r, 3), w(r, t), n);
}

struct RotSymMetric {
  enum class Kind { SingleWarped, DoublyWarped };
  Kind kind = Kind::SingleWarped;
  WarpFunction beta;  // beta, or phi when doubly warped
  NodePtr psi;        // doubly warped only
  int sphere_dim = 2;
  bool with_line = false;  // extra flat factor; scalar curvature unchanged

  static RotSymMetric single(WarpFunction beta, int n) {
    if (n - 1 < 1) fail(ErrorKind::InvalidMetric, "sphere dimension must be >= 1");
    RotSymMetric m;
    m.beta = std::move(beta);
    m.sphere_dim = n - 1;
    return m;
  }
  // Appendix convention: phi carries ds^2_{n-1}.
  static RotSymMetric doubly(WarpFunction phi, NodePtr psi, int n) {
    if (n - 1 < 1) fail(ErrorKind::InvalidMetric, "sphere dimension must be >= 1");
    RotSymMetric m;
    m.kind = Kind::DoublyWarped;
    m.beta = std::move(phi);
    m.psi = std::move(psi);
    m.sphere_dim = n - 1;
    return m;
  }
  static RotSymMetric product_with_line(RotSymMetric inner) {
    inner.with_line = true;
    return inner;
  }

  double R(double r) const {
    int n = sphere_dim + 1;
    if (kind == Kind::SingleWarped) return scalar_curvature_single(beta, n, r);
    return double_warped_R(beta.jet(r, 3), psi->eval(r, 3), n);
  }

  json to_json() const {
    json j = {{"kind", kind == Kind::SingleWarped ? "single_warped" : "doubly_warped"},
              {"sphere_dim", sphere_dim}, {"with_line", with_line}};
    j[kind == Kind::SingleWarped ? "beta" : "phi"] = beta.to_json();
    if (psi) j["psi"] = psi->to_json();
    return j;
  }
  static RotSymMetric from_json(const json& j) {
    RotSymMetric m;
    std::string k = j.at("kind").get<std::string>();
    m.sphere_dim = j.at("sphere_dim").get<int>();
    m.with_line = j.value("with_line", false);
    if (k == "single_warped") {
      m.beta = WarpFunction::from_json(j.at("beta"));
    } else if (k == "doubly_warped") {
      m.kind = Kind::DoublyWarped;
      m.beta = WarpFunction::from_json(j.at("phi"));
      m.psi = node_from_json(j.at("psi"));
    } else {
      fail(ErrorKind::Spec, "unknown metric kind '" + k + "'");
    }
    return m;
  }
};

// Default r-grid: [eps b, b], trimmed at b as well when beta closes up there.
inline GridAxis default_r_axis(const WarpFunction& beta, const Tolerances& tol = default_tolerances()) {
  double b = beta.domain_end();
  double lo = tol.exclusion_frac * b;
  double hi = b;
  if (std::abs(beta.jet(b, 1).c[0]) <= tol.equality) hi = b - lo;
  return {"r", lo, hi, tol.grid};
}

inline PositivityCertificate certify_positive(const RotSymMetric& m, const GridAxis& axis,
                                              double floor = default_tolerances().floor) {
  if (axis.count < 1) fail(ErrorKind::Range, "empty grid");
  return certify_grid({axis}, [&](const std::vector<double>& p) { return m.R(p[0]); }, floor);
}

inline PositivityCertificate certify_positive(const RotSymMetric& m,
                                              const Tolerances& tol = default_tolerances()) {
  return certify_positive(m, default_r_axis(m.beta, tol), tol.floor);
}

}  // namespace psc
