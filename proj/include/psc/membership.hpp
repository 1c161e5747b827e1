// Membership reports for the warping-function spaces B, B+ and W.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "psc/curvature.hpp"
#include "psc/warp.hpp"

namespace psc {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
};

struct MembershipReport {
  std::vector<Check> checks;
  double r_d = 0.0;         // concavity window end, when detected
  double neck_start = 0.0;  // torpedo reports only
  PositivityCertificate certificate;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  bool passed(const std::string& name) const {
    const Check* c = find(name);
    return c && c->passed;
  }
  void add(std::string name, bool ok, double value) { checks.push_back({std::move(name), ok, value}); }
  void append(const MembershipReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }

  json to_json() const {
    json a = json::array();
    for (const auto& c : checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}});
    return {{"passed", passed()}, {"checks", a}, {"r_d", r_d}, {"certificate", certificate.to_json()}};
  }
};

// Uniform grid over [eps b, b].
inline std::vector<double> r_grid(double b, const Tolerances& tol = default_tolerances()) {
  std::vector<double> g(tol.grid);
  double lo = tol.exclusion_frac * b;
  for (int i = 0; i < tol.grid; ++i) g[i] = lo + (b - lo) * i / double(tol.grid - 1);
  return g;
}

inline MembershipReport check_B_membership(const WarpFunction& w, const Tolerances& tol = default_tolerances()) {
  MembershipReport rep;
  Jet j0 = w.jet(0.0, K + 1);
  rep.add("value_at_0", std::abs(j0.derivative(0)) <= tol.equality, j0.derivative(0));
  rep.add("slope_at_0", std::abs(j0.derivative(1) - 1.0) <= tol.equality, j0.derivative(1));
  double even = 0.0;
  for (int k = 2; k <= K; k += 2) even = std::max(even, std::abs(j0.derivative(k)));
  rep.add("even_derivatives_at_0", even <= tol.equality, even);
  double mn = INFINITY;
  for (double r : r_grid(w.domain_end(), tol)) mn = std::min(mn, w.jet(r, 1).c[0]);
  rep.add("positive", mn > 0.0, mn);
  return rep;
}

// Largest grid point r_d with w'' < -1e-8 on every grid point of (eps b, r_d];
// zero when the first grid point already fails.
inline double detect_r_d(const WarpFunction& w, const Tolerances& tol, int* count = nullptr) {
  double r_d = 0.0;
  int c = 0;
  for (double r : r_grid(w.domain_end(), tol)) {
    if (!(2.0 * w.jet(r, 3).c[2] < -1e-8)) break;
    r_d = r;
    ++c;
  }
  if (count) *count = c;
  return r_d;
}

// Minimum number of grid points the concavity window must cover.
inline constexpr int kConcaveWindowPoints = 8;

inline MembershipReport check_W_membership(const WarpFunction& w, int n,
                                           const Tolerances& tol = default_tolerances()) {
  MembershipReport rep = check_B_membership(w, tol);
  double min_slope = INFINITY;
  for (double r : r_grid(w.domain_end(), tol)) min_slope = std::min(min_slope, w.jet(r, 2).c[1]);
  rep.add("monotone", min_slope >= -1e-10, min_slope);
  int cnt = 0;
  rep.r_d = detect_r_d(w, tol, &cnt);
  rep.add("concave_near_0", cnt >= kConcaveWindowPoints, rep.r_d);
  Jet je = w.jet(w.domain_end(), K + 1);
  double hmax = 0.0;
  for (int k = 1; k <= K; ++k) hmax = std::max(hmax, std::abs(je.derivative(k)));
  rep.add("horizontal_end", hmax <= tol.equality, hmax);
  rep.certificate = certify_positive(RotSymMetric::single(w, n), tol);
  rep.add("positive_curvature", rep.certificate.passed, rep.certificate.min_R);
  return rep;
}

}  // namespace psc
