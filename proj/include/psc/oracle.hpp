// Finite-difference curvature of chart-level metric tensors.
//
// Stencils are central and second order.  First derivatives of G use step h;
// derivatives of the Christoffel symbols use step 2h on top of that, so a
// curvature evaluation touches points within 3h of the base point.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "psc/errors.hpp"
#include "psc/warp.hpp"

namespace psc::oracle {

inline constexpr int kMaxDim = 10;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec = std::vector<double>;

struct ChartMetric {
  int dim = 0;
  // Fills g (dim x dim); only the upper triangle is read.
  std::function<void(const Vec& x, Mat& g)> components;
  std::vector<std::pair<double, double>> box;

  Mat at(const Vec& x) const {
    Mat g(dim, dim);
    g.setZero();
    components(x, g);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < i; ++j) g(i, j) = g(j, i);
    return g;
  }
};

// Christoffel symbols gamma[k][i][j] = Gamma^k_ij, flattened.
struct Christoffels {
  int dim = 0;
  std::vector<double> v;
  double operator()(int k, int i, int j) const { return v[(k * dim + i) * dim + j]; }
  double& operator()(int k, int i, int j) { return v[(k * dim + i) * dim + j]; }
};

inline Vec steps(int dim, double h) { return Vec(dim, h); }

inline void require_inside(const ChartMetric& m, const Vec& x, const Vec& reach) {
  for (int i = 0; i < m.dim; ++i) {
    if (i >= static_cast<int>(m.box.size())) break;
    if (x[i] - reach[i] < m.box[i].first || x[i] + reach[i] > m.box[i].second)
      fail(ErrorKind::Range, "stencil leaves the chart box on axis " + std::to_string(i));
  }
}

inline bool positive_definite(const ChartMetric& m, const Vec& x) {
  Mat g = m.at(x);
  for (int k = 1; k <= m.dim; ++k)
    if (!(g.topLeftCorner(k, k).determinant() > 0.0)) return false;
  return true;
}

inline Mat inverse_metric(const Mat& g) {
  Eigen::FullPivLU<Mat> lu(g);
  double scale = g.cwiseAbs().maxCoeff();
  if (!lu.isInvertible() || std::abs(lu.determinant()) <= 1e-14 * std::pow(scale, g.rows()))
    fail(ErrorKind::Inversion, "metric is singular at the evaluation point");
  return lu.inverse();
}

namespace detail {
inline Christoffels christoffels(const ChartMetric& m, const Vec& x, const Vec& h) {
  const int d = m.dim;
  Mat ginv = inverse_metric(m.at(x));
  // dG[l] = partial_l G
  std::vector<Mat> dG(d);
  Vec y = x;
  for (int l = 0; l < d; ++l) {
    y[l] = x[l] + h[l];
    Mat gp = m.at(y);
    y[l] = x[l] - h[l];
    Mat gm = m.at(y);
    y[l] = x[l];
    dG[l] = (gp - gm) / (2.0 * h[l]);
  }
  Christoffels c{d, std::vector<double>(d * d * d, 0.0)};
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += ginv(k, l) * (dG[j](i, l) + dG[i](j, l) - dG[l](i, j));
        c(k, i, j) = 0.5 * s;
        c(k, j, i) = 0.5 * s;
      }
    }
  return c;
}

// Riemann tensor R^l_{ijk} flattened as ((l*d + i)*d + j)*d + k.
inline std::vector<double> riemann(const ChartMetric& m, const Vec& x, const Vec& h) {
  const int d = m.dim;
  Christoffels c0 = christoffels(m, x, h);
  std::vector<Christoffels> dC(d);  // partial_i Gamma, outer step 2h
  Vec y = x;
  for (int i = 0; i < d; ++i) {
    y[i] = x[i] + 2.0 * h[i];
    Christoffels cp = christoffels(m, y, h);
    y[i] = x[i] - 2.0 * h[i];
    Christoffels cm = christoffels(m, y, h);
    y[i] = x[i];
    dC[i].dim = d;
    dC[i].v.resize(cp.v.size());
    for (size_t q = 0; q < cp.v.size(); ++q) dC[i].v[q] = (cp.v[q] - cm.v[q]) / (4.0 * h[i]);
  }
  std::vector<double> R(d * d * d * d, 0.0);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double s = dC[i](l, j, k) - dC[j](l, i, k);
          for (int p = 0; p < d; ++p) s += c0(l, i, p) * c0(p, j, k) - c0(l, j, p) * c0(p, i, k);
          R[((l * d + i) * d + j) * d + k] = s;
        }
  return R;
}
}  // namespace detail

inline Christoffels fd_christoffels(const ChartMetric& m, const Vec& x, const Vec& h) {
  require_inside(m, x, h);
  return detail::christoffels(m, x, h);
}
inline Christoffels fd_christoffels(const ChartMetric& m, const Vec& x, double h) {
  return fd_christoffels(m, x, steps(m.dim, h));
}

inline double fd_sectional(const ChartMetric& m, const Vec& x, int i, int j, const Vec& h) {
  Vec reach(m.dim);
  for (int a = 0; a < m.dim; ++a) reach[a] = 3.0 * h[a];
  require_inside(m, x, reach);
  const int d = m.dim;
  Mat g = m.at(x);
  double den = g(i, i) * g(j, j) - g(i, j) * g(i, j);
  if (den <= 1e-12) fail(ErrorKind::DegeneratePlane, "coordinate plane is degenerate");
  auto R = detail::riemann(m, x, h);
  // g(R(d_i, d_j) d_j, d_i), averaged with its pair-swapped twin so K_ij = K_ji exactly.
  double a = 0.0, b = 0.0;
  for (int l = 0; l < d; ++l) {
    a += R[((l * d + i) * d + j) * d + j] * g(l, i);
    b += R[((l * d + j) * d + i) * d + i] * g(l, j);
  }
  return 0.5 * (a + b) / den;
}
inline double fd_sectional(const ChartMetric& m, const Vec& x, int i, int j, double h) {
  return fd_sectional(m, x, i, j, steps(m.dim, h));
}

// Simplified form valid only where the chart is normal at x (g = I, dg = 0):
// K_ij = d_i G^i_jj - d_j G^i_ij + sum_k (G^k_jj G^i_ik - G^k_ij G^i_jk).
inline double fd_sectional_normal(const ChartMetric& m, const Vec& x, int i, int j, const Vec& h) {
  Vec reach(m.dim);
  for (int a = 0; a < m.dim; ++a) reach[a] = 3.0 * h[a];
  require_inside(m, x, reach);
  if (i == j) fail(ErrorKind::DegeneratePlane, "coordinate plane is degenerate");
  auto gamma_at = [&](int axis, double shift) {
    Vec y = x;
    y[axis] += shift;
    return detail::christoffels(m, y, h);
  };
  Christoffels c0 = detail::christoffels(m, x, h);
  Christoffels ip = gamma_at(i, 2.0 * h[i]), im = gamma_at(i, -2.0 * h[i]);
  Christoffels jp = gamma_at(j, 2.0 * h[j]), jm = gamma_at(j, -2.0 * h[j]);
  double k = (ip(i, j, j) - im(i, j, j)) / (4.0 * h[i]) - (jp(i, i, j) - jm(i, i, j)) / (4.0 * h[j]);
  for (int p = 0; p < m.dim; ++p) k += c0(p, j, j) * c0(i, i, p) - c0(p, i, j) * c0(i, j, p);
  return k;
}
inline double fd_sectional_normal(const ChartMetric& m, const Vec& x, int i, int j, double h) {
  return fd_sectional_normal(m, x, i, j, steps(m.dim, h));
}

inline double fd_scalar_curvature(const ChartMetric& m, const Vec& x, const Vec& h) {
  Vec reach(m.dim);
  for (int a = 0; a < m.dim; ++a) reach[a] = 3.0 * h[a];
  require_inside(m, x, reach);
  const int d = m.dim;
  Mat ginv = inverse_metric(m.at(x));
  auto R = detail::riemann(m, x, h);
  double s = 0.0;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      double ric = 0.0;
      for (int i = 0; i < d; ++i) ric += R[((i * d + i) * d + j) * d + k];
      s += ginv(j, k) * ric;
    }
  return s;
}
inline double fd_scalar_curvature(const ChartMetric& m, const Vec& x, double h) {
  return fd_scalar_curvature(m, x, steps(m.dim, h));
}

// Richardson combination of steps h and h/2.
inline double fd_scalar_curvature_richardson(const ChartMetric& m, const Vec& x, const Vec& h) {
  Vec h2 = h;
  for (auto& v : h2) v *= 0.5;
  return (4.0 * fd_scalar_curvature(m, x, h2) - fd_scalar_curvature(m, x, h)) / 3.0;
}

// ---- chart builders ----

// Appends the round-sphere block of dimension q, scaled by s2, starting at index off.
inline void sphere_block(const Vec& x, int off, int q, double s2, Mat& g) {
  double f = s2;
  for (int a = 0; a < q; ++a) {
    g(off + a, off + a) = f;
    double s = std::sin(x[off + a]);
    f *= s * s;
  }
}

inline std::vector<std::pair<double, double>> sphere_box(int q) {
  return std::vector<std::pair<double, double>>(q, {1e-3, M_PI - 1e-3});
}

// Equator point for the sphere coordinates.
inline Vec with_equator(Vec base, int q) {
  for (int a = 0; a < q; ++a) base.push_back(M_PI / 2);
  return base;
}

// dr^2 + F(r)^2 ds^2_{n-1}; coordinates (r, theta_1..theta_{n-1}).
inline ChartMetric single_warped_chart(std::function<double(double)> F, int n, double r_lo, double r_hi) {
  ChartMetric m;
  m.dim = n;
  m.components = [F, n](const Vec& x, Mat& g) {
    g(0, 0) = 1.0;
    double f = F(x[0]);
    sphere_block(x, 1, n - 1, f * f, g);
  };
  m.box = {{r_lo, r_hi}};
  auto sb = sphere_box(n - 1);
  m.box.insert(m.box.end(), sb.begin(), sb.end());
  return m;
}

// dr^2 + phi^2 ds^2_{n-1} + psi^2 dl^2; coordinates (r, theta.., l).
inline ChartMetric doubly_warped_chart(std::function<double(double)> phi, std::function<double(double)> psi,
                                       int n, double r_lo, double r_hi) {
  ChartMetric m;
  m.dim = n + 1;
  m.components = [phi, psi, n](const Vec& x, Mat& g) {
    g(0, 0) = 1.0;
    double p = phi(x[0]), s = psi(x[0]);
    sphere_block(x, 1, n - 1, p * p, g);
    g(n, n) = s * s;
  };
  m.box = {{r_lo, r_hi}};
  auto sb = sphere_box(n - 1);
  m.box.insert(m.box.end(), sb.begin(), sb.end());
  m.box.push_back({-1e9, 1e9});
  return m;
}

// dr^2 + w(r,t)^2 dt^2 + beta(r)^2 ds^2_{n-2}; coordinates (r, t, theta..).
inline ChartMetric bend_family_chart(std::function<double(double)> beta, std::function<double(double, double)> w,
                                     int n, std::pair<double, double> r_box, std::pair<double, double> t_box) {
  ChartMetric m;
  m.dim = n;
  m.components = [beta, w, n](const Vec& x, Mat& g) {
    g(0, 0) = 1.0;
    double ww = w(x[0], x[1]);
    g(1, 1) = ww * ww;
    double b = beta(x[0]);
    sphere_block(x, 2, n - 2, b * b, g);
  };
  m.box = {r_box, t_box};
  auto sb = sphere_box(n - 2);
  m.box.insert(m.box.end(), sb.begin(), sb.end());
  return m;
}

// dr^2 + F(r,t)^2 ds^2_q + dt^2; coordinates (r, t, theta_1..theta_q).
inline ChartMetric concordance_chart(std::function<double(double, double)> F, int q, std::pair<double, double> r_box,
                                     std::pair<double, double> t_box) {
  ChartMetric m;
  m.dim = q + 2;
  m.components = [F, q](const Vec& x, Mat& g) {
    g(0, 0) = 1.0;
    g(1, 1) = 1.0;
    double f = F(x[0], x[1]);
    sphere_block(x, 2, q, f * f, g);
  };
  m.box = {r_box, t_box};
  auto sb = sphere_box(q);
  m.box.insert(m.box.end(), sb.begin(), sb.end());
  return m;
}

inline ChartMetric euclidean_chart(int dim) {
  ChartMetric m;
  m.dim = dim;
  m.components = [dim](const Vec&, Mat& g) {
    for (int i = 0; i < dim; ++i) g(i, i) = 1.0;
  };
  m.box.assign(dim, {-1e9, 1e9});
  return m;
}

// Stereographic chart of the round n-sphere of radius rho.
inline ChartMetric stereographic_sphere_chart(int n, double rho) {
  ChartMetric m;
  m.dim = n;
  m.components = [n, rho](const Vec& x, Mat& g) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    double f = 2.0 * rho / (1.0 + s);
    for (int i = 0; i < n; ++i) g(i, i) = f * f;
  };
  m.box.assign(n, {-1e3, 1e3});
  return m;
}

// Exponential chart of the round n-sphere of radius rho about a pole; normal at 0.
// g = f I + (1 - f) x x^T / |x|^2 with f = (rho sin(|x|/rho) / |x|)^2.
inline ChartMetric normal_sphere_chart(int n, double rho) {
  ChartMetric m;
  m.dim = n;
  m.components = [n, rho](const Vec& x, Mat& g) {
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) s2 += x[i] * x[i];
    double u2 = s2 / (rho * rho), f, q;  // q = (1 - f) / |x|^2
    if (u2 < 2.5e-3) {
      q = (1.0 / 3.0 - u2 * (2.0 / 45.0 - u2 * (1.0 / 315.0))) / (rho * rho);
      f = 1.0 - q * s2;
    } else {
      double s = std::sqrt(s2), sn = rho * std::sin(s / rho) / s;
      f = sn * sn;
      q = (1.0 - f) / s2;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) g(i, j) = (i == j ? f : 0.0) + q * x[i] * x[j];
  };
  m.box.assign(n, {-rho * M_PI / 2, rho * M_PI / 2});
  return m;
}

// ---- cross check ----

struct CrossCheckReport {
  double max_residual = 0.0;       // at step h
  double max_residual_half = 0.0;  // at step h/2
  double ratio = 0.0;              // residual(h) / residual(h/2)
  double tol = 0.0;
  bool passed = false;
  Vec worst_point;

  json to_json() const {
    return {{"max_residual", max_residual}, {"max_residual_half", max_residual_half}, {"ratio", ratio},
            {"tol", tol}, {"passed", passed}, {"worst_point", worst_point}};
  }
};

inline CrossCheckReport cross_check(const std::function<double(const Vec&)>& closed_form, const ChartMetric& m,
                                    const std::vector<Vec>& points, const Vec& h, double tol) {
  CrossCheckReport rep;
  rep.tol = tol;
  Vec h2 = h;
  for (auto& v : h2) v *= 0.5;
  for (const auto& p : points) {
    double exact = closed_form(p);
    double r1 = std::abs(fd_scalar_curvature(m, p, h) - exact);
    double r2 = std::abs(fd_scalar_curvature(m, p, h2) - exact);
    if (!(r1 <= rep.max_residual)) {
      rep.max_residual = r1;
      rep.worst_point = p;
    }
    rep.max_residual_half = std::max(rep.max_residual_half, r2);
  }
  rep.ratio = rep.max_residual_half > 0.0 ? rep.max_residual / rep.max_residual_half : 0.0;
  rep.passed = rep.max_residual <= tol;
  return rep;
}

}  // namespace psc::oracle
