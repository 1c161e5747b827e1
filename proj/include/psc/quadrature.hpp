#pragma once

#include <array>
#include <cmath>

namespace psc::quad {

namespace detail {
template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson with Richardson correction; absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-10, int max_depth = 48) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// 16-point Gauss-Legendre on [a, b].
template <class F>
double gauss_legendre(const F& f, double a, double b) {
  static constexpr std::array<double, 8> x = {
      0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
      0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
      0.9445750230732325760779884, 0.9894009349916499325961542};
  static constexpr std::array<double, 8> w = {
      0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
      0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
      0.0622535239386478928628438, 0.0271524594117540948517806};
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < 8; ++i) s += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
  return s * h;
}

// Gauss-Legendre with bisection until the two halves agree with the whole
// to tol or to roundoff.
template <class F>
double adaptive_gauss(const F& f, double a, double b, double tol, int depth = 20) {
  double whole = gauss_legendre(f, a, b);
  double m = 0.5 * (a + b);
  double left = gauss_legendre(f, a, m), right = gauss_legendre(f, m, b);
  double err = std::abs(left + right - whole);
  double scale = std::abs(left) + std::abs(right);
  if (depth <= 0 || err <= tol || err <= 1e-15 * scale) return left + right;
  return adaptive_gauss(f, a, m, 0.5 * tol, depth - 1) + adaptive_gauss(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace psc::quad
