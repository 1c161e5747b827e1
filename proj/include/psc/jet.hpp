// Truncated Taylor series arithmetic.
//
// A Jet of length n holds c[0..n-1] with c[k] = f^(k)(x0) / k!.  All
// operations truncate at the shorter operand; derivatives recovered with
// derivative(k) are exact up to floating-point roundoff.
#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <limits>

namespace psc {

inline constexpr int kMaxJet = 16;

struct Jet {
  int n = 1;
  std::array<double, kMaxJet> c{};

  Jet() = default;
  explicit Jet(int len) : n(len) { assert(len >= 1 && len <= kMaxJet); }

  static Jet constant(double v, int len) {
    Jet j(len);
    j.c[0] = v;
    return j;
  }
  // The identity x -> x expanded at x0.
  static Jet variable(double x0, int len) {
    Jet j(len);
    j.c[0] = x0;
    if (len > 1) j.c[1] = 1.0;
    return j;
  }

  double value() const { return c[0]; }

  double derivative(int k) const {
    if (k >= n) return 0.0;
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }

  Jet truncated(int len) const {
    Jet j(len);
    for (int i = 0; i < len && i < n; ++i) j.c[i] = c[i];
    return j;
  }
};

inline int jet_len(const Jet& a, const Jet& b) { return a.n < b.n ? a.n : b.n; }

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r(jet_len(a, b));
  for (int i = 0; i < r.n; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r(jet_len(a, b));
  for (int i = 0; i < r.n; ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}
inline Jet operator-(const Jet& a) {
  Jet r(a.n);
  for (int i = 0; i < r.n; ++i) r.c[i] = -a.c[i];
  return r;
}
inline Jet operator*(double s, const Jet& a) {
  Jet r(a.n);
  for (int i = 0; i < r.n; ++i) r.c[i] = s * a.c[i];
  return r;
}
inline Jet operator+(double s, const Jet& a) {
  Jet r = a;
  r.c[0] += s;
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r(jet_len(a, b));
  for (int k = 0; k < r.n; ++k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
    r.c[k] = s;
  }
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  Jet q(jet_len(a, b));
  for (int k = 0; k < q.n; ++k) {
    double s = a.c[k];
    for (int i = 1; i <= k; ++i) s -= b.c[i] * q.c[k - i];
    q.c[k] = s / b.c[0];
  }
  return q;
}

inline Jet exp(const Jet& a) {
  Jet e(a.n);
  e.c[0] = std::exp(a.c[0]);
  for (int k = 1; k < a.n; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += i * a.c[i] * e.c[k - i];
    e.c[k] = s / k;
  }
  return e;
}

inline void sincos(const Jet& a, Jet& s, Jet& co) {
  s = Jet(a.n);
  co = Jet(a.n);
  s.c[0] = std::sin(a.c[0]);
  co.c[0] = std::cos(a.c[0]);
  for (int k = 1; k < a.n; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int i = 1; i <= k; ++i) {
      ss += i * a.c[i] * co.c[k - i];
      cc += i * a.c[i] * s.c[k - i];
    }
    s.c[k] = ss / k;
    co.c[k] = -cc / k;
  }
}
inline Jet sin(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return s;
}
inline Jet cos(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return c;
}

// At a zero value the higher coefficients are finite only when the
// argument vanishes identically to the jet's order.
inline Jet sqrt(const Jet& a) {
  Jet r(a.n);
  if (a.c[0] <= 0.0) {
    bool flat = true;
    for (int i = 1; i < a.n; ++i) flat = flat && a.c[i] == 0.0;
    r.c[0] = a.c[0] == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i < a.n; ++i) r.c[i] = flat ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.c[0] = std::sqrt(a.c[0]);
  for (int k = 1; k < a.n; ++k) {
    double s = a.c[k];
    for (int i = 1; i < k; ++i) s -= r.c[i] * r.c[k - i];
    r.c[k] = s / (2.0 * r.c[0]);
  }
  return r;
}

// Series of outer(inner(x)) given outer's jet at inner(x0).
inline Jet compose(const Jet& outer, const Jet& inner) {
  int n = jet_len(outer, inner);
  Jet d = inner.truncated(n);
  d.c[0] = 0.0;
  Jet res = Jet::constant(outer.c[n - 1], n);
  for (int k = n - 2; k >= 0; --k) {
    res = res * d;
    res.c[0] += outer.c[k];
  }
  return res;
}

// Series of the inverse function g at y0 = f(x0), given f's jet at x0.
// Requires f'(x0) != 0.
inline Jet revert(const Jet& f) {
  int n = f.n;
  Jet g(n);
  g.c[0] = 0.0;
  if (n > 1) g.c[1] = 1.0 / f.c[1];
  for (int k = 2; k < n; ++k) {
    Jet h = compose(f, g);
    g.c[k] = -h.c[k] / f.c[1];
  }
  return g;  // caller sets c[0] to x0
}

// k-th derivative as a jet of length n, from a jet of length >= n+k.
inline Jet differentiate(const Jet& f, int k, int n) {
  Jet r(n);
  for (int j = 0; j < n; ++j) {
    double m = 1.0;
    for (int i = j + 1; i <= j + k; ++i) m *= i;
    r.c[j] = (j + k < f.n) ? f.c[j + k] * m : 0.0;
  }
  return r;
}

// exp(-1/x) for x > 0, extended by zero.
inline Jet bump_edge(const Jet& x) {
  constexpr double kCut = 1.0 / 600.0;
  if (x.c[0] <= kCut) return Jet(x.n);
  Jet inv = Jet::constant(1.0, x.n) / x;
  return exp(-inv);
}

// Smooth step: 0 for x <= 0, 1 for x >= 1, flat to all orders at both ends,
// S(x) + S(1-x) = 1.
inline Jet smoothstep(const Jet& x) {
  if (x.c[0] <= 0.0) return Jet(x.n);
  if (x.c[0] >= 1.0) return Jet::constant(1.0, x.n);
  Jet a = bump_edge(x);
  Jet b = bump_edge(1.0 + (-1.0) * x);
  return a / (a + b);
}

inline double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double a = x > 1.0 / 600.0 ? std::exp(-1.0 / x) : 0.0;
  double y = 1.0 - x;
  double b = y > 1.0 / 600.0 ? std::exp(-1.0 / y) : 0.0;
  return a / (a + b);
}

}  // namespace psc
