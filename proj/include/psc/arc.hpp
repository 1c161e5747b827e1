// The unit-speed companion alpha of a warping function beta:
// alpha(r) = alpha0 - integral_0^r sqrt(1 - beta'(u)^2) du.
#pragma once

#include <cmath>

#include "psc/warp.hpp"

namespace psc {

inline NodePtr unit_speed_integrand(const NodePtr& beta) {
  NodePtr d = deriv(beta, 1);
  return sqrt(sum({constant(1.0), scale(-1.0, product(d, d))}));
}

// Throws when |beta'| > 1 anywhere on a uniform grid of [0, b].
inline void require_unit_speed_compatible(const WarpFunction& beta, int samples = 4096) {
  double b = beta.domain_end();
  for (int i = 0; i <= samples; ++i) {
    double r = b * i / samples;
    double d = beta.jet(r, 2).c[1];
    if (std::abs(d) > 1.0 + 1e-12)
      fail(ErrorKind::NotUnitSpeedCompatible, "|beta'| > 1 at r = " + std::to_string(r));
  }
}

// Horizontal extent integral_0^b sqrt(1 - beta'^2).
inline double horizontal_extent(const WarpFunction& beta) {
  NodePtr g = unit_speed_integrand(beta.tree());
  return quad::adaptive_simpson([&](double x) { return g->value(x); }, 0.0, beta.domain_end(), 1e-10);
}

inline NodePtr alpha_node(const WarpFunction& beta, double alpha0, int panels = 256) {
  NodePtr I = integral(unit_speed_integrand(beta.tree()), 0.0, 0.0, beta.domain_end(), panels);
  return sum({constant(alpha0), scale(-1.0, I)});
}

// alpha with its range centred on zero.
inline NodePtr centred_alpha_node(const WarpFunction& beta, int panels = 256) {
  return alpha_node(beta, 0.5 * horizontal_extent(beta), panels);
}

}  // namespace psc
