// Warping functions as combinator trees with exact Taylor-jet evaluation.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "psc/errors.hpp"
#include "psc/jet.hpp"
#include "psc/quadrature.hpp"

namespace psc {

using json = nlohmann::json;

// Public derivative order.
inline constexpr int K = 6;

struct Tolerances {
  double exclusion_frac = 1e-4;  // grids start at exclusion_frac * b
  double near_frac = 0.1;        // "near 0" / "near b" window width
  double equality = 1e-8;
  double floor = 1e-6;           // required min scalar curvature
  int grid = 2048;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t;
  return t;
}

class Node;
using NodePtr = std::shared_ptr<const Node>;

class Node {
 public:
  virtual ~Node() = default;
  // Jet of length n at r; n <= kMaxJet.
  virtual Jet eval(double r, int n) const = 0;
  virtual json to_json() const = 0;
  // Jet of length n of the k-th derivative at r.
  virtual Jet eval_derivative(double r, int n, int k) const {
    if (k == 0) return eval(r, n);
    if (n + k > kMaxJet) fail(ErrorKind::UnsupportedOrder, "derivative exceeds jet storage");
    return differentiate(eval(r, n + k), k, n);
  }
  double value(double r) const { return eval(r, 1).c[0]; }
};

NodePtr node_from_json(const json& j);

namespace nodes {

class Const final : public Node {
 public:
  explicit Const(double v) : v_(v) {}
  Jet eval(double, int n) const override { return Jet::constant(v_, n); }
  json to_json() const override { return {{"kind", "const"}, {"value", v_}}; }

 private:
  double v_;
};

// slope * r + intercept
class Linear final : public Node {
 public:
  Linear(double slope, double intercept) : a_(slope), b_(intercept) {}
  Jet eval(double r, int n) const override {
    Jet j(n);
    j.c[0] = a_ * r + b_;
    if (n > 1) j.c[1] = a_;
    return j;
  }
  json to_json() const override { return {{"kind", "linear"}, {"slope", a_}, {"intercept", b_}}; }

 private:
  double a_, b_;
};

// delta * sin(r / delta)
class SinCap final : public Node {
 public:
  explicit SinCap(double delta) : d_(delta) {}
  Jet eval(double r, int n) const override {
    Jet x = (1.0 / d_) * Jet::variable(r, n);
    return d_ * sin(x);
  }
  json to_json() const override { return {{"kind", "sincap"}, {"delta", d_}}; }

 private:
  double d_;
};

// S((r - x0) / width)
class Step final : public Node {
 public:
  Step(double x0, double width) : x0_(x0), w_(width) {}
  Jet eval(double r, int n) const override {
    Jet x = (1.0 / w_) * Jet::variable(r - x0_, n);
    return smoothstep(x);
  }
  json to_json() const override { return {{"kind", "smoothstep"}, {"x0", x0_}, {"width", w_}}; }

 private:
  double x0_, w_;
};

class Sum final : public Node {
 public:
  explicit Sum(std::vector<NodePtr> terms) : t_(std::move(terms)) {}
  Jet eval(double r, int n) const override {
    Jet acc(n);
    for (const auto& t : t_) acc = acc + t->eval(r, n);
    return acc;
  }
  Jet eval_derivative(double r, int n, int k) const override {
    Jet acc(n);
    for (const auto& t : t_) acc = acc + t->eval_derivative(r, n, k);
    return acc;
  }
  json to_json() const override {
    json a = json::array();
    for (const auto& t : t_) a.push_back(t->to_json());
    return {{"kind", "sum"}, {"terms", a}};
  }

 private:
  std::vector<NodePtr> t_;
};

class Product final : public Node {
 public:
  Product(NodePtr f, NodePtr g) : f_(std::move(f)), g_(std::move(g)) {}
  Jet eval(double r, int n) const override { return f_->eval(r, n) * g_->eval(r, n); }
  json to_json() const override {
    return {{"kind", "product"}, {"f", f_->to_json()}, {"g", g_->to_json()}};
  }

 private:
  NodePtr f_, g_;
};

class Scale final : public Node {
 public:
  Scale(double s, NodePtr f) : s_(s), f_(std::move(f)) {}
  Jet eval(double r, int n) const override { return s_ * f_->eval(r, n); }
  Jet eval_derivative(double r, int n, int k) const override { return s_ * f_->eval_derivative(r, n, k); }
  json to_json() const override { return {{"kind", "scale"}, {"factor", s_}, {"f", f_->to_json()}}; }

 private:
  double s_;
  NodePtr f_;
};

// f(a * r + b)
class Affine final : public Node {
 public:
  Affine(double a, double b, NodePtr f) : a_(a), b_(b), f_(std::move(f)) {}
  Jet eval(double r, int n) const override {
    Jet j = f_->eval(a_ * r + b_, n);
    double p = 1.0;
    for (int k = 1; k < n; ++k) {
      p *= a_;
      j.c[k] *= p;
    }
    return j;
  }
  json to_json() const override {
    return {{"kind", "affine"}, {"a", a_}, {"b", b_}, {"f", f_->to_json()}};
  }

 private:
  double a_, b_;
  NodePtr f_;
};

// outer(inner(r))
class Compose final : public Node {
 public:
  Compose(NodePtr outer, NodePtr inner) : o_(std::move(outer)), i_(std::move(inner)) {}
  Jet eval(double r, int n) const override {
    Jet in = i_->eval(r, n);
    return psc::compose(o_->eval(in.c[0], n), in);
  }
  json to_json() const override {
    return {{"kind", "compose"}, {"outer", o_->to_json()}, {"inner", i_->to_json()}};
  }

 private:
  NodePtr o_, i_;
};

// (1 - S) * left + S * right, S = S((r - x0) / width)
class Glue final : public Node {
 public:
  Glue(NodePtr left, NodePtr right, double x0, double width)
      : l_(std::move(left)), r_(std::move(right)), x0_(x0), w_(width) {}
  Jet eval(double r, int n) const override {
    double x = (r - x0_) / w_;
    if (x <= 0.0) return l_->eval(r, n);
    if (x >= 1.0) return r_->eval(r, n);
    Jet s = smoothstep((1.0 / w_) * Jet::variable(r - x0_, n));
    Jet a = l_->eval(r, n);
    return a + s * (r_->eval(r, n) - a);
  }
  json to_json() const override {
    return {{"kind", "glue"}, {"left", l_->to_json()}, {"right", r_->to_json()},
            {"x0", x0_}, {"width", w_}};
  }

 private:
  NodePtr l_, r_;
  double x0_, w_;
};

class Sqrt final : public Node {
 public:
  explicit Sqrt(NodePtr f) : f_(std::move(f)) {}
  Jet eval(double r, int n) const override { return psc::sqrt(f_->eval(r, n)); }
  json to_json() const override { return {{"kind", "sqrt"}, {"f", f_->to_json()}}; }

 private:
  NodePtr f_;
};

// k-th derivative of f
class Deriv final : public Node {
 public:
  Deriv(NodePtr f, int k) : f_(std::move(f)), k_(k) {}
  Jet eval(double r, int n) const override {
    return f_->eval_derivative(r, n, k_);
  }
  Jet eval_derivative(double r, int n, int k) const override { return f_->eval_derivative(r, n, k_ + k); }
  json to_json() const override { return {{"kind", "deriv"}, {"f", f_->to_json()}, {"k", k_}}; }

 private:
  NodePtr f_;
  int k_;
};

// F(r) = fa + integral_a^r f, tabulated at construction on [a, hi].
class Integral final : public Node {
 public:
  Integral(NodePtr f, double a, double fa, double hi, int panels)
      : f_(std::move(f)), a_(a), fa_(fa), hi_(hi), panels_(panels) {
    if (!(hi_ > a_) || panels_ < 1) fail(ErrorKind::Construction, "integral table needs hi > a");
    h_ = (hi_ - a_) / panels_;
    table_.resize(panels_ + 1);
    table_[0] = fa_;
    auto g = [this](double x) { return f_->value(x); };
    for (int i = 0; i < panels_; ++i) {
      double x0 = a_ + i * h_, x1 = (i + 1 == panels_) ? hi_ : a_ + (i + 1) * h_;
      table_[i + 1] = table_[i] + quad::adaptive_gauss(g, x0, x1, 1e-13 * (x1 - x0), 8);
    }
  }
  Jet eval(double r, int n) const override {
    Jet out(n);
    out.c[0] = value_at(r);
    if (n > 1) {
      Jet d = f_->eval(r, n - 1);
      for (int k = 1; k < n; ++k) out.c[k] = d.c[k - 1] / k;
    }
    return out;
  }
  Jet eval_derivative(double r, int n, int k) const override {
    if (k == 0) return eval(r, n);
    return f_->eval_derivative(r, n, k - 1);
  }
  json to_json() const override {
    return {{"kind", "integral"}, {"f", f_->to_json()}, {"a", a_}, {"fa", fa_},
            {"hi", hi_}, {"panels", panels_}};
  }

 private:
  double value_at(double r) const {
    double t = (r - a_) / h_;
    int i = static_cast<int>(std::lround(t));
    i = std::clamp(i, 0, panels_);
    double x0 = (i == panels_) ? hi_ : a_ + i * h_;
    double acc = table_[i];
    auto g = [this](double x) { return f_->value(x); };
    double dist = r - x0;
    int chunks = std::max(1, static_cast<int>(std::ceil(std::abs(dist) / h_ - 1e-9)));
    double step = dist / chunks;
    for (int c = 0; c < chunks; ++c) acc += quad::gauss_legendre(g, x0 + c * step, x0 + (c + 1) * step);
    return acc;
  }

  NodePtr f_;
  double a_, fa_, hi_;
  int panels_;
  double h_;
  std::vector<double> table_;
};

// Inverse of a strictly increasing f restricted to [lo, hi].
class Inverse final : public Node {
 public:
  Inverse(NodePtr f, double lo, double hi) : f_(std::move(f)), lo_(lo), hi_(hi) {
    flo_ = f_->value(lo_);
    fhi_ = f_->value(hi_);
    if (!(fhi_ > flo_)) fail(ErrorKind::Inversion, "inverse requires an increasing function");
  }
  Jet eval(double y, int n) const override {
    double x = solve(y);
    Jet fj = f_->eval(x, n);
    if (n > 1 && !(fj.c[1] > 0.0)) fail(ErrorKind::Inversion, "zero derivative at inversion point");
    Jet g = revert(fj);
    g.c[0] = x;
    return g;
  }
  json to_json() const override {
    return {{"kind", "inverse"}, {"f", f_->to_json()}, {"lo", lo_}, {"hi", hi_}};
  }

 private:
  double solve(double y) const {
    double tol = 1e-12 * (fhi_ - flo_);
    if (y < flo_ - tol || y > fhi_ + tol) fail(ErrorKind::Range, "inverse evaluated outside image");
    if (y <= flo_) return lo_;
    if (y >= fhi_) return hi_;
    double a = lo_, b = hi_;
    double x = lo_ + (y - flo_) / (fhi_ - flo_) * (hi_ - lo_);
    for (int it = 0; it < 200; ++it) {
      Jet j = f_->eval(x, 2);
      double v = j.c[0] - y;
      if (v == 0.0) return x;
      if (v < 0.0) a = x; else b = x;
      double nx = (j.c[1] > 0.0) ? x - v / j.c[1] : 0.5 * (a + b);
      if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
      if (std::abs(nx - x) <= 1e-15 * std::max(1.0, std::abs(x)) || b - a <= 1e-15 * std::max(1.0, std::abs(x))) return nx;
      x = nx;
    }
    return x;
  }

  NodePtr f_;
  double lo_, hi_, flo_, fhi_;
};

// f(r) for r <= xc, constant f(xc) beyond; smooth when xc is a horizontal point of f.
class Hold final : public Node {
 public:
  Hold(NodePtr f, double xc) : f_(std::move(f)), xc_(xc) {}
  Jet eval(double r, int n) const override {
    if (r <= xc_) return f_->eval(r, n);
    return Jet::constant(f_->value(xc_), n);
  }
  json to_json() const override { return {{"kind", "hold"}, {"f", f_->to_json()}, {"xc", xc_}}; }

 private:
  NodePtr f_;
  double xc_;
};

// f on [lo, hi]; beyond either end, the Taylor polynomial of f at that end
// truncated to kMaxJet terms.  Exact when f is such a polynomial out there.
class Extend final : public Node {
 public:
  Extend(NodePtr f, double lo, double hi)
      : f_(std::move(f)), lo_(lo), hi_(hi), jlo_(f_->eval(lo, kMaxJet)), jhi_(f_->eval(hi, kMaxJet)) {}
  Jet eval(double r, int n) const override {
    if (r < lo_) return poly(jlo_, r - lo_, n);
    if (r > hi_) return poly(jhi_, r - hi_, n);
    return f_->eval(r, n);
  }
  Jet eval_derivative(double r, int n, int k) const override {
    if (r >= lo_ && r <= hi_) return f_->eval_derivative(r, n, k);
    return Node::eval_derivative(r, n, k);
  }
  json to_json() const override {
    return {{"kind", "extend"}, {"f", f_->to_json()}, {"lo", lo_}, {"hi", hi_}};
  }

 private:
  static Jet poly(const Jet& p, double d, int n) {
    Jet x = Jet::variable(d, n);
    Jet res = Jet::constant(p.c[p.n - 1], n);
    for (int k = p.n - 2; k >= 0; --k) {
      res = res * x;
      res.c[0] += p.c[k];
    }
    return res;
  }

  NodePtr f_;
  double lo_, hi_;
  Jet jlo_, jhi_;
};

}  // namespace nodes

// Builders.
inline NodePtr constant(double v) { return std::make_shared<nodes::Const>(v); }
inline NodePtr linear(double slope, double intercept = 0.0) {
  return std::make_shared<nodes::Linear>(slope, intercept);
}
inline NodePtr identity() { return linear(1.0, 0.0); }
inline NodePtr sincap(double delta) { return std::make_shared<nodes::SinCap>(delta); }
inline NodePtr step(double x0, double width) { return std::make_shared<nodes::Step>(x0, width); }
inline NodePtr sum(std::vector<NodePtr> terms) { return std::make_shared<nodes::Sum>(std::move(terms)); }
inline NodePtr product(NodePtr f, NodePtr g) {
  return std::make_shared<nodes::Product>(std::move(f), std::move(g));
}
inline NodePtr scale(double s, NodePtr f) { return std::make_shared<nodes::Scale>(s, std::move(f)); }
inline NodePtr affine(double a, double b, NodePtr f) {
  return std::make_shared<nodes::Affine>(a, b, std::move(f));
}
inline NodePtr shift(double s, NodePtr f) { return affine(1.0, -s, std::move(f)); }
inline NodePtr compose(NodePtr outer, NodePtr inner) {
  return std::make_shared<nodes::Compose>(std::move(outer), std::move(inner));
}
inline NodePtr glue(NodePtr left, NodePtr right, double x0, double width) {
  return std::make_shared<nodes::Glue>(std::move(left), std::move(right), x0, width);
}
inline NodePtr sqrt(NodePtr f) { return std::make_shared<nodes::Sqrt>(std::move(f)); }
inline NodePtr deriv(NodePtr f, int k) { return std::make_shared<nodes::Deriv>(std::move(f), k); }
inline NodePtr integral(NodePtr f, double a, double fa, double hi, int panels = 256) {
  return std::make_shared<nodes::Integral>(std::move(f), a, fa, hi, panels);
}
inline NodePtr inverse(NodePtr f, double lo, double hi) {
  return std::make_shared<nodes::Inverse>(std::move(f), lo, hi);
}
inline NodePtr hold(NodePtr f, double xc) { return std::make_shared<nodes::Hold>(std::move(f), xc); }
inline NodePtr extend(NodePtr f, double lo, double hi) {
  return std::make_shared<nodes::Extend>(std::move(f), lo, hi);
}
inline NodePtr difference(NodePtr f, NodePtr g) { return sum({std::move(f), scale(-1.0, std::move(g))}); }

inline NodePtr node_from_json(const json& j) {
  const std::string k = j.at("kind").get<std::string>();
  if (k == "const") return constant(j.at("value").get<double>());
  if (k == "linear") return linear(j.at("slope").get<double>(), j.at("intercept").get<double>());
  if (k == "sincap") return sincap(j.at("delta").get<double>());
  if (k == "smoothstep") return step(j.at("x0").get<double>(), j.at("width").get<double>());
  if (k == "sum") {
    std::vector<NodePtr> t;
    for (const auto& e : j.at("terms")) t.push_back(node_from_json(e));
    return sum(std::move(t));
  }
  if (k == "product") return product(node_from_json(j.at("f")), node_from_json(j.at("g")));
  if (k == "scale") return scale(j.at("factor").get<double>(), node_from_json(j.at("f")));
  if (k == "affine")
    return affine(j.at("a").get<double>(), j.at("b").get<double>(), node_from_json(j.at("f")));
  if (k == "compose") return compose(node_from_json(j.at("outer")), node_from_json(j.at("inner")));
  if (k == "glue")
    return glue(node_from_json(j.at("left")), node_from_json(j.at("right")), j.at("x0").get<double>(),
                j.at("width").get<double>());
  if (k == "sqrt") return sqrt(node_from_json(j.at("f")));
  if (k == "deriv") return deriv(node_from_json(j.at("f")), j.at("k").get<int>());
  if (k == "integral")
    return integral(node_from_json(j.at("f")), j.at("a").get<double>(), j.at("fa").get<double>(),
                    j.at("hi").get<double>(), j.at("panels").get<int>());
  if (k == "inverse")
    return inverse(node_from_json(j.at("f")), j.at("lo").get<double>(), j.at("hi").get<double>());
  if (k == "hold") return hold(node_from_json(j.at("f")), j.at("xc").get<double>());
  if (k == "extend")
    return extend(node_from_json(j.at("f")), j.at("lo").get<double>(), j.at("hi").get<double>());
  fail(ErrorKind::Spec, "unknown node kind '" + k + "'");
}

using JetVector = std::vector<double>;  // entries x_0..x_K

class WarpFunction {
 public:
  WarpFunction() = default;
  WarpFunction(NodePtr tree, double domain_end) : tree_(std::move(tree)), b_(domain_end) {
    if (!tree_) fail(ErrorKind::Construction, "empty warp tree");
    if (!(b_ > 0.0)) fail(ErrorKind::Range, "domain_end must be positive");
  }

  double domain_end() const { return b_; }
  const NodePtr& tree() const { return tree_; }

  double eval(double r, int order = 0) const {
    check_point(r);
    if (order < 0 || order > K) fail(ErrorKind::UnsupportedOrder, "order " + std::to_string(order));
    return tree_->eval(r, order + 1).derivative(order);
  }
  double operator()(double r) const { return eval(r, 0); }

  // Unchecked jet of length n.
  Jet jet(double r, int n) const { return tree_->eval(r, n); }

  JetVector jet_at(double t0) const {
    check_point(t0);
    Jet j = tree_->eval(t0, K + 1);
    JetVector v(K + 1);
    for (int k = 0; k <= K; ++k) v[k] = j.derivative(k);
    return v;
  }
  JetVector jet_at_end() const { return jet_at(b_); }

  json to_json() const { return {{"domain_end", b_}, {"tree", tree_->to_json()}}; }
  static WarpFunction from_json(const json& j) {
    return WarpFunction(node_from_json(j.at("tree")), j.at("domain_end").get<double>());
  }

 private:
  void check_point(double r) const {
    double slack = 1e-12 * b_;
    if (!(r >= -slack && r <= b_ + slack)) fail(ErrorKind::Range, "r outside [0, b]");
  }

  NodePtr tree_;
  double b_ = 1.0;
};

inline double eval(const WarpFunction& w, double r, int order) { return w.eval(r, order); }
inline JetVector jet_at(const WarpFunction& w, double t0) { return w.jet_at(t0); }

// Indices shifted so that x_0 carries weight 1.
inline double jet_distance(const JetVector& a, const JetVector& b) {
  double d = 0.0;
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) d = std::max(d, std::min(std::abs(a[i] - b[i]), 1.0) / double(i + 1));
  return d;
}

inline WarpFunction rescale_domain(const WarpFunction& w, double new_end) {
  double a = w.domain_end() / new_end;
  return WarpFunction(affine(a, 0.0, w.tree()), new_end);
}
inline WarpFunction rescale_to_unit(const WarpFunction& w) { return rescale_domain(w, 1.0); }

// omega(s) = beta(r(s)) with s(r) = integral_0^r alpha.
inline WarpFunction arc_length_reparam(const NodePtr& alpha, const NodePtr& beta, double rho,
                                       int panels = 256) {
  for (int i = 0; i <= 1024; ++i) {
    double r = rho * i / 1024.0;
    if (!(alpha->value(r) > 0.0)) fail(ErrorKind::InvalidMetric, "alpha must be positive on [0, rho]");
  }
  NodePtr s = integral(alpha, 0.0, 0.0, rho, panels);
  double len = s->value(rho);
  return WarpFunction(compose(beta, inverse(s, 0.0, rho)), len);
}

}  // namespace psc
