// psc_forge: build, certify, deform and bend rotationally symmetric psc metrics.
//
// Exit status: 0 all requested certificates pass, 1 a certificate fails,
// 2 the input does not parse or violates its schema, 3 anything else.

#include <cstdlib>
#include <iostream>
#include <random>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "psc/bend.hpp"
#include "psc/curves.hpp"
#include "psc/deform.hpp"
#include "psc/io.hpp"
#include "psc/torpedo.hpp"

namespace {

using psc::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CertificationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string metric, iso, spec, out, csv;
  int n = 0;
  int grid = 0;
  double tol = 0.0;
  uint64_t seed = 1;
  int threads = 0;
  int points = 50;
  double h = 1e-3;
  double delta = 1.0, b = 0.0, c = 0.0, l1 = 1.0, l2 = 1.0;
};

json load(const std::string& path, const char* flag) {
  if (path.empty()) throw InputError(std::string("missing ") + flag);
  std::string text = psc::io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("parse error in " + path + " at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

template <class F>
auto schema(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InputError("schema error in " + path + ": " + e.what());
  }
}

// Writes the report (stdout when no path) and the optional CSV; throws when !passed.
void emit(const Options& o, const json& report, bool passed, const psc::io::Csv* csv = nullptr) {
  std::string text = psc::io::dump(report);
  if (o.out.empty())
    std::cout << text;
  else
    psc::io::write_atomic(o.out, text);
  if (csv && !o.csv.empty()) psc::io::write_atomic(o.csv, csv->text());
  spdlog::info("report written to {}", o.out.empty() ? "stdout" : o.out);
  if (!passed) throw CertificationFailed("certificate failed; report: " + (o.out.empty() ? std::string("stdout") : o.out));
}

psc::Tolerances tolerances(const Options& o) {
  psc::Tolerances t = psc::default_tolerances();
  if (o.grid > 0) t.grid = o.grid;
  if (o.tol > 0.0) t.floor = o.tol;
  return t;
}

// Accepts a metric descriptor or a bare warping function; --n overrides the dimension.
psc::RotSymMetric load_metric(const Options& o) {
  json j = load(o.metric, "--metric");
  return schema(o.metric, [&] {
    if (j.contains("kind")) {
      psc::RotSymMetric m = psc::RotSymMetric::from_json(j);
      if (o.n > 0) m.sphere_dim = o.n - 1;
      return m;
    }
    if (o.n <= 0) throw InputError("--n is required for a bare warping function");
    return psc::RotSymMetric::single(psc::WarpFunction::from_json(j), o.n);
  });
}

psc::WarpFunction load_warp(const Options& o) {
  json j = load(o.metric, "--metric");
  return schema(o.metric, [&] {
    if (j.contains("kind")) return psc::RotSymMetric::from_json(j).beta;
    return psc::WarpFunction::from_json(j);
  });
}

int dimension(const Options& o, int fallback) { return o.n > 0 ? o.n : fallback; }

// ---- build ----

void build(const Options& o, const std::string& kind) {
  int n = dimension(o, 4);
  double b = o.b > 0.0 ? o.b : psc::perfect_neck_start(o.delta) + 1.0;
  if (kind == "torpedo" || kind == "double-torpedo") {
    psc::WarpFunction eta = psc::perfect_torpedo(o.delta, b);
    psc::WarpFunction w = kind == "torpedo" ? eta : psc::double_torpedo(eta, n);
    psc::io::Csv csv = psc::io::torpedo_curve_csv(psc::torpedo_curve(eta));
    emit(o, psc::RotSymMetric::single(w, n).to_json(), true, &csv);
  } else if (kind == "bent-cylinder") {
    psc::WarpFunction eta = psc::perfect_torpedo(o.delta, b);
    double c = o.c > 0.0 ? o.c : 2.2 * o.delta;
    emit(o, psc::bent_cylinder_metric(eta, c, n).to_json(), true);
  } else if (kind == "boot") {
    psc::BootSpec s;
    if (!o.spec.empty()) {
      json j = load(o.spec, "--spec");
      s = schema(o.spec, [&] { return psc::BootSpec::from_json(j); });
    } else {
      s.delta = o.delta;
      s.l1 = o.l1;
      s.l2 = o.l2;
      s.c = o.c;
      s.n = dimension(o, 5);
    }
    psc::BootGrid g;
    if (o.grid > 0) g.r = g.y = o.grid;
    psc::BootAssembly a = psc::boot_metric(s, g);
    psc::io::Csv csv = psc::io::boot_trace_csv(a);
    emit(o, a.spec.to_json(), true, &csv);
  } else if (kind == "step") {
    json j = load(o.spec, "--spec");
    psc::StepSpec s = schema(o.spec, [&] { return psc::StepSpec::from_json(j); });
    s = psc::resolve_step_spec(s);
    psc::validate_step_spec(s);
    emit(o, s.to_json(), true);
  } else {
    throw InputError("unknown build kind '" + kind + "'");
  }
}

// ---- certify ----

void certify(const Options& o) {
  psc::RotSymMetric m = load_metric(o);
  psc::Tolerances tol = tolerances(o);
  psc::PositivityCertificate cert = psc::certify_positive(m, tol);
  emit(o, {{"metric", m.to_json()}, {"certificate", cert.to_json()}}, cert.passed);
}

// ---- deform ----

void deform(const Options& o, const std::string& what) {
  if (what == "concordance") {
    json j = load(o.iso, "--iso");
    psc::WarpIsotopy iso = schema(o.iso, [&] { return psc::WarpIsotopy::from_json(j); });
    psc::ConcordanceOptions opt;
    if (o.grid > 0) opt.r_points = opt.t_points = o.grid;
    if (o.tol > 0.0) opt.floor = o.tol;
    psc::ConcordanceResult res = psc::concordance_from_isotopy(iso, opt);
    json margins = json::array();
    for (const auto& s : res.slices) margins.push_back(s.margin);
    json report = {{"isotopy", iso.to_json()}, {"lambda_star", res.lambda_star}, {"slice_margins", margins},
                   {"grid", res.certificate.to_json()["grid"]}, {"result", res.to_json()}};
    psc::io::Csv csv{{"u", "r", "beta"}, {}};
    for (int i = 0; i <= 10; ++i)
      for (int k = 0; k <= 64; ++k) {
        double u = i / 10.0, r = iso.domain_end * k / 64.0;
        csv.add({psc::io::number(u), psc::io::number(r), psc::io::number(iso.value(u, r))});
      }
    emit(o, report, res.certificate.passed, &csv);
  } else if (what == "standardize") {
    psc::WarpFunction omega = load_warp(o);
    psc::StandardizeOptions opt;
    opt.seed = o.seed;
    psc::StandardizeResult res = psc::standardize_to_torpedo(omega, dimension(o, 3), opt, tolerances(o));
    emit(o, res.to_json(), res.passed());
  } else {
    throw InputError("unknown deform procedure '" + what + "'");
  }
}

// ---- bend ----

void bend(const Options& o, const std::string& what) {
  if (what == "radius") {
    psc::WarpFunction beta = load_warp(o);
    psc::BendRadius r = psc::min_bend_radius(beta, dimension(o, 4), tolerances(o));
    emit(o, r.to_json(), r.certificate.passed);
  } else if (what == "family") {
    json j = load(o.spec, "--spec");
    psc::BendFamily f = schema(o.spec, [&] {
      std::string kind = j.value("kind", std::string("round"));
      double delta = j.value("delta", 1.0), L = j.value("L", 1.0);
      int n = j.value("n", 4);
      if (kind == "round") return psc::round_bend_family(delta, n, j.at("c").get<double>(), L);
      if (kind == "torpedo") {
        psc::WarpFunction eta = psc::boot_torpedo(delta, j.value("neck", 1.0));
        double c = j.value("c", 0.0);
        if (c <= 0.0) c = psc::default_bend_radius(eta, n, L);
        return psc::torpedo_bend_family(eta, n, c, L);
      }
      throw InputError("unknown bend family '" + kind + "'");
    });
    psc::BendGrid g;
    if (o.grid > 0) g.r = o.grid;
    psc::BendFamilyCertificate cert = psc::bend_family_certificate(f, g);
    emit(o, {{"family", f.to_json()}, {"certificate", cert.to_json()}}, cert.geometric.passed);
  } else if (what == "boot") {
    json j = load(o.spec, "--spec");
    psc::BootSpec s = schema(o.spec, [&] { return psc::BootSpec::from_json(j); });
    psc::BootGrid g;
    if (o.grid > 0) g.r = g.y = o.grid;
    psc::BootAssembly a = psc::boot_metric(s, g);
    psc::io::Csv csv = psc::io::boot_trace_csv(a);
    emit(o, a.to_json(), a.passed(), &csv);
  } else if (what == "step") {
    json j = load(o.spec, "--spec");
    psc::StepSpec s = schema(o.spec, [&] { return psc::StepSpec::from_json(j); });
    psc::BootGrid g;
    if (o.grid > 0) g.r = g.y = o.grid;
    psc::StepMetric m = psc::step_metric(s, g);
    psc::StepRetract r = psc::step_retract(m.spec, 4, g);
    bool ok = m.passed() && r.all_certified && r.final_sup_difference <= 1e-8;
    psc::io::Csv csv = psc::io::step_profile_csv(m);
    emit(o, {{"metric", m.to_json()}, {"retract", r.to_json()}}, ok, &csv);
  } else {
    throw InputError("unknown bend construction '" + what + "'");
  }
}

// ---- oracle-check ----

void oracle_check(const Options& o) {
  psc::RotSymMetric m = load_metric(o);
  int n = m.sphere_dim + 1;
  double b = m.beta.domain_end();
  std::mt19937_64 gen(o.seed);
  std::vector<psc::oracle::Vec> pts;
  int q = n - 1;
  for (int i = 0; i < o.points; ++i) {
    double r = b * (0.2 + 0.6 * psc::unit_uniform(gen));  // away from the axis, where FD error grows like h^2 / r^4
    psc::oracle::Vec p = psc::oracle::with_equator({r}, q);
    if (m.kind == psc::RotSymMetric::Kind::DoublyWarped) p.push_back(0.0);
    pts.push_back(p);
  }
  auto beta = [m](double r) { return m.beta.jet(r, 1).c[0]; };
  psc::oracle::ChartMetric chart =
      m.kind == psc::RotSymMetric::Kind::SingleWarped
          ? psc::oracle::single_warped_chart(beta, n, 0.0, b)
          : psc::oracle::doubly_warped_chart(beta, [m](double r) { return m.psi->value(r); }, n, 0.0, b);
  double tol = o.tol > 0.0 ? o.tol : 1e-4;
  auto rep = psc::oracle::cross_check([&](const psc::oracle::Vec& x) { return m.R(x[0]); }, chart, pts,
                                      psc::oracle::Vec(chart.dim, o.h), tol);
  emit(o, {{"metric", m.to_json()}, {"seed", o.seed}, {"points", o.points}, {"h", o.h}, {"report", rep.to_json()}},
       rep.passed);
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("psc_forge");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("PSC_FORGE_LOG");
  std::string level = env ? env : "error";
  auto lv = spdlog::level::from_str(level);
  if (lv == spdlog::level::off && level != "off") lv = spdlog::level::err;
  spdlog::set_level(lv);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  Options o;
  std::string kind;
  CLI::App app{"Construct and certify rotationally symmetric positive scalar curvature metrics"};
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "worker threads (0: machine parallelism)");
  app.add_option("--seed", o.seed, "seed for randomized checks");

  auto common = [&](CLI::App* s) {
    s->add_option("--out", o.out, "report path (default stdout)");
    s->add_option("--csv", o.csv, "CSV profile path");
    s->add_option("--n", o.n, "total dimension");
    s->add_option("--grid", o.grid, "grid point count");
    s->add_option("--tol", o.tol, "curvature floor or residual tolerance");
    s->add_option("--seed", o.seed, "seed for randomized checks");
    s->add_option("--threads", o.threads, "worker threads (0: machine parallelism)");
  };

  CLI::App* b = app.add_subcommand("build", "emit a metric descriptor");
  b->add_option("kind", kind, "torpedo | double-torpedo | bent-cylinder | boot | step")->required();
  b->add_option("--delta", o.delta, "torpedo radius");
  b->add_option("--b", o.b, "domain end");
  b->add_option("--c", o.c, "bend radius");
  b->add_option("--l1", o.l1, "toe neck length");
  b->add_option("--l2", o.l2, "boundary cylinder length");
  b->add_option("--spec", o.spec, "descriptor path");
  common(b);

  CLI::App* c = app.add_subcommand("certify", "certify positive scalar curvature of a metric");
  c->add_option("--metric", o.metric, "metric or warping-function descriptor")->required();
  common(c);

  CLI::App* d = app.add_subcommand("deform", "run a deformation procedure");
  d->add_option("procedure", kind, "concordance | standardize")->required();
  d->add_option("--iso", o.iso, "isotopy descriptor");
  d->add_option("--metric", o.metric, "warping-function descriptor");
  common(d);

  CLI::App* e = app.add_subcommand("bend", "bending constructions");
  e->add_option("construction", kind, "radius | family | boot | step")->required();
  e->add_option("--metric", o.metric, "warping-function descriptor");
  e->add_option("--spec", o.spec, "descriptor path");
  common(e);

  CLI::App* f = app.add_subcommand("oracle-check", "closed form against the finite-difference oracle");
  f->add_option("--metric", o.metric, "metric descriptor")->required();
  f->add_option("--points", o.points, "random interior points");
  f->add_option("--fd-step", o.h, "finite-difference step");
  common(f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "argument error: " << ex.what() << "\n";
    return 2;
  }

  try {
    psc::set_threads(o.threads);
    if (b->parsed()) build(o, kind);
    else if (c->parsed()) certify(o);
    else if (d->parsed()) deform(o, kind);
    else if (e->parsed()) bend(o, kind);
    else oracle_check(o);
    return 0;
  } catch (const CertificationFailed& ex) {
    std::cerr << ex.what() << "\n";
    return 1;
  } catch (const InputError& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  } catch (const psc::Error& ex) {
    std::cerr << ex.what() << "\n";
    if (ex.kind() == psc::ErrorKind::Spec) return 2;
    if (ex.kind() == psc::ErrorKind::NoCertificate) return 1;
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "internal error: " << ex.what() << "\n";
    return 3;
  }
}
