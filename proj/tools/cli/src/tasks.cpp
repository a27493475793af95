#include "lyapcli/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include <fmt/format.h>

#include "lyap/grid.hpp"
#include "lyap/krawczyk.hpp"
#include "lyap/lyapunov_flow.hpp"
#include "lyap/lyapunov_map.hpp"
#include "lyap/periodic.hpp"
#include "lyap/poincare.hpp"
#include "lyapcli/equilibria.hpp"
#include "lyapcli/render.hpp"
#include "lyapcli/verdicts.hpp"

namespace lyapcli {

using json = nlohmann::json;

json to_json(const lyap::Interval& x) { return json::array({x.lo(), x.hi()}); }

json to_json(const lyap::IntervalVector& x) {
  json a = json::array();
  for (std::size_t i = 0; i < x.size(); ++i) a.push_back(to_json(x[i]));
  return a;
}

json to_json(const lyap::IntervalMatrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    a.push_back(row);
  }
  return a;
}

json to_json(const lyap::Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

json to_json(const lyap::Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

lyap::Vec vec_from_json(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<lyap::Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

lyap::Mat mat_from_json(const json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto m = n ? static_cast<Eigen::Index>(j[0].size()) : 0;
  lyap::Mat out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != m) throw lyap::UsageError("matrix rows differ in length");
    for (Eigen::Index k = 0; k < m; ++k) out(i, k) = j[i][k].get<double>();
  }
  return out;
}

lyap::ParamMap merged_parameters(const std::string& system, const lyap::ParamMap& overrides) {
  lyap::ParamMap p = lyap::default_parameters(system);
  for (const auto& [k, v] : overrides) p[k] = v;
  return p;
}

namespace {

struct Env {
  const RunConfig& cfg;
  const RunContext& ctx;
  RunReport report;

  void log(const std::string& msg) const {
    if (ctx.log) ctx.log(msg);
    else std::cerr << msg << '\n';
  }

  std::filesystem::path emit(const std::string& name, const std::string& fallback, const std::string& content) {
    auto path = ctx.out_dir / (name.empty() ? fallback : name);
    write_file(path.string(), content);
    report.artifacts.push_back(path);
    return path;
  }
};

json header(const RunConfig& cfg, const RunContext& ctx) {
  json j;
  j["task"] = task_name(cfg.task);
  j["system"] = cfg.system;
  j["config"] = ctx.config_path;
  json p = json::object();
  if (cfg.explicit_map || !cfg.system.empty())
    for (const auto& [k, v] : merged_parameters(cfg.system, cfg.parameters)) p[k] = v;
  j["parameters"] = p;
  return j;
}

json integrator_json(const lyap::IntegratorConfig& c) {
  return {{"taylor_order", c.taylor_order}, {"steps", c.steps},       {"inflation", c.inflation},
          {"max_retries", c.max_retries},   {"adaptive", c.adaptive}, {"divergence_bound", c.divergence_bound}};
}

json form_json(const lyap::QuadraticForm& q) {
  json eig = json::array();
  for (Eigen::Index i = 0; i < q.spectrum.eigenvalues.size(); ++i)
    eig.push_back({q.spectrum.eigenvalues(i).real(), q.spectrum.eigenvalues(i).imag()});
  return {{"center", to_json(q.center)},
          {"center_box", to_json(q.center_box)},
          {"y", to_json(q.y)},
          {"signature", {{"positive", q.positive}, {"negative", q.negative}}},
          {"eigenvalues", eig},
          {"signs", q.spectrum.signs},
          {"imag_residual", q.imag_residual}};
}

json eigen_json(const lyap::EigenEnclosure2& e) {
  using K = lyap::EigenEnclosure2::Kind;
  json j;
  j["kind"] = e.kind == K::Real ? "real" : e.kind == K::Complex ? "complex" : "indeterminate";
  if (e.kind == K::Real) {
    j["first"] = to_json(e.first);
    j["second"] = to_json(e.second);
  } else {
    j["modulus"] = to_json(e.modulus);
    j["real_part"] = to_json(e.real_part);
    if (e.kind == K::Indeterminate) {
      j["first"] = to_json(e.first);
      j["second"] = to_json(e.second);
    }
  }
  return j;
}

const IntervalVector& need_domain(const RunConfig& c) {
  if (!c.domain) throw ConfigError("missing required key 'domain'");
  if (c.subdivisions.empty()) throw ConfigError("missing required key 'subdivisions'");
  return *c.domain;
}

const Vec& need(const std::optional<Vec>& v, const char* key) {
  if (!v) throw ConfigError(fmt::format("missing required key '{}'", key));
  return *v;
}

lyap::VectorField make_field(const RunConfig& c) {
  if (c.explicit_map) throw ConfigError(fmt::format("task '{}' needs a vector field ('system = ...')", task_name(c.task)));
  return lyap::builtin(c.system, merged_parameters(c.system, c.parameters));
}

void check_dim(std::size_t want, std::size_t got, const char* key) {
  if (want != got) throw ConfigError(fmt::format("'{}' has {} entries, expected {}", key, got, want));
}

lyap::Section make_section(const RunConfig& c, std::size_t n) {
  const Vec& normal = need(c.section_normal, "section.normal");
  const Vec& anchor = need(c.section_anchor, "section.anchor");
  check_dim(n, static_cast<std::size_t>(normal.size()), "section.normal");
  check_dim(n, static_cast<std::size_t>(anchor.size()), "section.anchor");
  return lyap::Section(normal, anchor);
}

lyap::MWeights weights(const RunConfig& c) { return lyap::MWeights{c.m}; }

void maybe_render(Env& env, const VerdictTable& table, const lyap::QuadraticForm& q, json& out) {
  if (env.cfg.svg.empty()) return;
  SlicePlane plane{env.cfg.render_axes, env.cfg.render_slice};
  ContourSpec contours{q.center, q.y, env.cfg.render_levels};
  SliceImage img = render_slice(table, plane, contours);
  if (img.warning) env.log("warning: " + *img.warning);
  env.emit(env.cfg.svg, "slice.svg", img.svg);
  out["svg_cells"] = img.cells_drawn;
}

// ------------------------------------------------------------------ tasks

void run_equilibria(Env& env) {
  const RunConfig& c = env.cfg;
  auto f = make_field(c);
  lyap::Grid grid(need_domain(c), c.subdivisions);
  EquilibriumOptions opts;
  opts.threads = env.ctx.threads;
  EquilibriumSearch res = find_equilibria(f, grid, opts);
  json j = header(c, env.ctx);
  j["domain"] = to_json(grid.bounds());
  j["subdivisions"] = c.subdivisions;
  json zs = json::array();
  for (const auto& z : res.zeros)
    zs.push_back({{"enclosure", to_json(z.enclosure)}, {"midpoint", to_json(z.enclosure.mid())},
                  {"iterations", z.iterations}});
  j["equilibria"] = zs;
  j["unresolved_cells"] = res.unresolved;
  j["failed_verifications"] = res.failed_verifications;
  env.emit(c.json, "equilibria.json", j.dump(2) + "\n");
  env.log(fmt::format("{} verified equilibria, {} unresolved cells", res.zeros.size(), res.unresolved.size()));
  if (!res.unresolved.empty())
    env.log(fmt::format("warning: {} cells could not be cleared of further zeros", res.unresolved.size()));
  env.report.summary = j;
}

void run_flow_grid(Env& env) {
  const RunConfig& c = env.cfg;
  auto f = make_field(c);
  lyap::Grid grid(need_domain(c), c.subdivisions);
  check_dim(f.dimension(), grid.dimension(), "domain");
  const Vec& seed = need(c.center, "center");
  check_dim(f.dimension(), static_cast<std::size_t>(seed.size()), "center");

  lyap::KrawczykResult eq = lyap::verify_zero(f, seed);
  Vec center = eq.verified ? Vec(eq.enclosure.mid()) : seed;
  if (!eq.verified) env.log("warning: equilibrium not verified near 'center'; using the given point");
  lyap::QuadraticForm q = lyap::build_quadratic_flow(f, center, weights(c));
  if (eq.verified) q.center_box = eq.enclosure;

  env.log(fmt::format("sweeping {} cells", grid.size()));
  lyap::SweepOptions so;
  so.threads = env.ctx.threads;
  so.method = c.method;
  lyap::SweepResult sweep = lyap::sweep_flow(f, q, grid, so);
  VerdictTable table = VerdictTable::from_grid(grid, sweep.cells);
  env.emit(c.csv, "verdicts.csv", write_csv(table));

  json j = header(c, env.ctx);
  j["domain"] = to_json(grid.bounds());
  j["subdivisions"] = c.subdivisions;
  j["method"] = c.method == lyap::NegDefMethod::Cholesky ? "cholesky" : "gershgorin";
  j["equilibrium"] = {{"verified", eq.verified}, {"enclosure", to_json(eq.enclosure)}, {"message", eq.message}};
  j["form"] = form_json(q);
  j["cells"] = grid.size();
  j["counts"] = {{"blue", sweep.count(lyap::Color::Blue)},
                 {"lightblue", sweep.count(lyap::Color::LightBlue)},
                 {"yellow", sweep.count(lyap::Color::Yellow)},
                 {"red", sweep.count(lyap::Color::Red)}};
  j["ray_stage1_cells"] = std::count(sweep.ray_stage1.begin(), sweep.ray_stage1.end(), true);
  j["certified_cells"] = sweep.certified_count();
  j["hyperbolic_on_domain"] = lyap::hyperbolicity_check(f, q.center_box, grid.bounds());
  if (eq.verified) {
    auto u = lyap::unique_equilibrium_report(sweep, eq);
    j["uniqueness"] = {{"unique", u.unique}, {"region_cells", u.region_cells}, {"message", u.message}};
  }
  maybe_render(env, table, q, j);
  env.emit(c.json, "summary.json", j.dump(2) + "\n");
  env.log(fmt::format("blue {} lightblue {} yellow {} red {}", sweep.count(lyap::Color::Blue),
                      sweep.count(lyap::Color::LightBlue), sweep.count(lyap::Color::Yellow),
                      sweep.count(lyap::Color::Red)));
  env.report.summary = j;
}

struct MapSetup {
  lyap::MapModel model;
  std::optional<lyap::PoincareMap> poincare;
};

MapSetup make_map(const RunConfig& c) {
  if (c.explicit_map) return {lyap::make_map_model(lyap::builtin_map(c.system, merged_parameters(c.system, c.parameters))), {}};
  auto f = make_field(c);
  if (!c.period) throw ConfigError("missing required key 'period' (approximate return time)");
  lyap::PoincareMap p(f, make_section(c, f.dimension()), c.integrator, *c.period);
  MapSetup s{lyap::make_map_model(p), p};
  return s;
}

void run_map_grid(Env& env) {
  const RunConfig& c = env.cfg;
  MapSetup ms = make_map(c);
  const lyap::MapModel& model = ms.model;
  lyap::Grid grid(need_domain(c), c.subdivisions);
  check_dim(model.dimension, grid.dimension(), "domain");

  Vec seed;
  if (c.center) seed = *c.center;
  else if (ms.poincare && c.point) seed = ms.poincare->section().project(*c.point);
  else throw ConfigError("missing required key 'center' (or 'point' for Poincare maps)");
  check_dim(model.dimension, static_cast<std::size_t>(seed.size()), "center");

  // Fixed point of the map in its own coordinates.
  lyap::KrawczykResult fp;
  try {
    lyap::Mat r = lyap::approx_inverse(model.derivative(seed) -
                                       lyap::Mat::Identity(seed.size(), seed.size())).inverse;
    fp = lyap::krawczyk_verify(
        [&](const IntervalVector& z) { return model.evaluate(z, false).image - z; },
        [&](const IntervalVector& z) {
          return *model.evaluate(z, true).jacobian - lyap::IntervalMatrix::identity(z.size());
        },
        seed, r);
  } catch (const lyap::NumericalError& e) {
    fp.message = e.what();
  } catch (const lyap::PoincareError& e) {
    fp.message = e.what();
  } catch (const lyap::IntegrationError& e) {
    fp.message = e.what();
  }
  Vec center = fp.verified ? Vec(fp.enclosure.mid()) : seed;
  if (!fp.verified) env.log("warning: fixed point not verified near 'center'; using the given point");
  lyap::MapQuadraticForm q = lyap::build_quadratic_map(model, center, weights(c));
  if (fp.verified) q.center_box = fp.enclosure;

  lyap::PairwiseOptions po;
  po.threads = env.ctx.threads;
  po.budget = c.pair_budget;
  po.stage2_splits = c.stage2_splits;
  po.method = c.method;
  env.log(fmt::format("map sweep: {} cells, {} ordered pairs", grid.size(), grid.size() * grid.size()));
  lyap::MapSweepResult sweep = lyap::sweep_map(model, q, grid, po);
  VerdictTable table = VerdictTable::from_grid(grid, sweep.cells);
  env.emit(c.csv, "verdicts.csv", write_csv(table));

  json j = header(c, env.ctx);
  if (ms.poincare) {
    j["section"] = {{"normal", to_json(ms.poincare->section().normal())},
                    {"anchor", to_json(ms.poincare->section().anchor())}};
    j["integrator"] = integrator_json(c.integrator);
    j["return_time_hint"] = *c.period;
  }
  j["domain"] = to_json(grid.bounds());
  j["subdivisions"] = c.subdivisions;
  j["fixed_point"] = {{"verified", fp.verified}, {"enclosure", to_json(fp.enclosure)}, {"message", fp.message}};
  j["form"] = form_json(q);
  j["pairwise"] = {{"verified", sweep.pairwise.verified},     {"error", sweep.pairwise.error},
                   {"pairs", sweep.pairwise.pairs},           {"evaluated", sweep.pairwise.evaluated},
                   {"message", sweep.pairwise.message}};
  std::size_t s2err = std::count(sweep.stage2.begin(), sweep.stage2.end(), lyap::Stage2Outcome::Error);
  j["stage2_errors"] = s2err;
  j["counts"] = {{"blue", sweep.count(lyap::Color::Blue)},
                 {"lightblue", sweep.count(lyap::Color::LightBlue)},
                 {"yellow", sweep.count(lyap::Color::Yellow)},
                 {"red", sweep.count(lyap::Color::Red)}};
  maybe_render(env, table, q, j);
  env.emit(c.json, "summary.json", j.dump(2) + "\n");
  env.log(fmt::format("pairwise stage 1: {}", sweep.pairwise.verified ? "verified" : "not verified"));
  env.report.summary = j;
}

void run_poincare(Env& env) {
  const RunConfig& c = env.cfg;
  auto f = make_field(c);
  if (!c.period) throw ConfigError("missing required key 'period' (approximate return time)");
  lyap::PoincareMap p(f, make_section(c, f.dimension()), c.integrator, *c.period);
  const Vec& x0 = need(c.point, "point");
  check_dim(f.dimension(), static_cast<std::size_t>(x0.size()), "point");
  IntervalVector box = lyap::inflate(IntervalVector::point(x0), c.point_radius);

  json j = header(c, env.ctx);
  j["section"] = {{"normal", to_json(p.section().normal())}, {"anchor", to_json(p.section().anchor())}};
  j["integrator"] = integrator_json(c.integrator);
  j["start"] = to_json(box);
  lyap::ReturnEnclosure r = p.return_enclosure(box, lyap::IntegrationMode::C1);
  j["return"] = {{"time", to_json(r.time)},
                 {"state", to_json(r.state)},
                 {"section_state", to_json(r.section_state)},
                 {"transversality", to_json(r.transversality)}};
  if (r.dp) {
    j["return"]["dp"] = to_json(*r.dp);
    if (r.dp->rows() == 2) j["return"]["eigenvalues"] = eigen_json(lyap::eigen_enclosure_2x2(*r.dp));
  }
  auto ref = p.reference_return(x0);
  j["reference"] = {{"time", ref.time}, {"state", to_json(ref.state)}};
  env.emit(c.json, "return.json", j.dump(2) + "\n");
  env.log(fmt::format("return time {}", lyap::to_string(r.time)));
  env.report.summary = j;
}

void run_periodic(Env& env) {
  const RunConfig& c = env.cfg;
  auto f = make_field(c);
  const std::size_t n = f.dimension();
  lyap::BorderedProblem prob{f, make_section(c, n), c.integrator};
  if (!c.period) throw ConfigError("missing required key 'period' (seed period)");
  Vec x0 = c.point ? *c.point : *c.section_anchor;
  check_dim(n, static_cast<std::size_t>(x0.size()), "point");
  Vec seed(static_cast<Eigen::Index>(n + 1));
  seed(0) = *c.period;
  seed.tail(static_cast<Eigen::Index>(n)) = x0;

  env.log("verifying periodic orbit");
  lyap::PeriodicOrbitCertificate cert = lyap::verify_periodic(prob, seed);
  json j = header(c, env.ctx);
  j["section"] = {{"normal", to_json(prob.section.normal())}, {"anchor", to_json(prob.section.anchor())}};
  j["integrator"] = integrator_json(c.integrator);
  j["seed"] = to_json(seed);
  j["refined_seed"] = to_json(cert.seed);
  j["verified"] = cert.verified;
  j["iterations"] = cert.iterations;
  j["message"] = cert.message;
  if (cert.verified) {
    j["period"] = to_json(cert.period);
    j["point"] = to_json(cert.point);
    lyap::PoincareMap p(f, prob.section, c.integrator, cert.period.mid());
    IntervalVector s = prob.section.project(cert.point);
    lyap::IntervalMatrix dp = lyap::dp_enclosure(p, s);
    j["dp"] = to_json(dp);
    if (dp.rows() == 2) j["multipliers"] = eigen_json(lyap::eigen_enclosure_2x2(dp));
    try {
      lyap::MapQuadraticForm q = lyap::build_quadratic_map(lyap::make_map_model(p), s.mid(), weights(c));
      q.center_box = s;
      j["form"] = form_json(q);
    } catch (const lyap::NumericalError& e) {
      j["form_error"] = e.what();
    }
  }
  env.emit(c.json, "certificate.json", j.dump(2) + "\n");
  if (cert.verified) env.log(fmt::format("period {}", lyap::to_string(cert.period)));
  else env.log("periodic orbit not verified: " + cert.message);
  env.report.summary = j;
}

void run_trace(Env& env) {
  const RunConfig& c = env.cfg;
  auto f = make_field(c);
  const std::size_t n = f.dimension();
  const Vec& seed = need(c.center, "center");
  check_dim(n, static_cast<std::size_t>(seed.size()), "center");
  if (!c.trace_target) throw ConfigError("missing required key 'trace.target'");
  lyap::KrawczykResult eq = lyap::verify_zero(f, seed);
  Vec center = eq.verified ? Vec(eq.enclosure.mid()) : seed;
  if (!eq.verified) env.log("warning: equilibrium not verified near 'center'; using the given point");
  lyap::QuadraticForm q = lyap::build_quadratic_flow(f, center, weights(c));

  std::vector<Vec> starts;
  if (c.trace_start) {
    check_dim(n, static_cast<std::size_t>(c.trace_start->size()), "trace.start");
    starts.push_back(*c.trace_start);
  }
  if (c.trace_samples > 0) {
    if (!c.domain) throw ConfigError("'trace.samples' needs 'domain'");
    const IntervalVector& dom = *c.domain;
    check_dim(n, dom.size(), "domain");
    std::mt19937_64 rng(env.ctx.seed);
    for (int s = 0; s < c.trace_samples; ++s) {
      Vec x(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i)
        x(static_cast<Eigen::Index>(i)) = std::uniform_real_distribution<double>(dom[i].lo(), dom[i].hi())(rng);
      starts.push_back(x);
    }
  }
  if (starts.empty()) throw ConfigError("missing required key 'trace.start' (or 'trace.samples' with 'domain')");

  json j = header(c, env.ctx);
  j["form"] = form_json(q);
  j["target"] = *c.trace_target;
  json runs = json::array();
  double worst = 0.0;
  std::string csv = "run,level";
  for (std::size_t i = 0; i < n; ++i) csv += fmt::format(",x{}", i);
  csv += "\n";
  for (std::size_t k = 0; k < starts.size(); ++k) {
    lyap::TraceResult t = lyap::lyapunov_trace(f, q, starts[k], *c.trace_target);
    bool monotone = true;
    for (std::size_t i = 1; i < t.levels.size(); ++i)
      if ((t.levels[i] - t.levels[i - 1]) * (t.levels.back() - t.levels.front()) < 0.0) monotone = false;
    worst = std::max(worst, t.crosscheck_error);
    runs.push_back({{"start", to_json(starts[k])},
                    {"start_level", q.value(starts[k])},
                    {"endpoint", to_json(t.endpoint)},
                    {"time", t.time},
                    {"time_endpoint", to_json(t.time_endpoint)},
                    {"crosscheck_error", t.crosscheck_error},
                    {"monotone", monotone},
                    {"points", t.arc.size()}});
    for (std::size_t i = 0; i < t.arc.size(); ++i) {
      csv += fmt::format("{},{}", k, t.levels[i]);
      for (Eigen::Index d = 0; d < t.arc[i].size(); ++d) csv += fmt::format(",{}", t.arc[i](d));
      csv += "\n";
    }
  }
  j["runs"] = runs;
  j["max_crosscheck_error"] = worst;
  env.emit(c.csv, "trace.csv", csv);
  env.emit(c.json, "trace.json", j.dump(2) + "\n");
  env.log(fmt::format("{} traces, max cross-check error {:.3e}", starts.size(), worst));
  env.report.summary = j;
}

}  // namespace

RunReport run(const RunConfig& cfg, const RunContext& ctx) {
  std::filesystem::create_directories(ctx.out_dir);
  Env env{cfg, ctx, {}};
  switch (cfg.task) {
    case Task::Equilibria: run_equilibria(env); break;
    case Task::FlowGrid: run_flow_grid(env); break;
    case Task::MapGrid: run_map_grid(env); break;
    case Task::Poincare: run_poincare(env); break;
    case Task::Periodic: run_periodic(env); break;
    case Task::Trace: run_trace(env); break;
  }
  return std::move(env.report);
}

}  // namespace lyapcli
