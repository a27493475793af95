#include "lyap/systems.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <fmt/format.h>

namespace lyap {

ExprSystem::ExprSystem(std::string name, std::vector<std::string> variables,
                       std::vector<Expr> components, ParamMap parameters) {
  if (variables.size() != components.size())
    throw UsageError(fmt::format("system '{}': {} variables but {} components", name,
                                 variables.size(), components.size()));
  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->variables = std::move(variables);
  impl->parameters = std::move(parameters);
  impl->components = std::move(components);
  const std::size_t n = impl->variables.size();
  impl->jacobian = lyap::jacobian(impl->components, n);
  impl->tape = Tape(impl->components, n);
  std::vector<Expr> all = impl->components;
  all.insert(all.end(), impl->jacobian.begin(), impl->jacobian.end());
  impl->full_tape = Tape(all, n);
  impl_ = std::move(impl);
}

void ExprSystem::check_dim(std::size_t n) const {
  if (n != dimension())
    throw UsageError(fmt::format("system '{}' has dimension {}, got a {}-vector", name(),
                                 dimension(), n));
}

Vec ExprSystem::operator()(const Vec& x) const {
  check_dim(static_cast<std::size_t>(x.size()));
  std::vector<double> in(x.data(), x.data() + x.size()), work;
  Vec out(dimension());
  tape().eval(in.data(), out.data(), work);
  return out;
}

IntervalVector ExprSystem::operator()(const IntervalVector& x) const {
  check_dim(x.size());
  std::vector<Interval> work;
  IntervalVector out(dimension());
  tape().eval(x.entries().data(), &out[0], work);
  return out;
}

Mat ExprSystem::jacobian(const Vec& x) const {
  check_dim(static_cast<std::size_t>(x.size()));
  const std::size_t n = dimension();
  std::vector<double> in(x.data(), x.data() + x.size()), vals(n), jac(n * n);
  tape().eval_jacobian(in.data(), vals.data(), jac.data());
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = jac[i * n + j];
  return m;
}

IntervalMatrix ExprSystem::jacobian(const IntervalVector& x) const {
  check_dim(x.size());
  const std::size_t n = dimension();
  std::vector<Interval> vals(n);
  IntervalMatrix m(n, n);
  tape().eval_jacobian(x.entries().data(), vals.data(), m.data());
  return m;
}

VectorField VectorField::variational() const {
  std::lock_guard<std::mutex> lock(impl_->cache_mutex);
  if (impl_->variational_cache) return VectorField(impl_->variational_cache);
  const std::size_t n = dimension();
  std::vector<std::string> vars = variables();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) vars.push_back(fmt::format("V{}{}", i, j));
  std::vector<Expr> rhs = components();
  const auto& df = jacobian_exprs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Expr s(0.0);
      for (std::size_t k = 0; k < n; ++k) s = s + df[i * n + k] * Expr::var(n + k * n + j);
      rhs.push_back(s);
    }
  VectorField v(name() + "_variational", std::move(vars), std::move(rhs), parameters());
  impl_->variational_cache = v.impl_;
  return v;
}

IntervalVector eval_f(const ExprSystem& f, const IntervalVector& x) { return f(x); }
IntervalMatrix eval_Df(const ExprSystem& f, const IntervalVector& x) { return f.jacobian(x); }

namespace {

template <class T, class V>
std::vector<std::vector<T>> taylor_impl(const VectorField& f, const V& x0, int order) {
  if (order < 1) throw UsageError("taylor_coeffs: order must be >= 1");
  const std::size_t n = f.dimension();
  TaylorEvaluator<T> ev(f.tape(), order);
  std::vector<std::vector<T>> c(static_cast<std::size_t>(order) + 1, std::vector<T>(n));
  for (std::size_t i = 0; i < n; ++i) {
    c[0][i] = T(x0[i]);
    ev.set_var(i, 0, c[0][i]);
  }
  for (int k = 0; k < order; ++k) {
    ev.compute(k);
    for (std::size_t i = 0; i < n; ++i) {
      c[k + 1][i] = ev.output(i, k) / T(static_cast<double>(k + 1));
      ev.set_var(i, k + 1, c[k + 1][i]);
    }
  }
  return c;
}

}  // namespace

std::vector<IntervalVector> taylor_coeffs(const VectorField& f, const IntervalVector& x, int order) {
  if (x.size() != f.dimension()) throw UsageError("taylor_coeffs: dimension mismatch");
  auto c = taylor_impl<Interval>(f, x, order);
  std::vector<IntervalVector> out;
  for (auto& v : c) out.emplace_back(std::move(v));
  return out;
}

std::vector<Vec> taylor_coeffs(const VectorField& f, const Vec& x, int order) {
  if (static_cast<std::size_t>(x.size()) != f.dimension())
    throw UsageError("taylor_coeffs: dimension mismatch");
  auto c = taylor_impl<double>(f, x, order);
  std::vector<Vec> out;
  for (auto& v : c) out.push_back(Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  return out;
}

// ------------------------------------------------------------------ builtins

namespace {

struct Params {
  const std::string& system;
  const ParamMap& given;
  std::set<std::string> used;

  double operator()(const std::string& key) {
    auto it = given.find(key);
    if (it == given.end())
      throw UsageError(fmt::format("system '{}': missing parameter '{}'", system, key));
    used.insert(key);
    return it->second;
  }

  void finish() const {
    for (const auto& [k, v] : given)
      if (!used.count(k))
        throw UsageError(fmt::format("system '{}': unknown parameter '{}'", system, k));
  }
};

Expr X(std::size_t i) { return Expr::var(i); }

// Counts parameters prefix1, prefix2, ... (contiguous from 1).
std::size_t indexed_count(const ParamMap& p, const std::string& prefix) {
  std::size_t n = 0;
  while (p.count(prefix + std::to_string(n + 1))) ++n;
  return n;
}

VectorField make_fitzhugh_nagumo(Params& p) {
  Expr a = p("a"), c = p("c"), delta = p("delta"), eps = p("eps"), gamma = p("gamma");
  Expr u = X(0), v = X(1), w = X(2);
  Expr fu = u * (u - a) * (Expr(1.0) - u);
  return VectorField("fitzhugh_nagumo", {"u", "v", "w"},
                     {v, (Expr(1.0) / delta) * (c * v - fu + w), (eps / c) * (u - gamma * w)},
                     p.given);
}

VectorField make_rossler(Params& p, bool printed) {
  Expr a = p("a"), b = p("b"), c = p("c");
  Expr u = X(0), v = X(1), w = X(2);
  Expr dv = printed ? -u - a * v : u + a * v;
  return VectorField(printed ? "rossler_printed" : "rossler", {"u", "v", "w"},
                     {-v - w, dv, b + w * (u - c)}, p.given);
}

VectorField make_lorenz(Params& p) {
  Expr a1 = p("a1"), a2 = p("a2"), a3 = p("a3"), b1 = p("b1"), b2 = p("b2"), b3 = p("b3");
  Expr u = X(0), v = X(1), w = X(2);
  Expr s = u + v;
  return VectorField("lorenz_sinai_vul", {"u", "v", "w"},
                     {a1 * u + b1 * s * w, a2 * v - b1 * s * w, -(a3 * w) + s * (b2 * u + b3 * v)},
                     p.given);
}

VectorField make_linear_diag(Params& p) {
  std::size_t n = indexed_count(p.given, "lambda");
  if (n == 0) throw UsageError("system 'linear_diag': needs parameters lambda1, lambda2, ...");
  std::vector<std::string> vars;
  std::vector<Expr> rhs;
  for (std::size_t i = 0; i < n; ++i) {
    vars.push_back(fmt::format("x{}", i + 1));
    rhs.push_back(Expr(p(fmt::format("lambda{}", i + 1))) * X(i));
  }
  return VectorField("linear_diag", vars, rhs, p.given);
}

VectorField make_harmonic(Params& p) {
  Expr om = p("omega");
  return VectorField("harmonic_oscillator", {"x", "y"}, {om * X(1), -(om * X(0))}, p.given);
}

VectorField make_cubic(Params& p) {
  Expr x = X(0);
  return VectorField("cubic_1d", {"x"}, {x - x * sqr(x)}, p.given);
}

VectorField make_planar(Params& p) {
  Expr x = X(0), y = X(1);
  Expr r2 = sqr(x) + sqr(y);
  return VectorField("planar_limit_cycle", {"x", "y"}, {x - y - x * r2, x + y - y * r2}, p.given);
}

SmoothMap make_square(Params& p) {
  return SmoothMap("square_1d", {"x"}, {sqr(X(0))}, p.given);
}

SmoothMap make_linear_map(Params& p) {
  std::size_t n = indexed_count(p.given, "mu");
  if (n == 0) throw UsageError("map 'linear_diag_map': needs parameters mu1, mu2, ...");
  std::vector<std::string> vars;
  std::vector<Expr> rhs;
  for (std::size_t i = 0; i < n; ++i) {
    vars.push_back(fmt::format("x{}", i + 1));
    rhs.push_back(Expr(p(fmt::format("mu{}", i + 1))) * X(i));
  }
  return SmoothMap("linear_diag_map", vars, rhs, p.given);
}

SmoothMap make_henon(Params& p) {
  Expr a = p("a"), b = p("b");
  return SmoothMap("henon", {"x", "y"}, {Expr(1.0) - a * sqr(X(0)) + X(1), b * X(0)}, p.given);
}

using FieldMaker = std::function<VectorField(Params&)>;
using MapMaker = std::function<SmoothMap(Params&)>;

const std::map<std::string, FieldMaker>& field_table() {
  static const std::map<std::string, FieldMaker> t = {
      {"fitzhugh_nagumo", make_fitzhugh_nagumo},
      {"rossler", [](Params& p) { return make_rossler(p, false); }},
      {"rossler_printed", [](Params& p) { return make_rossler(p, true); }},
      {"lorenz_sinai_vul", make_lorenz},
      {"linear_diag", make_linear_diag},
      {"harmonic_oscillator", make_harmonic},
      {"cubic_1d", make_cubic},
      {"planar_limit_cycle", make_planar},
  };
  return t;
}

const std::map<std::string, MapMaker>& map_table() {
  static const std::map<std::string, MapMaker> t = {
      {"square_1d", make_square},
      {"linear_diag_map", make_linear_map},
      {"henon", make_henon},
  };
  return t;
}

}  // namespace

VectorField builtin(const std::string& name, const ParamMap& params) {
  auto it = field_table().find(name);
  if (it == field_table().end()) throw UsageError(fmt::format("unknown system '{}'", name));
  Params p{name, params, {}};
  VectorField f = it->second(p);
  p.finish();
  return f;
}

SmoothMap builtin_map(const std::string& name, const ParamMap& params) {
  auto it = map_table().find(name);
  if (it == map_table().end()) throw UsageError(fmt::format("unknown map '{}'", name));
  Params p{name, params, {}};
  SmoothMap m = it->second(p);
  p.finish();
  return m;
}

ParamMap default_parameters(const std::string& name) {
  if (name == "fitzhugh_nagumo") return {{"a", 0.2}, {"c", 5.0}, {"delta", 5.0}, {"eps", 0.15}, {"gamma", 20.0}};
  if (name == "rossler" || name == "rossler_printed") return {{"a", 0.2}, {"b", 0.2}, {"c", 2.2}};
  if (name == "lorenz_sinai_vul")
    return {{"a1", 9.700378782}, {"a2", -16.700378782}, {"a3", 2.666666667},
            {"b1", -0.227266206}, {"b2", 2.616729797}, {"b3", -1.783396463}};
  if (name == "harmonic_oscillator") return {{"omega", 1.0}};
  if (name == "henon") return {{"a", 1.4}, {"b", 0.3}};
  if (field_table().count(name) || map_table().count(name)) return {};
  throw UsageError(fmt::format("unknown system '{}'", name));
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> v;
  for (const auto& [k, _] : field_table()) v.push_back(k);
  return v;
}

std::vector<std::string> builtin_map_names() {
  std::vector<std::string> v;
  for (const auto& [k, _] : map_table()) v.push_back(k);
  return v;
}

}  // namespace lyap
