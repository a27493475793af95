#include "lyapcli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace lyapcli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line));
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, line));
    if (cfg.entries_.count(key))
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}' (first set on line {})", origin, line, key,
                                    cfg.entries_[key].line));
    cfg.entries_[key] = {value, line};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void ConfigFile::fail(const std::string& key, const std::string& message) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(fmt::format("{}: {}", origin_, message));
  throw ConfigError(fmt::format("{}:{}: {}", origin_, it->second.line, message));
}

const ConfigFile::Entry& ConfigFile::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(fmt::format("{}: missing required key '{}'", origin_, key));
  used_[key] = true;
  return it->second;
}

std::string ConfigFile::get(const std::string& key) const { return entry(key).value; }

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double ConfigFile::number(const std::string& key) const {
  double v;
  if (!parse_double(entry(key).value, v)) fail(key, fmt::format("'{}' is not a number", key));
  return v;
}

double ConfigFile::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

long ConfigFile::integer(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = entry(key).value;
  long v;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, fmt::format("'{}' is not an integer", key));
  return v;
}

bool ConfigFile::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = entry(key).value;
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  fail(key, fmt::format("'{}' must be true or false", key));
}

Vec ConfigFile::vector(const std::string& key) const {
  auto t = tokens(entry(key).value);
  Vec v(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    double d;
    if (!parse_double(t[i], d)) fail(key, fmt::format("'{}': '{}' is not a number", key, t[i]));
    v(static_cast<Eigen::Index>(i)) = d;
  }
  if (v.size() == 0) fail(key, fmt::format("'{}' is empty", key));
  return v;
}

std::vector<long> ConfigFile::integers(const std::string& key) const {
  std::vector<long> out;
  for (const auto& s : tokens(entry(key).value)) {
    long v;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      fail(key, fmt::format("'{}': '{}' is not an integer", key, s));
    out.push_back(v);
  }
  if (out.empty()) fail(key, fmt::format("'{}' is empty", key));
  return out;
}

IntervalVector ConfigFile::box(const std::string& key) const {
  const std::string& s = entry(key).value;
  IntervalVector out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto open = s.find('[', pos);
    if (open == std::string::npos) {
      if (!trim(s.substr(pos)).empty()) fail(key, fmt::format("'{}': expected '[lo,hi]'", key));
      break;
    }
    if (!trim(s.substr(pos, open - pos)).empty()) fail(key, fmt::format("'{}': expected '[lo,hi]'", key));
    auto close = s.find(']', open);
    if (close == std::string::npos) fail(key, fmt::format("'{}': unterminated interval", key));
    try {
      out.push_back(lyap::parse_interval(s.substr(open, close - open + 1)));
    } catch (const lyap::Error& e) {
      fail(key, fmt::format("'{}': {}", key, e.what()));
    }
    pos = close + 1;
  }
  if (out.empty()) fail(key, fmt::format("'{}' is empty", key));
  return out;
}

std::map<std::string, std::string> ConfigFile::with_prefix(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  for (const auto& [k, e] : entries_)
    if (k.rfind(prefix, 0) == 0) {
      used_[k] = true;
      out[k.substr(prefix.size())] = e.value;
    }
  return out;
}

std::vector<std::string> ConfigFile::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_)
    if (!used_.count(k)) out.push_back(fmt::format("{}:{}: unknown key '{}'", origin_, e.line, k));
  return out;
}

Task parse_task(const std::string& name) {
  if (name == "equilibria") return Task::Equilibria;
  if (name == "flow-grid") return Task::FlowGrid;
  if (name == "map-grid") return Task::MapGrid;
  if (name == "poincare") return Task::Poincare;
  if (name == "periodic") return Task::Periodic;
  if (name == "trace") return Task::Trace;
  throw lyap::UsageError(fmt::format("unknown task '{}'", name));
}

std::string task_name(Task t) {
  switch (t) {
    case Task::Equilibria: return "equilibria";
    case Task::FlowGrid: return "flow-grid";
    case Task::MapGrid: return "map-grid";
    case Task::Poincare: return "poincare";
    case Task::Periodic: return "periodic";
    case Task::Trace: return "trace";
  }
  return "flow-grid";
}

RunConfig RunConfig::from_file(const ConfigFile& f, std::optional<Task> expected) {
  RunConfig c;
  if (f.has("task")) {
    try {
      c.task = parse_task(f.get("task"));
    } catch (const ConfigError&) {
      throw;
    } catch (const lyap::UsageError& e) {
      f.fail("task", e.what());
    }
    if (expected && *expected != c.task)
      f.fail("task", fmt::format("config is for task '{}', not '{}'", task_name(c.task), task_name(*expected)));
  } else if (expected) {
    c.task = *expected;
  } else {
    f.fail("task", "missing required key 'task'");
  }

  if (f.has("map") && f.has("system")) f.fail("map", "set either 'system' or 'map', not both");
  if (f.has("map")) {
    c.system = f.get("map");
    c.explicit_map = true;
  } else {
    c.system = f.get("system");
  }
  for (const auto& [k, v] : f.with_prefix("param.")) {
    double d;
    if (!parse_double(v, d)) f.fail("param." + k, fmt::format("parameter '{}' is not a number", k));
    c.parameters[k] = d;
  }

  if (f.has("domain")) c.domain = f.box("domain");
  if (f.has("subdivisions")) {
    for (long s : f.integers("subdivisions")) {
      if (s < 1) f.fail("subdivisions", "subdivisions must be >= 1");
      c.subdivisions.push_back(static_cast<std::size_t>(s));
    }
    if (c.domain && c.subdivisions.size() != c.domain->size())
      f.fail("subdivisions", "one subdivision count per domain axis required");
  }
  if (f.has("center")) c.center = f.vector("center");
  if (f.has("m")) {
    Vec m = f.vector("m");
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (!(m(i) > 0.0)) f.fail("m", "m-weights must be positive");
      c.m.push_back(m(i));
    }
  }
  std::string method = f.get("method", "gershgorin");
  if (method == "gershgorin") c.method = lyap::NegDefMethod::Gershgorin;
  else if (method == "cholesky") c.method = lyap::NegDefMethod::Cholesky;
  else f.fail("method", "method must be 'gershgorin' or 'cholesky'");
  long budget = f.integer("pair_budget", 10000);
  if (budget < 1) f.fail("pair_budget", "pair_budget must be positive");
  c.pair_budget = static_cast<std::size_t>(budget);
  long splits = f.integer("stage2_splits", 4);
  if (splits < 0 || splits > 20) f.fail("stage2_splits", "stage2_splits must be in 0..20");
  c.stage2_splits = static_cast<int>(splits);

  c.integrator.taylor_order = static_cast<int>(f.integer("taylor_order", c.integrator.taylor_order));
  c.integrator.steps = static_cast<int>(f.integer("steps", c.integrator.steps));
  c.integrator.inflation = f.number("inflation", c.integrator.inflation);
  c.integrator.max_retries = static_cast<int>(f.integer("max_retries", c.integrator.max_retries));
  c.integrator.adaptive = f.boolean("adaptive", c.integrator.adaptive);
  try {
    c.integrator.validate();
  } catch (const lyap::UsageError& e) {
    throw ConfigError(fmt::format("{}: {}", f.origin(), e.what()));
  }

  if (f.has("section.normal")) {
    Vec n = f.vector("section.normal");
    double len = n.norm();
    if (!(len > 0.0)) f.fail("section.normal", "section normal must be nonzero");
    if (std::abs(len - 1.0) > 1e-12) n /= len;
    c.section_normal = n;
  }
  if (f.has("section.anchor")) c.section_anchor = f.vector("section.anchor");
  if (f.has("period")) {
    c.period = f.number("period");
    if (!(*c.period > 0.0)) f.fail("period", "period must be positive");
  }
  if (f.has("point")) c.point = f.vector("point");
  c.point_radius = f.number("point_radius", 0.0);
  if (c.point_radius < 0.0) f.fail("point_radius", "point_radius must be >= 0");

  if (f.has("trace.start")) c.trace_start = f.vector("trace.start");
  if (f.has("trace.target")) c.trace_target = f.number("trace.target");

  c.trace_samples = static_cast<int>(f.integer("trace.samples", 0));
  if (c.trace_samples < 0) f.fail("trace.samples", "trace.samples must be >= 0");

  c.csv = f.get("output.csv", "");
  c.json = f.get("output.json", "");
  c.svg = f.get("output.svg", "");
  if (f.has("render.axes"))
    for (long a : f.integers("render.axes")) {
      if (a < 0) f.fail("render.axes", "axes must be >= 0");
      c.render_axes.push_back(static_cast<std::size_t>(a));
    }
  if (f.has("render.slice")) {
    for (const auto& tok : tokens(f.get("render.slice"))) {
      auto eq = tok.find('=');
      double v;
      long a;
      if (eq == std::string::npos) f.fail("render.slice", "slice entries are axis=value");
      std::string as = tok.substr(0, eq), vs = tok.substr(eq + 1);
      auto r = std::from_chars(as.data(), as.data() + as.size(), a);
      if (r.ec != std::errc() || r.ptr != as.data() + as.size() || a < 0 || !parse_double(vs, v))
        f.fail("render.slice", fmt::format("bad slice entry '{}'", tok));
      c.render_slice[static_cast<std::size_t>(a)] = v;
    }
  }
  if (f.has("render.levels")) {
    Vec l = f.vector("render.levels");
    c.render_levels.assign(l.data(), l.data() + l.size());
  }
  auto unknown = f.unused();
  if (!unknown.empty()) throw ConfigError(unknown.front());
  return c;
}

}  // namespace lyapcli
