#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyap/interval.hpp"
#include "lyap/linalg.hpp"
#include "lyap/odeint.hpp"
#include "lyap/systems.hpp"

namespace lyapcli {

using lyap::Interval;
using lyap::IntervalVector;
using lyap::Vec;

/// Raised for malformed config files; what() carries "path:line: message".
class ConfigError : public lyap::UsageError {
 public:
  using lyap::UsageError::UsageError;
};

/// Flat "key = value" file. '#' starts a comment; blank lines are ignored.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& origin = "<config>");
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& origin() const noexcept { return origin_; }

  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  /// Whitespace- or comma-separated numbers.
  Vec vector(const std::string& key) const;
  std::vector<long> integers(const std::string& key) const;
  /// Whitespace-separated "[lo,hi]" tokens.
  IntervalVector box(const std::string& key) const;
  /// All keys with the given prefix, prefix stripped.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;
  /// Keys never read by any accessor.
  std::vector<std::string> unused() const;

  /// "path:line: message" for a key.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry& entry(const std::string& key) const;

  std::string origin_;
  std::map<std::string, Entry> entries_;
  mutable std::map<std::string, bool> used_;
};

enum class Task { Equilibria, FlowGrid, MapGrid, Poincare, Periodic, Trace };

Task parse_task(const std::string& name);
std::string task_name(Task t);

struct RunConfig {
  Task task = Task::FlowGrid;
  /// Vector field name (flows, Poincare maps) or explicit map name.
  std::string system;
  bool explicit_map = false;
  lyap::ParamMap parameters;

  std::optional<IntervalVector> domain;
  std::vector<std::size_t> subdivisions;
  std::optional<Vec> center;
  std::vector<double> m;
  lyap::NegDefMethod method = lyap::NegDefMethod::Gershgorin;
  std::size_t pair_budget = 10000;
  /// Bisection depth for map stage 2 on failing cells.
  int stage2_splits = 4;

  lyap::IntegratorConfig integrator;

  std::optional<Vec> section_normal;
  std::optional<Vec> section_anchor;
  std::optional<double> period;
  std::optional<Vec> point;
  double point_radius = 0.0;

  std::optional<Vec> trace_start;
  std::optional<double> trace_target;

  /// Random starts drawn from the domain (uses --seed).
  int trace_samples = 0;

  /// Empty picks a per-task default name.
  std::string csv;
  std::string json;
  std::string svg;
  std::vector<std::size_t> render_axes;
  std::map<std::size_t, double> render_slice;
  std::vector<double> render_levels;

  /// Reads every key; unknown keys are errors. `task` may be omitted when
  /// expected is given and must match it otherwise.
  static RunConfig from_file(const ConfigFile& file, std::optional<Task> expected = std::nullopt);
};

}  // namespace lyapcli
