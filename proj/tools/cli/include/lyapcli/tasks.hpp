#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lyap/interval.hpp"
#include "lyapcli/config.hpp"

namespace lyapcli {

struct RunContext {
  std::filesystem::path out_dir = ".";
  unsigned threads = 0;
  std::uint64_t seed = 1;
  std::string config_path;
  /// Progress and warnings; defaults to stderr.
  std::function<void(const std::string&)> log;
};

struct RunReport {
  std::vector<std::filesystem::path> artifacts;
  nlohmann::json summary;
};

/// Runs the configured task and writes its artifacts into ctx.out_dir.
/// Verification failures are reported in the artifacts; errors throw.
RunReport run(const RunConfig& cfg, const RunContext& ctx);

/// Builtin parameters merged with the configured overrides.
lyap::ParamMap merged_parameters(const std::string& system, const lyap::ParamMap& overrides);

nlohmann::json to_json(const lyap::Interval& x);
nlohmann::json to_json(const lyap::IntervalVector& x);
nlohmann::json to_json(const lyap::IntervalMatrix& m);
nlohmann::json to_json(const lyap::Vec& x);
nlohmann::json to_json(const lyap::Mat& m);
lyap::Vec vec_from_json(const nlohmann::json& j);
lyap::Mat mat_from_json(const nlohmann::json& j);

}  // namespace lyapcli
