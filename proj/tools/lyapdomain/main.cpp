#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include <fmt/format.h>

#include "lyap/errors.hpp"
#include "lyapcli/config.hpp"
#include "lyapcli/render.hpp"
#include "lyapcli/tasks.hpp"
#include "lyapcli/verdicts.hpp"

namespace {

// Exit codes: 0 run completed (verdicts may still be negative), 2 usage or
// configuration error, 3 numerical or integration error, 1 anything else.
constexpr int kUsage = 2;
constexpr int kNumeric = 3;

struct Common {
  std::string config;
  std::string out = ".";
  unsigned threads = 0;
  bool threads_set = false;
  std::uint64_t seed = 1;
};

unsigned env_threads() {
  const char* s = std::getenv("LYAPDOMAIN_THREADS");
  if (!s || !*s) return 0;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 0) throw lyap::UsageError(fmt::format("LYAPDOMAIN_THREADS='{}' is not a thread count", s));
  return static_cast<unsigned>(v);
}

void add_common(CLI::App* sub, Common& c, bool need_config) {
  auto* opt = sub->add_option("--config", c.config, "Run configuration file")->check(CLI::ExistingFile);
  if (need_config) opt->required();
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option_function<unsigned>(
      "--threads", [&c](const unsigned& v) { c.threads = v, c.threads_set = true; },
      "Worker threads (0 = all cores; env LYAPDOMAIN_THREADS)");
  sub->add_option("--seed", c.seed, "Random seed for sampled starts")->capture_default_str();
}

std::map<std::size_t, double> parse_slice(const std::string& spec) {
  std::map<std::size_t, double> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto comma = spec.find(',', pos);
    std::string tok = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw lyap::UsageError(fmt::format("--slice: '{}' is not axis=value", tok));
    try {
      out[std::stoul(tok.substr(0, eq))] = std::stod(tok.substr(eq + 1));
    } catch (const std::exception&) {
      throw lyap::UsageError(fmt::format("--slice: '{}' is not axis=value", tok));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int render(const std::string& csv, const std::string& form, const std::string& slice, const std::vector<std::size_t>& axes,
           const std::vector<double>& levels, const Common& c, const std::string& name) {
  lyapcli::VerdictTable table = lyapcli::parse_csv(lyapcli::read_file(csv));
  lyapcli::SlicePlane plane{axes, parse_slice(slice)};
  std::optional<lyapcli::ContourSpec> contours;
  if (!form.empty()) {
    auto j = nlohmann::json::parse(lyapcli::read_file(form));
    const auto& f = j.contains("form") ? j["form"] : j;
    contours = lyapcli::ContourSpec{lyapcli::vec_from_json(f.at("center")), lyapcli::mat_from_json(f.at("y")), levels};
  } else if (!levels.empty()) {
    throw lyap::UsageError("--levels needs --form (a summary JSON holding the quadratic form)");
  }
  auto img = lyapcli::render_slice(table, plane, contours);
  if (img.warning) std::cerr << "warning: " << *img.warning << '\n';
  std::filesystem::create_directories(c.out);
  auto path = std::filesystem::path(c.out) / name;
  lyapcli::write_file(path.string(), img.svg);
  std::cerr << fmt::format("{} cells drawn -> {}\n", img.cells_drawn, path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic Lyapunov functions and interval-certified Lyapunov domains"};
  app.require_subcommand(1);
  Common common;

  const std::pair<const char*, const char*> tasks[] = {
      {"equilibria", "Find and verify all equilibria in a box"},
      {"flow-grid", "Certify a Lyapunov domain of an equilibrium on a grid"},
      {"map-grid", "Certify a Lyapunov domain of a map fixed point on a grid"},
      {"poincare", "Validated first return to a section"},
      {"periodic", "Verify a periodic orbit and its section multipliers"},
      {"trace", "Follow a trajectory parameterized by the Lyapunov level"},
  };
  std::map<CLI::App*, lyapcli::Task> task_of;
  for (const auto& [name, help] : tasks) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, common, true);
    task_of[sub] = lyapcli::parse_task(name);
  }

  auto* rsub = app.add_subcommand("render", "Draw a 2-D slice of a verdict CSV as SVG");
  std::string csv, form, slice, name = "slice.svg";
  std::vector<std::size_t> axes;
  std::vector<double> levels;
  rsub->add_option("--csv", csv, "Verdict CSV")->required()->check(CLI::ExistingFile);
  rsub->add_option("--form", form, "Summary JSON with the quadratic form (for contours)")->check(CLI::ExistingFile);
  rsub->add_option("--slice", slice, "Fixed coordinates, e.g. 1=0.05");
  rsub->add_option("--axes", axes, "Plotted axes")->delimiter(',');
  rsub->add_option("--levels", levels, "L levels to contour")->delimiter(',');
  rsub->add_option("--name", name, "Output file name")->capture_default_str();
  add_common(rsub, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (!common.threads_set) common.threads = env_threads();
    if (rsub->parsed()) return render(csv, form, slice, axes, levels, common, name);
    for (const auto& [sub, task] : task_of) {
      if (!sub->parsed()) continue;
      auto file = lyapcli::ConfigFile::load(common.config);
      auto cfg = lyapcli::RunConfig::from_file(file, task);
      lyapcli::RunContext ctx;
      ctx.out_dir = common.out;
      ctx.threads = common.threads;
      ctx.seed = common.seed;
      ctx.config_path = common.config;
      auto report = lyapcli::run(cfg, ctx);
      for (const auto& p : report.artifacts) std::cerr << "wrote " << p.string() << '\n';
    }
    return 0;
  } catch (const lyap::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const lyap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
