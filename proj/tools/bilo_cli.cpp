#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bilo/bilo.h"

namespace {

int exit_code_for(bilo_status status) {
  switch (status) {
    case BILO_OK: return 0;
    case BILO_ERROR_INVALID_ARGUMENT:
    case BILO_ERROR_INVALID_STATE: return 2;
    case BILO_ERROR_DIVERGED: return 3;
    case BILO_ERROR_IO: return 4;
    case BILO_ERROR_NUMERICAL: return 5;
    default: return 1;
  }
}

int report_failure(bilo_status status) {
  std::cerr << "error: " << bilo_last_error() << "\n";
  return exit_code_for(status);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    std::cerr << "error: cannot read config file '" << path << "'\n";
    std::exit(4);
  }
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::vector<const char*> as_cstrs(const std::vector<std::string>& items) {
  std::vector<const char*> out;
  out.reserve(items.size());
  for (const auto& s : items) out.push_back(s.c_str());
  return out;
}

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

GridAxis parse_grid_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    std::cerr << "error: --grid expects key=a,b,c, got '" << spec << "'\n";
    std::exit(2);
  }
  GridAxis axis;
  axis.key = spec.substr(0, eq);
  std::string value;
  std::istringstream is(spec.substr(eq + 1));
  while (std::getline(is, value, ',')) axis.values.push_back(value);
  if (axis.values.empty()) {
    std::cerr << "error: --grid '" << spec << "' lists no values\n";
    std::exit(2);
  }
  return axis;
}

std::string short_key(const std::string& key) {
  const auto dot = key.rfind('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilo: stochastic bilevel optimization benchmark runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::vector<std::string> grids;
  bool deterministic = false;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("config", config_path, "config file")->required();
    cmd->add_option("--override", overrides, "extra section.key=value settings");
    if (with_out) {
      cmd->add_option("--out", out_dir, "output directory (overrides config)");
      cmd->add_flag("--deterministic", deterministic,
                    "full-batch deterministic mode (fixed, enumerated batches)");
    }
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment config");
  add_common(run_cmd, true);
  run_cmd->add_option("--seed", seed, "run a single seed instead of the config's list")
      ->each([&](const std::string&) { seed_given = true; });

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a cartesian grid of configs");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--grid", grids, "grid axis, e.g. algorithm.T=1,5,30")->required();

  CLI::App* constants_cmd =
      app.add_subcommand("constants", "print the analytic constants report for the problem");
  add_common(constants_cmd, false);

  CLI11_PARSE(app, argc, argv);

  std::string config_text = read_file(config_path);
  std::vector<std::string> effective = overrides;
  if (seed_given) effective.push_back("run.seeds=" + std::to_string(seed));
  if (deterministic) effective.push_back("run.deterministic=true");

  if (run_cmd->parsed()) {
    const auto ptrs = as_cstrs(effective);
    char* summary = nullptr;
    const bilo_status status =
        bilo_experiment_run(config_text.c_str(), ptrs.data(), static_cast<int32_t>(ptrs.size()),
                            out_dir.empty() ? nullptr : out_dir.c_str(), &summary);
    if (status != BILO_OK) return report_failure(status);
    std::cout << "summary: " << summary << "\n";
    bilo_string_free(summary);
    return 0;
  }

  if (sweep_cmd->parsed()) {
    std::vector<GridAxis> axes;
    axes.reserve(grids.size());
    for (const auto& g : grids) axes.push_back(parse_grid_axis(g));
    const std::string base = out_dir.empty() ? "sweep" : out_dir;

    std::vector<std::size_t> cursor(axes.size(), 0);
    bool done = false;
    int failures = 0;
    while (!done) {
      std::vector<std::string> combo = effective;
      std::string label;
      for (std::size_t i = 0; i < axes.size(); ++i) {
        combo.push_back(axes[i].key + "=" + axes[i].values[cursor[i]]);
        if (!label.empty()) label += "_";
        label += short_key(axes[i].key) + "=" + axes[i].values[cursor[i]];
      }
      const std::string combo_dir = base + "/" + label;
      const auto ptrs = as_cstrs(combo);
      char* summary = nullptr;
      const bilo_status status = bilo_experiment_run(
          config_text.c_str(), ptrs.data(), static_cast<int32_t>(ptrs.size()), combo_dir.c_str(),
          &summary);
      if (status != BILO_OK) {
        std::cerr << label << ": " << bilo_last_error() << "\n";
        ++failures;
      } else {
        std::cout << label << ": " << summary << "\n";
        bilo_string_free(summary);
      }
      // advance the cartesian cursor
      std::size_t axis = 0;
      for (; axis < axes.size(); ++axis) {
        if (++cursor[axis] < axes[axis].values.size()) break;
        cursor[axis] = 0;
      }
      done = axis == axes.size();
    }
    return failures == 0 ? 0 : 3;
  }

  // constants
  const auto ptrs = as_cstrs(effective);
  char* report = nullptr;
  const bilo_status status = bilo_constants_report(
      config_text.c_str(), ptrs.data(), static_cast<int32_t>(ptrs.size()), &report);
  if (status != BILO_OK) return report_failure(status);
  std::cout << report;
  bilo_string_free(report);
  return 0;
}
