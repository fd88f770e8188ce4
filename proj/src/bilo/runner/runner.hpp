#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bilo/algorithms/algorithms.hpp"
#include "bilo/hyperclean/hyperclean.hpp"
#include "bilo/runner/config.hpp"
#include "bilo/synthetic/synthetic.hpp"

namespace bilo {

// A constructed problem: exactly one of the two members is set.
struct ProblemInstance {
  std::optional<SyntheticProblem> synthetic;
  std::optional<HypercleanProblem> hyperclean;
};

ProblemInstance build_problem(const ProblemSpec& spec);
void save_problem(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_problem(const std::string& path);

std::unique_ptr<BilevelOracle> make_oracle(const ProblemInstance& instance);
MetricFn make_metrics(const ProblemInstance& instance);

AlgoParams to_algo_params(const ExperimentConfig& config, std::uint64_t seed);

// Runs the configured algorithm for one seed against an existing problem.
RunTrace run_configured(const ExperimentConfig& config, const ProblemInstance& instance,
                        std::uint64_t seed);

void write_trace_csv(std::ostream& os, const RunTrace& trace);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string message;
  std::string trace_path;
  TraceRow final_row;  // last recorded row; valid when not diverged
};

struct ExperimentResult {
  std::vector<SeedOutcome> outcomes;
  std::string summary_path;
};

// One trace file per seed plus a summary aggregating the final rows across
// seeds. Per-seed divergence is recorded in the summary, not fatal. Seeds run
// in a worker pool (0 workers = hardware concurrency).
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir_override = "", unsigned workers = 0);

// Theory-module report for the configured problem (synthetic only).
std::string constants_report_for(const ExperimentConfig& config);

}  // namespace bilo
