#include "bilo/runner/runner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "bilo/theory/theory.hpp"

namespace bilo {

namespace fs = std::filesystem;

ProblemInstance build_problem(const ProblemSpec& spec) {
  ProblemInstance instance;
  switch (spec.kind) {
    case ProblemKind::Synthetic: {
      RngStream rng(spec.data_seed, 100);
      Vector w0 = Eigen::Map<const Vector>(spec.w0.data(), static_cast<Eigen::Index>(spec.w0.size()));
      SyntheticGenParams params;
      params.n_train = spec.n_train;
      params.n_val = spec.n_val;
      params.reg = spec.r;
      params.feature_std = spec.feature_std;
      params.noise_std = spec.noise_std;
      params.feature_scale = spec.feature_scale;
      instance.synthetic = SyntheticProblem::generate(rng, w0, params);
      break;
    }
    case ProblemKind::Hyperclean: {
      RngStream rng(spec.data_seed, 200);
      BlobGenParams extras;
      extras.n_test = spec.n_test;
      extras.ridge = spec.ridge;
      extras.centroid_std = spec.centroid_std;
      extras.cluster_std = spec.cluster_std;
      instance.hyperclean = HypercleanProblem::generate(rng, spec.n_train, spec.n_val, spec.d,
                                                        spec.classes, spec.corruption, extras);
      break;
    }
    case ProblemKind::File:
      return load_problem(spec.path);
  }
  return instance;
}

void save_problem(const ProblemInstance& instance, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  if (instance.synthetic) {
    instance.synthetic->save(os);
  } else if (instance.hyperclean) {
    instance.hyperclean->save(os);
  } else {
    throw InvalidState("save_problem: empty problem instance");
  }
}

ProblemInstance load_problem(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open problem file '" + path + "'");
  std::string magic;
  is >> magic;
  is.seekg(0);
  ProblemInstance instance;
  if (magic == "bilo-synthetic") {
    instance.synthetic = SyntheticProblem::load(is);
  } else if (magic == "bilo-hyperclean") {
    instance.hyperclean = HypercleanProblem::load(is);
  } else {
    throw IoError("unrecognized problem file '" + path + "'");
  }
  return instance;
}

std::unique_ptr<BilevelOracle> make_oracle(const ProblemInstance& instance) {
  if (instance.synthetic) return make_synthetic_oracle(*instance.synthetic);
  if (instance.hyperclean) return make_hyperclean_oracle(*instance.hyperclean);
  throw InvalidState("make_oracle: empty problem instance");
}

MetricFn make_metrics(const ProblemInstance& instance) {
  if (instance.synthetic) {
    const SyntheticProblem& problem = *instance.synthetic;
    return [&problem](const Vector& x, const Vector&) {
      return std::make_pair(problem.phi(x), problem.grad_phi(x).norm());
    };
  }
  if (instance.hyperclean) {
    const HypercleanProblem& problem = *instance.hyperclean;
    return [&problem](const Vector& x, const Vector& y_hint) {
      return hyperclean_phi_proxy(problem, x, y_hint);
    };
  }
  throw InvalidState("make_metrics: empty problem instance");
}

AlgoParams to_algo_params(const ExperimentConfig& config, std::uint64_t seed) {
  const AlgorithmSpec& a = config.algorithm;
  AlgoParams params;
  params.K = a.K;
  params.T = a.T;
  params.J = a.J;
  params.alpha = a.alpha;
  params.beta = a.beta;
  params.eta = a.eta;
  params.S = a.S;
  params.D = a.D;
  params.D_g = a.D_g;
  params.D_f = a.D_f;
  params.d_alpha = a.d_alpha;
  params.d_beta = a.d_beta;
  params.method = a.estimator;
  params.warm_start_v = a.warm_start_v;
  params.warm_start_y = a.warm_start_y;
  params.seed = seed;
  params.record_every = config.run.record_every;
  params.deterministic = config.run.deterministic;
  params.budget = a.budget;
  return params;
}

RunTrace run_configured(const ExperimentConfig& config, const ProblemInstance& instance,
                        std::uint64_t seed) {
  auto oracle = make_oracle(instance);
  const MetricFn metrics = make_metrics(instance);
  const AlgoParams params = to_algo_params(config, seed);
  switch (config.algorithm.algorithm) {
    case AlgorithmKind::Ssgd: return run_ssgd(*oracle, params, metrics);
    case AlgorithmKind::StocBiO: return run_stocbio(*oracle, params, metrics);
    case AlgorithmKind::Bsa: return run_bsa(*oracle, params, metrics);
    case AlgorithmKind::Ttsa: return run_ttsa(*oracle, params, metrics);
    case AlgorithmKind::Alg1: return run_algorithm1(*oracle, params, metrics);
  }
  throw InvalidState("run_configured: unknown algorithm");
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "iter,elapsed_s,phi,grad_norm,gc_f,gc_g,jv_g,hv_g\n";
  os.precision(17);
  for (const TraceRow& row : trace.rows) {
    os << row.iter << ',' << row.elapsed_s << ',' << row.phi << ',' << row.grad_norm << ','
       << row.counters.gc_f << ',' << row.counters.gc_g << ',' << row.counters.jv_g << ','
       << row.counters.hv_g << '\n';
  }
}

namespace {

void append_aggregate(std::ostream& os, const char* name, const std::vector<double>& values) {
  if (values.empty()) return;
  double sum = 0.0, lo = values.front(), hi = values.front();
  for (const double v : values) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  os << name << ',' << sum / static_cast<double>(values.size()) << ',' << lo << ',' << hi << '\n';
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir_override, unsigned workers) {
  const ProblemInstance instance = build_problem(config.problem);
  const fs::path out_dir = out_dir_override.empty() ? fs::path(config.run.out)
                                                    : fs::path(out_dir_override);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  const std::vector<std::uint64_t>& seeds = config.run.seeds;
  ExperimentResult result;
  result.outcomes.resize(seeds.size());

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(seeds.size()));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> fatal(workers);
  auto work = [&](unsigned worker_id) {
    try {
      for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
        SeedOutcome& outcome = result.outcomes[i];
        outcome.seed = seeds[i];
        const fs::path trace_path =
            out_dir / (std::string(algorithm_name(config.algorithm.algorithm)) + "_seed" +
                       std::to_string(seeds[i]) + ".csv");
        outcome.trace_path = trace_path.string();
        try {
          const RunTrace trace = run_configured(config, instance, seeds[i]);
          std::ofstream os(trace_path);
          if (!os) throw IoError("cannot open '" + trace_path.string() + "' for writing");
          write_trace_csv(os, trace);
          if (!os) throw IoError("write failed for '" + trace_path.string() + "'");
          outcome.final_row = trace.rows.back();
        } catch (const DivergenceError& e) {
          outcome.diverged = true;
          outcome.message = e.what();
        }
      }
    } catch (...) {
      fatal[worker_id] = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  for (auto& t : pool) t.join();
  for (const auto& e : fatal) {
    if (e) std::rethrow_exception(e);
  }

  const fs::path summary_path = out_dir / "summary.csv";
  std::ofstream os(summary_path);
  if (!os) throw IoError("cannot open '" + summary_path.string() + "' for writing");
  os.precision(17);
  os << "# algorithm: " << algorithm_name(config.algorithm.algorithm) << '\n';
  os << "# seeds:";
  for (const auto s : seeds) os << ' ' << s;
  os << '\n';
  os << "# diverged:";
  bool any_diverged = false;
  for (const SeedOutcome& outcome : result.outcomes) {
    if (outcome.diverged) {
      os << ' ' << outcome.seed;
      any_diverged = true;
    }
  }
  if (!any_diverged) os << " (none)";
  os << '\n';

  std::vector<double> phi, grad_norm, gc_f, gc_g, jv_g, hv_g, wall;
  for (const SeedOutcome& outcome : result.outcomes) {
    if (outcome.diverged) continue;
    phi.push_back(outcome.final_row.phi);
    grad_norm.push_back(outcome.final_row.grad_norm);
    gc_f.push_back(static_cast<double>(outcome.final_row.counters.gc_f));
    gc_g.push_back(static_cast<double>(outcome.final_row.counters.gc_g));
    jv_g.push_back(static_cast<double>(outcome.final_row.counters.jv_g));
    hv_g.push_back(static_cast<double>(outcome.final_row.counters.hv_g));
    wall.push_back(outcome.final_row.elapsed_s);
  }
  os << "quantity,mean,min,max\n";
  append_aggregate(os, "phi", phi);
  append_aggregate(os, "grad_norm", grad_norm);
  append_aggregate(os, "gc_f", gc_f);
  append_aggregate(os, "gc_g", gc_g);
  append_aggregate(os, "jv_g", jv_g);
  append_aggregate(os, "hv_g", hv_g);
  append_aggregate(os, "wall_s", wall);
  if (!os) throw IoError("write failed for '" + summary_path.string() + "'");
  result.summary_path = summary_path.string();
  return result;
}

std::string constants_report_for(const ExperimentConfig& config) {
  const ProblemInstance instance = build_problem(config.problem);
  if (!instance.synthetic) {
    throw InvalidArgument("constants report: only quadratic problems have closed-form spectra");
  }
  const LipschitzProfile profile =
      measure_profile(*instance.synthetic, config.problem.profile_radius);
  return constants_report(profile, config.algorithm.J);
}

}  // namespace bilo
