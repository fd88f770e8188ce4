#include "bilo/bilo.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "bilo/runner/runner.hpp"
#include "bilo/theory/theory.hpp"

namespace {

thread_local std::string g_last_error;

bilo_status fail(bilo_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <typename Fn>
bilo_status guarded(Fn&& fn) {
  try {
    fn();
    return BILO_OK;
  } catch (const bilo::InvalidArgument& e) {
    return fail(BILO_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const bilo::ConfigError& e) {
    return fail(BILO_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const bilo::InvalidState& e) {
    return fail(BILO_ERROR_INVALID_STATE, e.what());
  } catch (const bilo::DivergenceError& e) {
    return fail(BILO_ERROR_DIVERGED, e.what());
  } catch (const bilo::IoError& e) {
    return fail(BILO_ERROR_IO, e.what());
  } catch (const bilo::NumericalError& e) {
    return fail(BILO_ERROR_NUMERICAL, e.what());
  } catch (const std::exception& e) {
    return fail(BILO_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(BILO_ERROR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_overrides(const char* const* overrides,
                                                                 int32_t n) {
  std::vector<std::pair<std::string, std::string>> out;
  for (int32_t i = 0; i < n; ++i) {
    if (overrides == nullptr || overrides[i] == nullptr) {
      throw bilo::InvalidArgument("override list contains a null entry");
    }
    const std::string item = overrides[i];
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw bilo::InvalidArgument("override '" + item + "' is not of the form section.key=value");
    }
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

}  // namespace

struct bilo_problem {
  bilo::ProblemInstance instance;
};

struct bilo_trace {
  bilo::RunTrace trace;
};

extern "C" {

const char* bilo_version(void) { return "1.0.0"; }

const char* bilo_last_error(void) { return g_last_error.c_str(); }

void bilo_string_free(char* s) { std::free(s); }

bilo_status bilo_problem_synthetic(const double* w0, int32_t dim, int64_t n_train, int64_t n_val,
                                   double reg, double feature_std, double noise_std,
                                   double feature_scale, uint64_t data_seed, bilo_problem** out) {
  return guarded([&] {
    if (w0 == nullptr || out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    if (dim < 2 || n_train < 1 || n_val < 1) {
      throw bilo::InvalidArgument("synthetic problem: dim >= 2 and positive dataset sizes required");
    }
    bilo::RngStream rng(data_seed, 100);
    bilo::SyntheticGenParams params;
    params.n_train = static_cast<std::size_t>(n_train);
    params.n_val = static_cast<std::size_t>(n_val);
    params.reg = reg;
    params.feature_std = feature_std;
    params.noise_std = noise_std;
    params.feature_scale = feature_scale;
    const bilo::Vector w = Eigen::Map<const bilo::Vector>(w0, dim);
    auto* handle = new bilo_problem;
    handle->instance.synthetic = bilo::SyntheticProblem::generate(rng, w, params);
    *out = handle;
  });
}

bilo_status bilo_problem_hyperclean(int64_t n_train, int64_t n_val, int64_t n_test, int32_t dim,
                                    int32_t num_classes, double corruption_prob, double ridge,
                                    uint64_t data_seed, bilo_problem** out) {
  return guarded([&] {
    if (out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    if (n_train < 1 || n_val < 1 || n_test < 0 || dim < 1 || num_classes < 1) {
      throw bilo::InvalidArgument("hyperclean problem: invalid dimensions");
    }
    bilo::RngStream rng(data_seed, 200);
    bilo::BlobGenParams extras;
    extras.n_test = static_cast<std::size_t>(n_test);
    extras.ridge = ridge;
    auto* handle = new bilo_problem;
    handle->instance.hyperclean = bilo::HypercleanProblem::generate(
        rng, static_cast<std::size_t>(n_train), static_cast<std::size_t>(n_val),
        static_cast<std::size_t>(dim), static_cast<std::size_t>(num_classes), corruption_prob,
        extras);
    *out = handle;
  });
}

bilo_status bilo_problem_save(const bilo_problem* problem, const char* path) {
  return guarded([&] {
    if (problem == nullptr || path == nullptr) throw bilo::InvalidArgument("null pointer argument");
    bilo::save_problem(problem->instance, path);
  });
}

bilo_status bilo_problem_load(const char* path, bilo_problem** out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    auto* handle = new bilo_problem;
    handle->instance = bilo::load_problem(path);
    *out = handle;
  });
}

void bilo_problem_free(bilo_problem* problem) { delete problem; }

int64_t bilo_problem_dim_x(const bilo_problem* problem) {
  if (problem == nullptr) return -1;
  if (problem->instance.synthetic) return problem->instance.synthetic->dim();
  if (problem->instance.hyperclean) return problem->instance.hyperclean->dim_x();
  return -1;
}

int64_t bilo_problem_dim_y(const bilo_problem* problem) {
  if (problem == nullptr) return -1;
  if (problem->instance.synthetic) return problem->instance.synthetic->dim();
  if (problem->instance.hyperclean) return problem->instance.hyperclean->dim_y();
  return -1;
}

static bilo_status synthetic_closed_form(const bilo_problem* problem, const double* x,
                                         double* out_vec, double* out_scalar, int which) {
  return guarded([&] {
    if (problem == nullptr || x == nullptr) throw bilo::InvalidArgument("null pointer argument");
    if (!problem->instance.synthetic) {
      throw bilo::InvalidState("closed forms are only available for synthetic problems");
    }
    const bilo::SyntheticProblem& sp = *problem->instance.synthetic;
    const bilo::Vector xv = Eigen::Map<const bilo::Vector>(x, sp.dim());
    switch (which) {
      case 0: {
        Eigen::Map<bilo::Vector>(out_vec, sp.dim()) = sp.y_star(xv);
        break;
      }
      case 1: {
        Eigen::Map<bilo::Vector>(out_vec, sp.dim()) = sp.grad_phi(xv);
        break;
      }
      default:
        *out_scalar = sp.phi(xv);
    }
  });
}

bilo_status bilo_synthetic_y_star(const bilo_problem* problem, const double* x, double* y_out) {
  if (y_out == nullptr) return fail(BILO_ERROR_INVALID_ARGUMENT, "null output buffer");
  return synthetic_closed_form(problem, x, y_out, nullptr, 0);
}

bilo_status bilo_synthetic_grad_phi(const bilo_problem* problem, const double* x, double* g_out) {
  if (g_out == nullptr) return fail(BILO_ERROR_INVALID_ARGUMENT, "null output buffer");
  return synthetic_closed_form(problem, x, g_out, nullptr, 1);
}

bilo_status bilo_synthetic_phi(const bilo_problem* problem, const double* x, double* phi_out) {
  if (phi_out == nullptr) return fail(BILO_ERROR_INVALID_ARGUMENT, "null output buffer");
  return synthetic_closed_form(problem, x, nullptr, phi_out, 2);
}

bilo_status bilo_run(const bilo_problem* problem, const char* config_text, uint64_t seed,
                     int32_t deterministic, bilo_trace** out) {
  return guarded([&] {
    if (problem == nullptr || config_text == nullptr || out == nullptr) {
      throw bilo::InvalidArgument("null pointer argument");
    }
    bilo::ExperimentConfig config = bilo::parse_config(config_text);
    if (deterministic != 0) config.run.deterministic = true;
    auto* handle = new bilo_trace;
    try {
      handle->trace = bilo::run_configured(config, problem->instance, seed);
    } catch (...) {
      delete handle;
      throw;
    }
    *out = handle;
  });
}

int64_t bilo_trace_num_rows(const bilo_trace* trace) {
  return trace == nullptr ? -1 : static_cast<int64_t>(trace->trace.rows.size());
}

bilo_status bilo_trace_get(const bilo_trace* trace, int64_t row, bilo_trace_row* out) {
  return guarded([&] {
    if (trace == nullptr || out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    if (row < 0 || row >= static_cast<int64_t>(trace->trace.rows.size())) {
      throw bilo::InvalidArgument("trace row index out of range");
    }
    const bilo::TraceRow& r = trace->trace.rows[static_cast<std::size_t>(row)];
    out->iter = r.iter;
    out->elapsed_s = r.elapsed_s;
    out->phi = r.phi;
    out->grad_norm = r.grad_norm;
    out->gc_f = r.counters.gc_f;
    out->gc_g = r.counters.gc_g;
    out->jv_g = r.counters.jv_g;
    out->hv_g = r.counters.hv_g;
  });
}

bilo_status bilo_trace_write_csv(const bilo_trace* trace, const char* path) {
  return guarded([&] {
    if (trace == nullptr || path == nullptr) throw bilo::InvalidArgument("null pointer argument");
    std::ofstream os(path);
    if (!os) throw bilo::IoError(std::string("cannot open '") + path + "' for writing");
    bilo::write_trace_csv(os, trace->trace);
    if (!os) throw bilo::IoError(std::string("write failed for '") + path + "'");
  });
}

void bilo_trace_free(bilo_trace* trace) { delete trace; }

bilo_status bilo_hyperclean_metrics(const bilo_problem* problem, const double* y,
                                    double* accuracy_out, double* f1_out) {
  return guarded([&] {
    if (problem == nullptr || y == nullptr || accuracy_out == nullptr || f1_out == nullptr) {
      throw bilo::InvalidArgument("null pointer argument");
    }
    if (!problem->instance.hyperclean) {
      throw bilo::InvalidState("test metrics are only available for hyperclean problems");
    }
    const bilo::HypercleanProblem& hp = *problem->instance.hyperclean;
    const bilo::Vector yv = Eigen::Map<const bilo::Vector>(y, hp.dim_y());
    const auto [accuracy, f1] = hp.eval_metrics(yv);
    *accuracy_out = accuracy;
    *f1_out = f1;
  });
}

namespace {

bilo::LipschitzProfile to_cpp_profile(const bilo_profile& p) {
  bilo::LipschitzProfile out;
  out.M = p.M;
  out.L = p.L;
  out.tau = p.tau;
  out.rho = p.rho;
  out.mu = p.mu;
  out.sigma_f_sq = p.sigma_f_sq;
  out.sigma_g_sq = p.sigma_g_sq;
  out.sigma_g1_sq = p.sigma_g1_sq;
  out.sigma_g2_sq = p.sigma_g2_sq;
  return out;
}

}  // namespace

bilo_status bilo_measure_profile(const bilo_problem* problem, double domain_radius,
                                 bilo_profile* out) {
  return guarded([&] {
    if (problem == nullptr || out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    if (!problem->instance.synthetic) {
      throw bilo::InvalidState("profiles are only measurable on synthetic problems");
    }
    const bilo::LipschitzProfile p =
        bilo::measure_profile(*problem->instance.synthetic, domain_radius);
    *out = {p.M, p.L, p.tau, p.rho, p.mu, p.sigma_f_sq, p.sigma_g_sq, p.sigma_g1_sq,
            p.sigma_g2_sq};
  });
}

bilo_status bilo_l_phi(const bilo_profile* profile, double* out) {
  return guarded([&] {
    if (profile == nullptr || out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    *out = bilo::l_phi(to_cpp_profile(*profile));
  });
}

bilo_status bilo_any_loop_params_get(const bilo_profile* profile, int32_t j_steps,
                                     bilo_any_loop_params* out) {
  return guarded([&] {
    if (profile == nullptr || out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    const bilo::AnyLoopParams p = bilo::any_loop_params(to_cpp_profile(*profile), j_steps);
    *out = {p.alpha, p.beta, p.eta, p.r_v, p.r_w, p.rho_y, p.rho_1, p.rho_2, p.l_31};
  });
}

bilo_status bilo_scaled_loop_params_get(const bilo_profile* profile,
                                        bilo_scaled_loop_params* out) {
  return guarded([&] {
    if (profile == nullptr || out == nullptr) throw bilo::InvalidArgument("null pointer argument");
    const bilo::ScaledLoopParams p = bilo::scaled_loop_params(to_cpp_profile(*profile));
    *out = {p.alpha, p.beta, p.eta, p.rho_1, p.rho_2, p.l_31, p.t_min, p.j_min};
  });
}

bilo_status bilo_experiment_run(const char* config_text, const char* const* overrides,
                                int32_t n_overrides, const char* out_dir,
                                char** summary_path_out) {
  return guarded([&] {
    if (config_text == nullptr) throw bilo::InvalidArgument("null config text");
    const auto override_pairs = parse_overrides(overrides, n_overrides);
    const bilo::ExperimentConfig config = bilo::parse_config(config_text, override_pairs);
    const bilo::ExperimentResult result =
        bilo::run_experiment(config, out_dir == nullptr ? "" : out_dir);
    bool all_diverged = !result.outcomes.empty();
    for (const auto& outcome : result.outcomes) {
      if (!outcome.diverged) all_diverged = false;
    }
    if (all_diverged) {
      throw bilo::DivergenceError("every seed diverged; see " + result.summary_path, -1);
    }
    if (summary_path_out != nullptr) *summary_path_out = dup_string(result.summary_path);
  });
}

bilo_status bilo_constants_report(const char* config_text, const char* const* overrides,
                                  int32_t n_overrides, char** report_out) {
  return guarded([&] {
    if (config_text == nullptr || report_out == nullptr) {
      throw bilo::InvalidArgument("null pointer argument");
    }
    const auto override_pairs = parse_overrides(overrides, n_overrides);
    const bilo::ExperimentConfig config = bilo::parse_config(config_text, override_pairs);
    *report_out = dup_string(bilo::constants_report_for(config));
  });
}

}  // extern "C"
