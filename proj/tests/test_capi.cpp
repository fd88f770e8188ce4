#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bilo/bilo.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bilo_capi_" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const double kW0[3] = {2.0, 5.0, 7.0};

bilo_problem* make_problem() {
  bilo_problem* problem = nullptr;
  REQUIRE(bilo_problem_synthetic(kW0, 3, 200, 200, 0.5, 0.1, 1.0, 1.0, 1, &problem) == BILO_OK);
  return problem;
}

const char* kRunConfig =
    "[problem]\nkind = synthetic\nw0 = 2,5,7\n"
    "[algorithm]\nalgorithm = ssgd\nK = 10\nT = 2\nJ = 3\n"
    "[run]\nseeds = 1\n";

}  // namespace

TEST_CASE("version and error strings are always available") {
  CHECK(bilo_version() != nullptr);
  CHECK(bilo_last_error() != nullptr);
}

TEST_CASE("synthetic problem handles expose dimensions and closed forms") {
  bilo_problem* problem = make_problem();
  CHECK(bilo_problem_dim_x(problem) == 3);
  CHECK(bilo_problem_dim_y(problem) == 3);

  const double x[3] = {1.0, 1.0, 1.0};
  double ys[3] = {0, 0, 0};
  double grad[3] = {0, 0, 0};
  double phi = 0.0;
  CHECK(bilo_synthetic_y_star(problem, x, ys) == BILO_OK);
  CHECK(bilo_synthetic_grad_phi(problem, x, grad) == BILO_OK);
  CHECK(bilo_synthetic_phi(problem, x, &phi) == BILO_OK);
  CHECK(std::isfinite(phi));
  for (const double value : ys) CHECK(std::isfinite(value));
  for (const double value : grad) CHECK(std::isfinite(value));
  bilo_problem_free(problem);
}

TEST_CASE("null arguments produce invalid-argument errors with messages") {
  CHECK(bilo_problem_synthetic(nullptr, 3, 10, 10, 0.5, 0.1, 1.0, 1.0, 1, nullptr) ==
        BILO_ERROR_INVALID_ARGUMENT);
  CHECK(std::string(bilo_last_error()).size() > 0);
  bilo_problem* problem = make_problem();
  CHECK(bilo_synthetic_y_star(problem, nullptr, nullptr) == BILO_ERROR_INVALID_ARGUMENT);
  bilo_problem_free(problem);
}

TEST_CASE("closed forms reject non-synthetic problems") {
  bilo_problem* problem = nullptr;
  REQUIRE(bilo_problem_hyperclean(20, 20, 20, 4, 3, 0.3, 1e-3, 1, &problem) == BILO_OK);
  CHECK(bilo_problem_dim_x(problem) == 20);
  CHECK(bilo_problem_dim_y(problem) == 12);
  double x[20] = {0};
  double out[12] = {0};
  CHECK(bilo_synthetic_y_star(problem, x, out) == BILO_ERROR_INVALID_STATE);
  bilo_problem_free(problem);
}

TEST_CASE("runs produce traces with the loop-accounting counters") {
  bilo_problem* problem = make_problem();
  bilo_trace* trace = nullptr;
  REQUIRE(bilo_run(problem, kRunConfig, 7, 0, &trace) == BILO_OK);
  const int64_t rows = bilo_trace_num_rows(trace);
  CHECK(rows == 11);
  bilo_trace_row last;
  REQUIRE(bilo_trace_get(trace, rows - 1, &last) == BILO_OK);
  CHECK(last.iter == 10);
  CHECK(last.gc_f == 10 * (3 + 1) * 5);
  CHECK(last.gc_g == 10 * 2 * 5);
  CHECK(last.jv_g == 10 * 5);
  CHECK(last.hv_g == 10 * 3 * 5);

  bilo_trace_row out_of_range;
  CHECK(bilo_trace_get(trace, rows, &out_of_range) == BILO_ERROR_INVALID_ARGUMENT);
  bilo_trace_free(trace);
  bilo_problem_free(problem);
}

TEST_CASE("identical seeds reproduce identical traces") {
  bilo_problem* problem = make_problem();
  bilo_trace* t1 = nullptr;
  bilo_trace* t2 = nullptr;
  REQUIRE(bilo_run(problem, kRunConfig, 9, 0, &t1) == BILO_OK);
  REQUIRE(bilo_run(problem, kRunConfig, 9, 0, &t2) == BILO_OK);
  REQUIRE(bilo_trace_num_rows(t1) == bilo_trace_num_rows(t2));
  for (int64_t i = 0; i < bilo_trace_num_rows(t1); ++i) {
    bilo_trace_row a, b;
    REQUIRE(bilo_trace_get(t1, i, &a) == BILO_OK);
    REQUIRE(bilo_trace_get(t2, i, &b) == BILO_OK);
    CHECK(a.phi == b.phi);
    CHECK(a.grad_norm == b.grad_norm);
    CHECK(a.gc_f == b.gc_f);
  }
  bilo_trace_free(t1);
  bilo_trace_free(t2);
  bilo_problem_free(problem);
}

TEST_CASE("trace csv output lands on disk") {
  TempDir dir;
  bilo_problem* problem = make_problem();
  bilo_trace* trace = nullptr;
  REQUIRE(bilo_run(problem, kRunConfig, 7, 1, &trace) == BILO_OK);
  const std::string path = (dir.path / "trace.csv").string();
  CHECK(bilo_trace_write_csv(trace, path.c_str()) == BILO_OK);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "iter,elapsed_s,phi,grad_norm,gc_f,gc_g,jv_g,hv_g");
  bilo_trace_free(trace);
  bilo_problem_free(problem);
}

TEST_CASE("problem files round trip through the handle API") {
  TempDir dir;
  bilo_problem* problem = make_problem();
  const std::string path = (dir.path / "problem.txt").string();
  REQUIRE(bilo_problem_save(problem, path.c_str()) == BILO_OK);

  bilo_problem* loaded = nullptr;
  REQUIRE(bilo_problem_load(path.c_str(), &loaded) == BILO_OK);
  const double x[3] = {0.5, -0.25, 1.5};
  double g1[3], g2[3];
  REQUIRE(bilo_synthetic_grad_phi(problem, x, g1) == BILO_OK);
  REQUIRE(bilo_synthetic_grad_phi(loaded, x, g2) == BILO_OK);
  for (int i = 0; i < 3; ++i) CHECK(g1[i] == g2[i]);
  bilo_problem_free(loaded);
  bilo_problem_free(problem);

  CHECK(bilo_problem_load((dir.path / "missing.txt").string().c_str(), &loaded) ==
        BILO_ERROR_IO);
}

TEST_CASE("experiment entry point writes the summary") {
  TempDir dir;
  const char* config =
      "[problem]\nkind = synthetic\nw0 = 2,5,7\nn_train = 100\nn_val = 100\n"
      "[algorithm]\nalgorithm = ttsa\nK = 20\n"
      "[run]\nseeds = 1,2\n";
  const char* overrides[] = {"algorithm.K=10"};
  char* summary = nullptr;
  REQUIRE(bilo_experiment_run(config, overrides, 1, dir.path.string().c_str(), &summary) ==
          BILO_OK);
  REQUIRE(summary != nullptr);
  CHECK(fs::exists(summary));
  bilo_string_free(summary);

  CHECK(bilo_experiment_run("[problem]\nbroken", nullptr, 0, nullptr, nullptr) ==
        BILO_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("constants report renders through the C surface") {
  const char* config =
      "[problem]\nkind = synthetic\nw0 = 2,5,7\nn_train = 200\nn_val = 200\n"
      "[algorithm]\nalgorithm = ssgd\n[run]\nseeds = 1\n";
  char* report = nullptr;
  REQUIRE(bilo_constants_report(config, nullptr, 0, &report) == BILO_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("L_Phi") != std::string::npos);
  bilo_string_free(report);
}

TEST_CASE("regularity profiles and prescriptions flow through the C surface") {
  bilo_problem* problem = make_problem();
  bilo_profile profile;
  REQUIRE(bilo_measure_profile(problem, 1.0, &profile) == BILO_OK);
  CHECK(profile.mu > 0.0);
  CHECK(profile.L >= profile.mu);
  CHECK(profile.tau == 0.0);
  CHECK(profile.rho == 0.0);

  double smoothness = 0.0;
  REQUIRE(bilo_l_phi(&profile, &smoothness) == BILO_OK);
  CHECK(smoothness > 0.0);

  bilo_any_loop_params any_params;
  REQUIRE(bilo_any_loop_params_get(&profile, 2, &any_params) == BILO_OK);
  CHECK(any_params.eta == doctest::Approx(1.0 / (2.0 * profile.L)));
  CHECK(any_params.alpha > 0.0);

  bilo_scaled_loop_params scaled;
  REQUIRE(bilo_scaled_loop_params_get(&profile, &scaled) == BILO_OK);
  CHECK(scaled.t_min >= 1);
  CHECK(scaled.j_min >= 1);
  bilo_problem_free(problem);

  bilo_problem* blobs = nullptr;
  REQUIRE(bilo_problem_hyperclean(20, 20, 20, 4, 3, 0.3, 1e-3, 1, &blobs) == BILO_OK);
  CHECK(bilo_measure_profile(blobs, 1.0, &profile) == BILO_ERROR_INVALID_STATE);
  bilo_problem_free(blobs);
}

TEST_CASE("hyperclean metrics flow through the C surface") {
  bilo_problem* blobs = nullptr;
  REQUIRE(bilo_problem_hyperclean(30, 30, 30, 4, 3, 0.0, 1e-3, 5, &blobs) == BILO_OK);
  std::vector<double> y(static_cast<std::size_t>(bilo_problem_dim_y(blobs)), 0.0);
  double accuracy = -1.0, f1 = -1.0;
  REQUIRE(bilo_hyperclean_metrics(blobs, y.data(), &accuracy, &f1) == BILO_OK);
  CHECK(accuracy >= 0.0);
  CHECK(accuracy <= 1.0);
  CHECK(f1 >= 0.0);
  bilo_problem_free(blobs);

  bilo_problem* quad = make_problem();
  CHECK(bilo_hyperclean_metrics(quad, y.data(), &accuracy, &f1) == BILO_ERROR_INVALID_STATE);
  bilo_problem_free(quad);
}
