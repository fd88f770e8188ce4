#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bilo/runner/runner.hpp"

using namespace bilo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bilo_test_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string config_text(const std::string& extra = "") {
  return "[problem]\nkind = synthetic\nw0 = 2,5,7\nn_train = 200\nn_val = 200\n"
         "[algorithm]\nalgorithm = ssgd\nK = 12\n"
         "[run]\nseeds = 1\nrecord_every = 3\n" +
         extra;
}

std::string strip_elapsed(const fs::path& file) {
  std::ifstream is(file);
  REQUIRE(is.good());
  std::ostringstream out;
  std::string line;
  while (std::getline(is, line)) {
    // drop the second comma-separated column (wall time)
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    out << line.substr(0, first) << line.substr(second) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("one seed produces one trace and a summary") {
  TempDir dir;
  const ExperimentConfig config = parse_config(config_text());
  const ExperimentResult result = run_experiment(config, dir.path.string());
  REQUIRE(result.outcomes.size() == 1);
  CHECK(!result.outcomes[0].diverged);
  CHECK(fs::exists(result.outcomes[0].trace_path));
  CHECK(fs::exists(result.summary_path));

  std::ifstream trace(result.outcomes[0].trace_path);
  std::string header;
  std::getline(trace, header);
  CHECK(header == "iter,elapsed_s,phi,grad_norm,gc_f,gc_g,jv_g,hv_g");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(trace, line)) ++rows;
  CHECK(rows == 5);  // k = 0,3,6,9 plus the final state

  std::ifstream summary(result.summary_path);
  std::string content((std::istreambuf_iterator<char>(summary)),
                      std::istreambuf_iterator<char>());
  CHECK(content.find("# diverged: (none)") != std::string::npos);
  CHECK(content.find("grad_norm,") != std::string::npos);
}

TEST_CASE("re-running a config reproduces the trace except wall time") {
  TempDir dir1, dir2;
  const ExperimentConfig config = parse_config(config_text());
  const ExperimentResult r1 = run_experiment(config, dir1.path.string());
  const ExperimentResult r2 = run_experiment(config, dir2.path.string());
  CHECK(strip_elapsed(r1.outcomes[0].trace_path) == strip_elapsed(r2.outcomes[0].trace_path));
}

TEST_CASE("multiple seeds run in the worker pool") {
  TempDir dir;
  const ExperimentConfig config = parse_config(config_text("seeds = 1,2,3,4\n"));
  const ExperimentResult result = run_experiment(config, dir.path.string(), 2);
  CHECK(result.outcomes.size() == 4);
  for (const auto& outcome : result.outcomes) {
    CHECK(!outcome.diverged);
    CHECK(fs::exists(outcome.trace_path));
  }
}

TEST_CASE("divergence is recorded per seed without aborting the experiment") {
  TempDir dir;
  const ExperimentConfig config = parse_config(config_text("") +
                                               "[algorithm]\nalpha = 1000000000\n");
  const ExperimentResult result = run_experiment(config, dir.path.string());
  REQUIRE(result.outcomes.size() == 1);
  CHECK(result.outcomes[0].diverged);
  CHECK(!result.outcomes[0].message.empty());
  std::ifstream summary(result.summary_path);
  std::string content((std::istreambuf_iterator<char>(summary)),
                      std::istreambuf_iterator<char>());
  CHECK(content.find("# diverged: 1") != std::string::npos);
}

TEST_CASE("problems round trip through files") {
  TempDir dir;
  ProblemSpec spec;
  spec.kind = ProblemKind::Synthetic;
  spec.w0 = {2.0, 5.0, 7.0};
  spec.n_train = 100;
  spec.n_val = 100;
  const ProblemInstance instance = build_problem(spec);
  const std::string path = (dir.path / "problem.txt").string();
  save_problem(instance, path);

  const ProblemInstance loaded = load_problem(path);
  REQUIRE(loaded.synthetic.has_value());
  const Vector x = Vector::Ones(3);
  CHECK(loaded.synthetic->grad_phi(x) == instance.synthetic->grad_phi(x));

  // run from the saved file via kind = file
  const std::string text = "[problem]\nkind = file\npath = " + path +
                           "\n[algorithm]\nalgorithm = ttsa\nK = 5\n[run]\nseeds = 1\n";
  TempDir out;
  const ExperimentResult result = run_experiment(parse_config(text), out.path.string());
  CHECK(!result.outcomes[0].diverged);
}

TEST_CASE("constants report renders for synthetic problems only") {
  ExperimentConfig config = parse_config(config_text());
  const std::string report = constants_report_for(config);
  CHECK(report.find("profile:") != std::string::npos);

  config.problem.kind = ProblemKind::Hyperclean;
  config.problem.n_train = 20;
  config.problem.n_val = 20;
  CHECK_THROWS_AS(constants_report_for(config), InvalidArgument);
}

TEST_CASE("hyperclean experiments run end to end") {
  TempDir dir;
  const std::string text =
      "[problem]\nkind = hyperclean\nn_train = 30\nn_val = 30\nd = 4\nclasses = 3\n"
      "[algorithm]\nalgorithm = ssgd\nK = 10\nbatch = 5\nalpha = 0.1\nbeta = 0.05\neta = 0.05\n"
      "[run]\nseeds = 1\nrecord_every = 5\n";
  const ExperimentResult result = run_experiment(parse_config(text), dir.path.string());
  CHECK(!result.outcomes[0].diverged);
  CHECK(result.outcomes[0].final_row.grad_norm >= 0.0);
}
