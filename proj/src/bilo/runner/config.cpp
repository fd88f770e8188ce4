#include "bilo/runner/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace bilo {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config " + where + ": " + what);
}

double to_double(const std::string& where, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) fail(where, "trailing characters in number '" + value + "'");
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(where, "expected a number, got '" + value + "'");
  }
}

std::int64_t to_int(const std::string& where, const std::string& value) {
  std::int64_t out = 0;
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end) {
    fail(where, "expected an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& where, const std::string& value) {
  std::uint64_t out = 0;
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end) {
    fail(where, "expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& where, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(where, "expected true or false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> to_double_list(const std::string& where, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(to_double(where, item));
  if (out.empty()) fail(where, "expected a non-empty list");
  return out;
}

std::vector<std::uint64_t> to_u64_list(const std::string& where, const std::string& value) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(value)) out.push_back(to_u64(where, item));
  if (out.empty()) fail(where, "expected a non-empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& where,
                                  const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem.kind",
       [](ExperimentConfig& c, const std::string& w, const std::string& v) {
         if (v == "synthetic") c.problem.kind = ProblemKind::Synthetic;
         else if (v == "hyperclean") c.problem.kind = ProblemKind::Hyperclean;
         else if (v == "file") c.problem.kind = ProblemKind::File;
         else fail(w, "unknown problem kind '" + v + "'");
       }},
      {"problem.w0", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.w0 = to_double_list(w, v); }},
      {"problem.dim", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.dim = to_u64(w, v); }},
      {"problem.n_train", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.n_train = to_u64(w, v); }},
      {"problem.n_val", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.n_val = to_u64(w, v); }},
      {"problem.n_test", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.n_test = to_u64(w, v); }},
      {"problem.r", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.r = to_double(w, v); }},
      {"problem.feature_std", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.feature_std = to_double(w, v); }},
      {"problem.noise_std", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.noise_std = to_double(w, v); }},
      {"problem.feature_scale", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.feature_scale = to_double(w, v); }},
      {"problem.d", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.d = to_u64(w, v); }},
      {"problem.classes", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.classes = to_u64(w, v); }},
      {"problem.corruption", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.corruption = to_double(w, v); }},
      {"problem.ridge", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.ridge = to_double(w, v); }},
      {"problem.centroid_std", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.centroid_std = to_double(w, v); }},
      {"problem.cluster_std", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.cluster_std = to_double(w, v); }},
      {"problem.data_seed", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.data_seed = to_u64(w, v); }},
      {"problem.path", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.problem.path = v; }},
      {"problem.profile_radius", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.problem.profile_radius = to_double(w, v); }},

      {"algorithm.algorithm",
       [](ExperimentConfig& c, const std::string& w, const std::string& v) {
         if (v == "ssgd") c.algorithm.algorithm = AlgorithmKind::Ssgd;
         else if (v == "stocbio") c.algorithm.algorithm = AlgorithmKind::StocBiO;
         else if (v == "bsa") c.algorithm.algorithm = AlgorithmKind::Bsa;
         else if (v == "ttsa") c.algorithm.algorithm = AlgorithmKind::Ttsa;
         else if (v == "alg1") c.algorithm.algorithm = AlgorithmKind::Alg1;
         else fail(w, "unknown algorithm '" + v + "'");
       }},
      {"algorithm.estimator",
       [](ExperimentConfig& c, const std::string& w, const std::string& v) {
         if (v == "bp") c.algorithm.estimator = EstimatorMethod::StochasticBP;
         else if (v == "ns") c.algorithm.estimator = EstimatorMethod::StochasticNS;
         else if (v == "sgd") c.algorithm.estimator = EstimatorMethod::SgdEstimation;
         else fail(w, "unknown estimator '" + v + "'");
       }},
      {"algorithm.warm_start_v", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.warm_start_v = to_bool(w, v); }},
      {"algorithm.warm_start_y",
       [](ExperimentConfig& c, const std::string& w, const std::string& v) {
         if (v == "auto") c.algorithm.warm_start_y.reset();
         else c.algorithm.warm_start_y = to_bool(w, v);
       }},
      {"algorithm.K", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.K = static_cast<int>(to_int(w, v)); }},
      {"algorithm.T", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.T = static_cast<int>(to_int(w, v)); }},
      {"algorithm.J", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.J = static_cast<int>(to_int(w, v)); }},
      {"algorithm.alpha", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.alpha = to_double(w, v); }},
      {"algorithm.beta", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.beta = to_double(w, v); }},
      {"algorithm.eta", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.eta = to_double(w, v); }},
      {"algorithm.batch", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.batch = static_cast<int>(to_int(w, v)); }},
      {"algorithm.S", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.S = static_cast<int>(to_int(w, v)); }},
      {"algorithm.D", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.D = static_cast<int>(to_int(w, v)); }},
      {"algorithm.D_g", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.D_g = static_cast<int>(to_int(w, v)); }},
      {"algorithm.D_f", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.D_f = static_cast<int>(to_int(w, v)); }},
      {"algorithm.d_alpha", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.d_alpha = to_double(w, v); }},
      {"algorithm.d_beta", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.d_beta = to_double(w, v); }},
      {"algorithm.budget", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.algorithm.budget = to_u64(w, v); }},

      {"run.seeds", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.run.seeds = to_u64_list(w, v); }},
      {"run.out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.run.out = v; }},
      {"run.record_every", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.run.record_every = static_cast<int>(to_int(w, v)); }},
      {"run.deterministic", [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.run.deterministic = to_bool(w, v); }},
  };
  return table;
}

void apply(ExperimentConfig& config, const std::string& qualified_key, const std::string& value,
           const std::string& where) {
  const auto it = setters().find(qualified_key);
  if (it == setters().end()) fail(where, "unknown key '" + qualified_key + "'");
  it->second(config, where + " key '" + qualified_key + "'", value);
}

void check_positive(double value, const char* key) {
  if (!(value > 0.0)) throw ConfigError("config validation: '" + std::string(key) + "' must be positive");
}

void check_at_least(std::int64_t value, std::int64_t bound, const char* key) {
  if (value < bound) {
    throw ConfigError("config validation: '" + std::string(key) + "' must be >= " +
                      std::to_string(bound));
  }
}

void validate(ExperimentConfig& config) {
  ProblemSpec& p = config.problem;
  switch (p.kind) {
    case ProblemKind::Synthetic:
      if (p.dim > 0 && p.dim < p.w0.size()) {
        throw ConfigError("config validation: 'dim' is smaller than the length of 'w0'");
      }
      if (p.dim > 0) p.w0.resize(p.dim, p.w0.back());
      if (p.w0.size() < 2) throw ConfigError("config validation: 'w0' needs dimension >= 2");
      check_at_least(static_cast<std::int64_t>(p.n_train), 1, "n_train");
      check_at_least(static_cast<std::int64_t>(p.n_val), 1, "n_val");
      check_positive(p.r, "r");
      check_positive(p.feature_scale, "feature_scale");
      if (p.feature_std < 0.0 || p.noise_std < 0.0) {
        throw ConfigError("config validation: 'feature_std'/'noise_std' must be non-negative");
      }
      break;
    case ProblemKind::Hyperclean:
      check_at_least(static_cast<std::int64_t>(p.n_train), 1, "n_train");
      check_at_least(static_cast<std::int64_t>(p.n_val), 1, "n_val");
      check_at_least(static_cast<std::int64_t>(p.d), 1, "d");
      check_at_least(static_cast<std::int64_t>(p.classes), 1, "classes");
      if (p.corruption < 0.0 || p.corruption > 1.0) {
        throw ConfigError("config validation: 'corruption' must be in [0, 1]");
      }
      check_positive(p.ridge, "ridge");
      break;
    case ProblemKind::File:
      if (p.path.empty()) throw ConfigError("config validation: 'path' is required for kind = file");
      break;
  }
  check_positive(p.profile_radius, "profile_radius");

  AlgorithmSpec& a = config.algorithm;
  check_at_least(a.K, 1, "K");
  check_at_least(a.T, 0, "T");
  check_at_least(a.J, 1, "J");
  if (a.alpha < 0.0) throw ConfigError("config validation: 'alpha' must be non-negative");
  check_positive(a.beta, "beta");
  check_positive(a.eta, "eta");
  check_positive(a.d_alpha, "d_alpha");
  check_positive(a.d_beta, "d_beta");
  check_at_least(a.batch, 1, "batch");
  if (a.S < 0) a.S = a.batch;
  if (a.D < 0) a.D = a.batch;
  if (a.D_g < 0) a.D_g = a.batch;
  if (a.D_f < 0) a.D_f = a.batch;
  check_at_least(a.S, 1, "S");
  check_at_least(a.D, 1, "D");
  check_at_least(a.D_g, 1, "D_g");
  check_at_least(a.D_f, 1, "D_f");

  RunSpec& r = config.run;
  if (r.seeds.empty()) throw ConfigError("config validation: 'seeds' must not be empty");
  check_at_least(r.record_every, 1, "record_every");
  if (r.out.empty()) throw ConfigError("config validation: 'out' must not be empty");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig config;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') fail(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "algorithm" && section != "run") {
        fail(where, "unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(where, "expected key = value");
    if (section.empty()) fail(where, "key outside of a [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(where, "empty key");
    apply(config, section + "." + key, value, where);
  }
  for (const auto& [key, value] : overrides) {
    apply(config, key, value, "override");
  }
  validate(config);
  return config;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream os;
  os.precision(17);
  const ProblemSpec& p = config.problem;
  os << "[problem]\n";
  os << "kind = "
     << (p.kind == ProblemKind::Synthetic
             ? "synthetic"
             : (p.kind == ProblemKind::Hyperclean ? "hyperclean" : "file"))
     << '\n';
  os << "w0 = ";
  for (std::size_t i = 0; i < p.w0.size(); ++i) os << (i ? "," : "") << p.w0[i];
  os << '\n';
  os << "dim = " << p.dim << '\n';
  os << "n_train = " << p.n_train << '\n';
  os << "n_val = " << p.n_val << '\n';
  os << "n_test = " << p.n_test << '\n';
  os << "r = " << p.r << '\n';
  os << "feature_std = " << p.feature_std << '\n';
  os << "noise_std = " << p.noise_std << '\n';
  os << "feature_scale = " << p.feature_scale << '\n';
  os << "d = " << p.d << '\n';
  os << "classes = " << p.classes << '\n';
  os << "corruption = " << p.corruption << '\n';
  os << "ridge = " << p.ridge << '\n';
  os << "centroid_std = " << p.centroid_std << '\n';
  os << "cluster_std = " << p.cluster_std << '\n';
  os << "data_seed = " << p.data_seed << '\n';
  if (!p.path.empty()) os << "path = " << p.path << '\n';
  os << "profile_radius = " << p.profile_radius << '\n';

  const AlgorithmSpec& a = config.algorithm;
  os << "\n[algorithm]\n";
  os << "algorithm = " << algorithm_name(a.algorithm) << '\n';
  os << "estimator = " << estimator_name(a.estimator) << '\n';
  os << "warm_start_v = " << (a.warm_start_v ? "true" : "false") << '\n';
  os << "warm_start_y = "
     << (a.warm_start_y.has_value() ? (*a.warm_start_y ? "true" : "false") : "auto") << '\n';
  os << "K = " << a.K << '\n';
  os << "T = " << a.T << '\n';
  os << "J = " << a.J << '\n';
  os << "alpha = " << a.alpha << '\n';
  os << "beta = " << a.beta << '\n';
  os << "eta = " << a.eta << '\n';
  os << "batch = " << a.batch << '\n';
  os << "S = " << a.S << '\n';
  os << "D = " << a.D << '\n';
  os << "D_g = " << a.D_g << '\n';
  os << "D_f = " << a.D_f << '\n';
  os << "d_alpha = " << a.d_alpha << '\n';
  os << "d_beta = " << a.d_beta << '\n';
  os << "budget = " << a.budget << '\n';

  const RunSpec& r = config.run;
  os << "\n[run]\n";
  os << "seeds = ";
  for (std::size_t i = 0; i < r.seeds.size(); ++i) os << (i ? "," : "") << r.seeds[i];
  os << '\n';
  os << "out = " << r.out << '\n';
  os << "record_every = " << r.record_every << '\n';
  os << "deterministic = " << (r.deterministic ? "true" : "false") << '\n';
  return os.str();
}

const char* algorithm_name(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Ssgd: return "ssgd";
    case AlgorithmKind::StocBiO: return "stocbio";
    case AlgorithmKind::Bsa: return "bsa";
    case AlgorithmKind::Ttsa: return "ttsa";
    case AlgorithmKind::Alg1: return "alg1";
  }
  return "?";
}

}  // namespace bilo
