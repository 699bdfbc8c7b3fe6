#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "scr/common.hpp"
#include "scr/experiment.hpp"

namespace scr {

namespace {

struct ConfigMap {
  std::map<std::string, std::string> values;  // "section.key" -> value
  std::set<std::string> consumed;

  std::optional<std::string> get(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    consumed.insert(key);
    return it->second;
  }

  double get_double(const std::string& key, double fallback) {
    auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    const double parsed = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
      throw ParseError("config: bad numeric value for " + key + ": " + *v);
    return parsed;
  }

  int64_t get_int(const std::string& key, int64_t fallback) {
    auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    const long long parsed = std::strtoll(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0')
      throw ParseError("config: bad integer value for " + key + ": " + *v);
    return parsed;
  }

  bool get_bool(const std::string& key, bool fallback) {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ParseError("config: bad boolean value for " + key + ": " + *v);
  }

  std::string get_string(const std::string& key, std::string fallback) {
    return get(key).value_or(std::move(fallback));
  }
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ConfigMap read_config_map(std::istream& in) {
  ConfigMap map;
  std::string line;
  std::string section;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("config: unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError("config: empty section name", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("config: empty key", line_no);
    if (section.empty()) throw ParseError("config: key outside any section", line_no);
    const std::string full = section + "." + key;
    if (map.values.count(full)) throw ParseError("config: duplicate key " + full, line_no);
    map.values[full] = value;
  }
  return map;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (methods.empty()) throw ContractError("experiment: at least one method required");
  if (seeds.empty()) throw ContractError("experiment: at least one seed required");
  if (lambda < 0.0) throw ContractError("experiment: lambda must be nonnegative");
  if (threads < 1) throw ContractError("experiment: threads must be positive");
  static const std::set<std::string> known{"scr",  "arc",  "scr-linear", "scr-exponential",
                                           "sgd",  "saga", "newton",     "lbfgs"};
  for (const auto& m : methods)
    if (!known.count(m)) throw ContractError("experiment: unknown method " + m);
}

ExperimentSpec parse_experiment_config(std::istream& in) {
  ConfigMap map = read_config_map(in);
  ExperimentSpec spec;

  const std::string source = map.get_string("dataset.source", "gaussian");
  if (source == "gaussian") {
    spec.dataset.kind = DatasetSource::Kind::Gaussian;
    spec.dataset.gaussian.n = map.get_int("dataset.n", 1000);
    spec.dataset.gaussian.d = map.get_int("dataset.d", 20);
    spec.dataset.gaussian.seed = static_cast<uint64_t>(map.get_int("dataset.seed", 1));
  } else if (source == "file") {
    spec.dataset.kind = DatasetSource::Kind::File;
    auto path = map.get("dataset.path");
    if (!path) throw ParseError("config: dataset.path required for source = file");
    spec.dataset.path = *path;
  } else {
    throw ParseError("config: dataset.source must be gaussian or file");
  }

  const std::string reg = map.get_string("loss.regularizer", "l2");
  if (reg == "l2")
    spec.regularizer = RegularizerKind::L2;
  else if (reg == "nonconvex")
    spec.regularizer = RegularizerKind::Nonconvex;
  else
    throw ParseError("config: loss.regularizer must be l2 or nonconvex");
  spec.lambda = map.get_double("loss.lambda", spec.lambda);

  if (auto methods = map.get("run.methods")) spec.methods = split_list(*methods);
  if (auto seeds = map.get("run.seeds")) {
    spec.seeds.clear();
    for (const auto& s : split_list(*seeds))
      spec.seeds.push_back(static_cast<uint64_t>(std::strtoull(s.c_str(), nullptr, 10)));
  }
  spec.output_dir = map.get_string("run.output_dir", spec.output_dir);
  spec.zero_time = map.get_bool("run.zero_time", spec.zero_time);
  spec.subopt_target = map.get_double("run.suboptimality_target", spec.subopt_target);
  spec.threads = static_cast<int>(map.get_int("run.threads", spec.threads));
  spec.scr.max_iterations = map.get_int("run.max_iterations", spec.scr.max_iterations);
  spec.scr.grad_tol = map.get_double("run.grad_tol", spec.scr.grad_tol);

  spec.scr.gamma = map.get_double("scr.gamma", spec.scr.gamma);
  spec.scr.eta1 = map.get_double("scr.eta1", spec.scr.eta1);
  spec.scr.eta2 = map.get_double("scr.eta2", spec.scr.eta2);
  spec.scr.sigma0 = map.get_double("scr.sigma0", spec.scr.sigma0);
  spec.scr.epsilon_m = map.get_double("scr.epsilon_m", spec.scr.epsilon_m);
  spec.scr.kappa_theta = map.get_double("scr.kappa_theta", spec.scr.kappa_theta);
  spec.scr.sampled_rho = map.get_bool("scr.sampled_rho", spec.scr.sampled_rho);
  spec.scr.max_krylov_dim =
      static_cast<int>(map.get_int("scr.max_krylov_dim", spec.scr.max_krylov_dim));
  spec.scr.grad_check_stride = map.get_int("scr.grad_check_stride", spec.scr.grad_check_stride);

  const std::string mode = map.get_string("sampling.mode", "practical");
  if (mode == "practical")
    spec.scr.sampling.mode = SamplingMode::Practical;
  else if (mode == "theoretical")
    spec.scr.sampling.mode = SamplingMode::Theoretical;
  else
    throw ParseError("config: sampling.mode must be practical or theoretical");
  spec.scr.sampling.grad_agreement =
      map.get_double("sampling.grad_agreement", spec.scr.sampling.grad_agreement);
  spec.scr.sampling.hess_agreement =
      map.get_double("sampling.hess_agreement", spec.scr.sampling.hess_agreement);
  spec.scr.sampling.kappa_f = map.get_double("sampling.kappa_f", spec.scr.sampling.kappa_f);
  spec.scr.sampling.kappa_g = map.get_double("sampling.kappa_g", spec.scr.sampling.kappa_g);
  spec.scr.sampling.delta = map.get_double("sampling.delta", spec.scr.sampling.delta);
  spec.scr.sampling.floor_fraction =
      map.get_double("sampling.floor_fraction", spec.scr.sampling.floor_fraction);

  spec.sgd.step_size = map.get_double("sgd.step_size", 0.0);
  spec.sgd_step_grid = spec.sgd.step_size == 0.0;
  spec.sgd.minibatch_fraction =
      map.get_double("sgd.minibatch_fraction", spec.sgd.minibatch_fraction);
  spec.sgd.max_iterations = map.get_int("sgd.max_iterations", spec.sgd.max_iterations);
  spec.sgd.record_stride = map.get_int("sgd.record_stride", spec.sgd.record_stride);

  spec.saga.step_size = map.get_double("saga.step_size", 0.0);
  spec.saga_step_grid = spec.saga.step_size == 0.0;
  spec.saga.max_iterations = map.get_int("saga.max_iterations", spec.saga.max_iterations);
  spec.saga.record_stride = map.get_int("saga.record_stride", spec.saga.record_stride);

  spec.newton.max_iterations = map.get_int("newton.max_iterations", spec.newton.max_iterations);
  spec.newton.grad_tol = map.get_double("newton.grad_tol", spec.scr.grad_tol);

  spec.lbfgs.memory = static_cast<int>(map.get_int("lbfgs.memory", spec.lbfgs.memory));
  spec.lbfgs.max_iterations = map.get_int("lbfgs.max_iterations", spec.lbfgs.max_iterations);
  spec.lbfgs.grad_tol = map.get_double("lbfgs.grad_tol", spec.scr.grad_tol);

  for (const auto& [key, value] : map.values)
    if (!map.consumed.count(key)) throw ParseError("config: unknown key " + key);

  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  return parse_experiment_config(in);
}

}  // namespace scr
