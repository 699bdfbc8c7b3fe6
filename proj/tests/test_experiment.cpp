#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "scr/common.hpp"
#include "scr/experiment.hpp"
#include "scr/trace.hpp"

using namespace scr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

constexpr const char* kTinyConfig = R"(
# tiny smoke experiment
[dataset]
source = gaussian
n = 200
d = 8
seed = 5

[loss]
regularizer = l2
lambda = 1e-3

[run]
methods = scr, arc
seeds = 1, 2
max_iterations = 40
grad_tol = 1e-8
zero_time = true
suboptimality_target = 1e-6

[scr]
sigma0 = 1
eta1 = 0.2
eta2 = 0.8
gamma = 2
)";

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(kTinyConfig);
  const ExperimentSpec spec = parse_experiment_config(in);
  CHECK(spec.dataset.kind == DatasetSource::Kind::Gaussian);
  CHECK(spec.dataset.gaussian.n == 200);
  CHECK(spec.dataset.gaussian.d == 8);
  CHECK(spec.methods == std::vector<std::string>{"scr", "arc"});
  CHECK(spec.seeds == std::vector<uint64_t>{1, 2});
  CHECK(spec.scr.max_iterations == 40);
  CHECK(spec.zero_time);
  CHECK(spec.lambda == 1e-3);
}

TEST_CASE("config rejects unknown keys and bad specs") {
  {
    std::istringstream in("[dataset]\nsource = gaussian\nbanana = 3\n");
    CHECK_THROWS_AS(parse_experiment_config(in), ParseError);
  }
  {
    std::istringstream in("[run]\nmethods = warp-drive\n");
    CHECK_THROWS_AS(parse_experiment_config(in), ContractError);
  }
  {
    ExperimentSpec spec;
    spec.methods.clear();  // zero methods
    CHECK_THROWS_AS(spec.validate(), ContractError);
  }
  {
    std::istringstream in("methods = scr\n");  // key outside a section
    CHECK_THROWS_AS(parse_experiment_config(in), ParseError);
  }
}

TEST_CASE("run_experiment writes one csv per run plus a summary") {
  std::istringstream in(kTinyConfig);
  ExperimentSpec spec = parse_experiment_config(in);
  const fs::path dir = fresh_dir("scr_exp_smoke");
  spec.output_dir = dir.string();

  std::ostringstream log;
  const ExperimentSummary summary = run_experiment(spec, log);
  CHECK(!summary.any_failure);

  CHECK(fs::exists(dir / "scr_seed1.csv"));
  CHECK(fs::exists(dir / "scr_seed2.csv"));
  CHECK(fs::exists(dir / "arc_seed1.csv"));
  CHECK(fs::exists(dir / "arc_seed2.csv"));
  CHECK(fs::exists(dir / "summary.csv"));

  // Suboptimality is nonnegative by construction of the f* proxy.
  for (const auto& ms : summary.methods) {
    CHECK(ms.median_final_subopt >= 0.0);
    CHECK(ms.runs == 2);
    CHECK(ms.failures == 0);
  }

  // Traces validate against the schema.
  for (const auto& name : {"scr_seed1.csv", "arc_seed1.csv"}) {
    std::ifstream trace_in(dir / name);
    CHECK_NOTHROW(validate_trace_schema(trace_in));
  }

  // ARC is deterministic: both seeds produce byte-identical traces.
  CHECK(slurp(dir / "arc_seed1.csv") == slurp(dir / "arc_seed2.csv"));

  fs::remove_all(dir);
}

TEST_CASE("repeated runs produce byte-identical outputs") {
  std::istringstream in(kTinyConfig);
  ExperimentSpec spec = parse_experiment_config(in);

  const fs::path dir_a = fresh_dir("scr_exp_repeat_a");
  const fs::path dir_b = fresh_dir("scr_exp_repeat_b");
  std::ostringstream log;

  spec.output_dir = dir_a.string();
  run_experiment(spec, log);
  spec.output_dir = dir_b.string();
  run_experiment(spec, log);

  for (const auto& name : {"scr_seed1.csv", "scr_seed2.csv", "arc_seed1.csv", "summary.csv"})
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("worker pool matches sequential execution") {
  std::istringstream in(kTinyConfig);
  ExperimentSpec spec = parse_experiment_config(in);

  const fs::path dir_seq = fresh_dir("scr_exp_seq");
  const fs::path dir_par = fresh_dir("scr_exp_par");
  std::ostringstream log;

  spec.threads = 1;
  spec.output_dir = dir_seq.string();
  run_experiment(spec, log);
  spec.threads = 4;
  spec.output_dir = dir_par.string();
  run_experiment(spec, log);

  for (const auto& name : {"scr_seed1.csv", "scr_seed2.csv", "summary.csv"})
    CHECK(slurp(dir_seq / name) == slurp(dir_par / name));

  fs::remove_all(dir_seq);
  fs::remove_all(dir_par);
}

TEST_CASE("ten seeds give ten csvs") {
  ExperimentSpec spec;
  spec.dataset.gaussian = {150, 6, 9};
  spec.methods = {"scr"};
  spec.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  spec.scr.max_iterations = 15;
  spec.zero_time = true;
  const fs::path dir = fresh_dir("scr_exp_tenseeds");
  spec.output_dir = dir.string();

  std::ostringstream log;
  const ExperimentSummary summary = run_experiment(spec, log);
  int csvs = 0;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().filename().string().rfind("scr_seed", 0) == 0) ++csvs;
  CHECK(csvs == 10);
  CHECK(summary.methods.at(0).runs == 10);
  fs::remove_all(dir);
}

TEST_CASE("schedule comparison emits all four schedules") {
  ExperimentSpec spec;
  spec.dataset.gaussian = {400, 10, 11};
  spec.methods = {"scr"};
  spec.seeds = {3};
  spec.scr.max_iterations = 60;
  spec.scr.grad_tol = 1e-8;
  spec.zero_time = true;
  spec.subopt_target = 1e-6;
  const fs::path dir = fresh_dir("scr_exp_schedules");
  spec.output_dir = dir.string();

  std::ostringstream log;
  const ExperimentSummary summary = run_schedule_comparison(spec, log);
  CHECK(summary.methods.size() == 4);

  const Trace adaptive = read_trace_csv((dir / "scr_seed3.csv").string());
  const Trace linear = read_trace_csv((dir / "scr-linear_seed3.csv").string());
  const Trace full = read_trace_csv((dir / "arc_seed3.csv").string());

  // Full-sample mode pins every size to n.
  for (const auto& r : full.records) {
    CHECK(r.grad_samples == 400);
    CHECK(r.hess_samples == 400);
  }
  // The linear schedule reaches n exactly at its final iteration.
  CHECK(linear.records.back().grad_samples == 400);
  // The adaptive schedule reaches the full sample size by termination.
  CHECK(adaptive.records.back().grad_samples == 400);
  CHECK(adaptive.records.back().hess_samples == 400);

  fs::remove_all(dir);
}

TEST_CASE("summarize_directory rebuilds the summary") {
  ExperimentSpec spec;
  spec.dataset.gaussian = {150, 6, 13};
  spec.methods = {"scr"};
  spec.seeds = {1};
  spec.scr.max_iterations = 10;
  spec.zero_time = true;
  const fs::path dir = fresh_dir("scr_exp_summarize");
  spec.output_dir = dir.string();

  std::ostringstream log;
  run_experiment(spec, log);
  const std::string original = slurp(dir / "summary.csv");
  fs::remove(dir / "summary.csv");
  summarize_directory(dir.string(), log);
  CHECK(fs::exists(dir / "summary.csv"));
  // The rebuilt summary has the same schema header.
  const std::string rebuilt = slurp(dir / "summary.csv");
  CHECK(rebuilt.substr(0, rebuilt.find('\n')) == original.substr(0, original.find('\n')));

  fs::remove_all(dir);
}
