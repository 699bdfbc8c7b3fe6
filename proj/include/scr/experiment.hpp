#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scr/baselines.hpp"
#include "scr/dataset.hpp"
#include "scr/objective.hpp"
#include "scr/scr_solver.hpp"

namespace scr {

struct DatasetSource {
  enum class Kind { Gaussian, File };
  Kind kind = Kind::Gaussian;
  GaussianSpec gaussian{1000, 20, 1};
  std::string path;  // libsvm text or binary cache, by extension
};

struct ExperimentSpec {
  DatasetSource dataset;
  RegularizerKind regularizer = RegularizerKind::L2;
  double lambda = 1e-3;
  // Method names: scr, arc, scr-linear, scr-exponential, sgd, saga, newton, lbfgs.
  std::vector<std::string> methods;
  std::vector<uint64_t> seeds{0};
  std::string output_dir = "out";
  bool zero_time = false;            // reproducible CSV bytes
  double subopt_target = 1e-6;       // epochs-to-target column in the summary
  int threads = 1;

  ScrConfig scr;  // shared by scr/arc and the fixed-schedule variants
  SgdConfig sgd;
  bool sgd_step_grid = true;  // sweep {1,.1,.01,.001}/L_hat when step_size == 0
  SagaConfig saga;
  bool saga_step_grid = true;
  NewtonConfig newton;
  LbfgsConfig lbfgs;

  void validate() const;
};

/// Flat key-value text with [sections]; '#' comments. Unknown keys are
/// rejected. See README for the schema.
ExperimentSpec parse_experiment_config(std::istream& in);
ExperimentSpec load_experiment_config(const std::string& path);

Dataset load_experiment_dataset(const DatasetSource& source);

struct RunOutcome {
  std::string method;
  uint64_t seed = 0;
  bool failed = false;
  std::string error;
  RunStatus status = RunStatus::MaxIterations;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  double epochs = 0.0;
  double wall_seconds = 0.0;
  std::string csv_path;
  Trace trace;
};

struct MethodSummary {
  std::string method;
  int runs = 0;
  int failures = 0;
  double best_f = 0.0;
  double median_final_subopt = 0.0;
  double mean_final_subopt = 0.0;
  double median_epochs_to_target = std::numeric_limits<double>::quiet_NaN();
  double mean_wall_seconds = 0.0;
  std::string notes;
};

struct ExperimentSummary {
  double f_star = 0.0;  // best f across every run plus an ARC polish run
  std::vector<MethodSummary> methods;
  std::vector<RunOutcome> runs;
  bool any_failure = false;
};

/// Executes every (method, seed) pair, writes one trace CSV per run plus
/// summary.csv under spec.output_dir.
ExperimentSummary run_experiment(const ExperimentSpec& spec, std::ostream& log);

/// Adaptive vs linear vs exponential vs full-sample schedules on one
/// dataset. The fixed schedules are tuned to reach n at the iteration count
/// the adaptive run actually used.
ExperimentSummary run_schedule_comparison(const ExperimentSpec& spec, std::ostream& log);

/// Property-suite profiles: "default", "negative-control", "convex-tail".
InvariantReport verify_suite(const std::string& profile, std::ostream& log);

/// Rebuilds summary.csv from the trace CSVs inside a directory.
void summarize_directory(const std::string& dir, std::ostream& log);

std::string summary_csv_path(const ExperimentSpec& spec);

}  // namespace scr
