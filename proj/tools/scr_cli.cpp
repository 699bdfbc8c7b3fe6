// Command-line front end: dataset preparation, experiment runs, schedule
// comparisons, invariant verification, and summary regeneration.
//
// Exit codes: 0 success, 1 run failures, 2 invariant failures.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "scr/common.hpp"
#include "scr/dataset.hpp"
#include "scr/experiment.hpp"
#include "scr/kernels.hpp"

namespace {

void apply_env_overrides(scr::ExperimentSpec& spec) {
  if (const char* dir = std::getenv("SCR_OUTPUT_DIR")) spec.output_dir = dir;
  if (const char* threads = std::getenv("SCR_THREADS")) spec.threads = std::atoi(threads);
}

void apply_cli_overrides(scr::ExperimentSpec& spec, const std::string& output_dir, int threads,
                         int64_t seed, bool zero_time) {
  apply_env_overrides(spec);
  if (!output_dir.empty()) spec.output_dir = output_dir;
  if (threads > 0) spec.threads = threads;
  if (seed >= 0) {
    spec.seeds.clear();
    spec.seeds.push_back(static_cast<uint64_t>(seed));
  }
  if (zero_time) spec.zero_time = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-sampled cubic regularization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string out_path;
  std::string profile = "default";
  std::string libsvm_path;
  std::string dir;
  int threads = 0;
  int64_t seed = -1;
  bool zero_time = false;
  int64_t gaussian_n = 0, gaussian_d = 0;
  int64_t gaussian_seed = 1;

  auto* prepare = app.add_subcommand("prepare", "Generate or convert a dataset");
  prepare->add_option("--gaussian-n", gaussian_n, "synthetic sample count");
  prepare->add_option("--gaussian-d", gaussian_d, "synthetic feature dimension");
  prepare->add_option("--gaussian-seed", gaussian_seed, "synthetic generator seed");
  prepare->add_option("--libsvm", libsvm_path, "libsvm text file to convert");
  prepare->add_option("--out", out_path, "output path (.bin cache or .libsvm text)")
      ->required();

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--output", output_dir, "override the output directory");
  run->add_option("--threads", threads, "worker threads for independent runs");
  run->add_option("--seed", seed, "run a single seed instead of the configured list");
  run->add_flag("--zero-time", zero_time, "zero the wall-clock column for byte-stable CSVs");

  auto* compare = app.add_subcommand("compare-schedules",
                                     "Adaptive vs linear/exponential/full sampling schedules");
  compare->add_option("--config", config_path, "experiment config file")->required();
  compare->add_option("--output", output_dir, "override the output directory");
  compare->add_option("--seed", seed, "seed for the comparison runs");
  compare->add_flag("--zero-time", zero_time, "zero the wall-clock column");

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--profile", profile, "default | negative-control | convex-tail");

  auto* summarize = app.add_subcommand("summarize", "Rebuild summary.csv from trace CSVs");
  summarize->add_option("--dir", dir, "directory of trace CSVs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) {
      scr::Dataset dataset = [&] {
        if (!libsvm_path.empty()) return scr::load_dataset(libsvm_path);
        if (gaussian_n <= 0 || gaussian_d <= 0)
          throw scr::ContractError(
              "prepare: give either --libsvm or --gaussian-n/--gaussian-d");
        return scr::generate_gaussian(
            {gaussian_n, gaussian_d, static_cast<uint64_t>(gaussian_seed)});
      }();
      scr::save_dataset(dataset, out_path);
      std::cout << "wrote " << out_path << " (n=" << dataset.num_samples()
                << ", d=" << dataset.dim() << ")\n";
      return 0;
    }

    if (run->parsed()) {
      scr::ExperimentSpec spec = scr::load_experiment_config(config_path);
      apply_cli_overrides(spec, output_dir, threads, seed, zero_time);
      std::cout << "kernels: " << scr::kernels::isa_name(scr::kernels::active_isa()) << "\n";
      const scr::ExperimentSummary summary = scr::run_experiment(spec, std::cout);
      std::cout << "summary: " << scr::summary_csv_path(spec) << "\n";
      return summary.any_failure ? 1 : 0;
    }

    if (compare->parsed()) {
      scr::ExperimentSpec spec = scr::load_experiment_config(config_path);
      apply_cli_overrides(spec, output_dir, threads, seed, zero_time);
      const scr::ExperimentSummary summary = scr::run_schedule_comparison(spec, std::cout);
      return summary.any_failure ? 1 : 0;
    }

    if (verify->parsed()) {
      const scr::InvariantReport report = scr::verify_suite(profile, std::cout);
      std::cout << (report.all_pass ? "verification passed" : "verification FAILED") << "\n";
      return report.all_pass ? 0 : 2;
    }

    if (summarize->parsed()) {
      scr::summarize_directory(dir, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
