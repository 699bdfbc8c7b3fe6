#include "scr/experiment.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include "scr/common.hpp"
#include "scr/sampling.hpp"
#include "scr/subproblem.hpp"
#include "scr/trace.hpp"

namespace scr {

namespace fs = std::filesystem;

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

ScrConfig scr_config_for(const ExperimentSpec& spec, const std::string& method, uint64_t seed,
                         int64_t schedule_total) {
  ScrConfig cfg = spec.scr;
  cfg.seed = seed;
  if (method == "arc") {
    cfg.schedule = SampleSchedule::Full;
  } else if (method == "scr-linear") {
    cfg.schedule = SampleSchedule::Linear;
    cfg.schedule_total = schedule_total;
  } else if (method == "scr-exponential") {
    cfg.schedule = SampleSchedule::Exponential;
    cfg.schedule_total = schedule_total;
  } else {
    cfg.schedule = SampleSchedule::Adaptive;
  }
  return cfg;
}

RunOutcome execute_run(const Objective& objective, const ExperimentSpec& spec,
                       const std::string& method, uint64_t seed, int64_t schedule_total) {
  RunOutcome outcome;
  outcome.method = method;
  outcome.seed = seed;
  try {
    RunResult result;
    if (method == "sgd") {
      SgdConfig cfg = spec.sgd;
      cfg.seed = seed;
      result = sgd_run(objective, cfg);
    } else if (method == "saga") {
      SagaConfig cfg = spec.saga;
      cfg.seed = seed;
      result = saga_run(objective, cfg);
    } else if (method == "newton") {
      result = newton_ls_run(objective, spec.newton);
    } else if (method == "lbfgs") {
      result = lbfgs_run(objective, spec.lbfgs);
    } else {
      result = scr_run(objective, scr_config_for(spec, method, seed, schedule_total));
    }
    outcome.status = result.status;
    outcome.final_f = result.final_f;
    outcome.final_grad_norm = result.final_grad_norm;
    outcome.epochs = result.trace.records.empty() ? 0.0 : result.trace.records.back().epochs;
    outcome.wall_seconds =
        result.trace.records.empty() ? 0.0 : result.trace.records.back().seconds;
    outcome.trace = std::move(result.trace);
    outcome.failed = result.status == RunStatus::Failed || result.status == RunStatus::Diverged;
    outcome.error = result.message;
  } catch (const std::exception& e) {
    outcome.failed = true;
    outcome.error = e.what();
  }
  return outcome;
}

double best_f_in(const RunOutcome& outcome) {
  double best = std::numeric_limits<double>::infinity();
  if (std::isfinite(outcome.final_f)) best = outcome.final_f;
  for (const auto& r : outcome.trace.records)
    if (std::isfinite(r.f_full)) best = std::min(best, r.f_full);
  return best;
}

double polish_f_star(const Objective& objective, const ExperimentSpec& spec) {
  ScrConfig cfg = spec.scr;
  cfg.schedule = SampleSchedule::Full;
  cfg.grad_tol = std::min(spec.scr.grad_tol, 1e-12);
  cfg.max_iterations = std::max<int64_t>(spec.scr.max_iterations, 200);
  cfg.seed = 0;
  const RunResult polish = scr_run(objective, cfg);
  return polish.final_f;
}

void sweep_step_size(const Objective& objective, const ExperimentSpec& spec, bool for_saga,
                     double* step_out, std::string* note, std::ostream& log) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(objective.dim());
  const double l_hat = std::max(estimate_hessian_norm(objective, x0, 50, 7), 1e-12);
  double best_f = std::numeric_limits<double>::infinity();
  double best_step = 1.0 / l_hat;
  for (double scale : {1.0, 0.1, 0.01, 0.001}) {
    const double step = scale / l_hat;
    double f;
    if (for_saga) {
      SagaConfig cfg = spec.saga;
      cfg.step_size = step;
      cfg.seed = spec.seeds.front();
      f = saga_run(objective, cfg).final_f;
    } else {
      SgdConfig cfg = spec.sgd;
      cfg.step_size = step;
      cfg.seed = spec.seeds.front();
      f = sgd_run(objective, cfg).final_f;
    }
    if (std::isfinite(f) && f < best_f) {
      best_f = f;
      best_step = step;
    }
  }
  *step_out = best_step;
  *note = "step=" + format_double(best_step);
  log << (for_saga ? "saga" : "sgd") << ": grid-swept step size " << best_step
      << " (norm estimate " << l_hat << ")\n";
}

ExperimentSummary summarize_outcomes(const ExperimentSpec& spec,
                                     const std::vector<std::string>& method_order,
                                     std::vector<RunOutcome> outcomes, double f_star,
                                     const std::map<std::string, std::string>& notes) {
  ExperimentSummary summary;
  summary.f_star = f_star;
  for (const auto& method : method_order) {
    MethodSummary ms;
    ms.method = method;
    ms.best_f = std::numeric_limits<double>::infinity();
    std::vector<double> subopts, epochs_to_target, walls;
    for (const auto& outcome : outcomes) {
      if (outcome.method != method) continue;
      ms.runs += 1;
      if (outcome.failed) {
        ms.failures += 1;
        summary.any_failure = true;
        continue;
      }
      ms.best_f = std::min(ms.best_f, best_f_in(outcome));
      subopts.push_back(std::max(outcome.final_f - f_star, 0.0));
      walls.push_back(outcome.wall_seconds);
      double reached = std::numeric_limits<double>::quiet_NaN();
      for (const auto& r : outcome.trace.records) {
        if (r.f_full - f_star <= spec.subopt_target) {
          reached = r.epochs;
          break;
        }
      }
      if (std::isfinite(reached)) epochs_to_target.push_back(reached);
    }
    ms.median_final_subopt = median(subopts);
    ms.mean_final_subopt = mean(subopts);
    ms.median_epochs_to_target = median(epochs_to_target);
    ms.mean_wall_seconds = mean(walls);
    if (auto it = notes.find(method); it != notes.end()) ms.notes = it->second;
    summary.methods.push_back(std::move(ms));
  }
  summary.runs = std::move(outcomes);
  return summary;
}

void write_summary_csv(const ExperimentSummary& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "method,runs,failures,best_f,median_final_subopt,mean_final_subopt,"
         "median_epochs_to_target,mean_wall_seconds,notes\n";
  for (const auto& ms : summary.methods) {
    out << ms.method << ',' << ms.runs << ',' << ms.failures << ',' << format_double(ms.best_f)
        << ',' << format_double(ms.median_final_subopt) << ','
        << format_double(ms.mean_final_subopt) << ','
        << format_double(ms.median_epochs_to_target) << ','
        << format_double(ms.mean_wall_seconds) << ',' << ms.notes << '\n';
  }
}

std::vector<RunOutcome> run_all(const Objective& objective, const ExperimentSpec& spec,
                                const std::vector<std::pair<std::string, uint64_t>>& tasks,
                                int64_t schedule_total) {
  std::vector<RunOutcome> outcomes(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      outcomes[i] = execute_run(objective, spec, tasks[i].first, tasks[i].second, schedule_total);
    }
  };
  const int thread_count = std::min<int>(spec.threads, static_cast<int>(tasks.size()));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return outcomes;
}

void write_outcome_csvs(std::vector<RunOutcome>& outcomes, const ExperimentSpec& spec) {
  fs::create_directories(spec.output_dir);
  for (auto& outcome : outcomes) {
    if (outcome.failed && outcome.trace.records.empty()) continue;  // nothing to write
    const std::string path = (fs::path(spec.output_dir) /
                              (outcome.method + "_seed" + std::to_string(outcome.seed) + ".csv"))
                                 .string();
    write_trace_csv(outcome.trace, path, spec.zero_time);
    outcome.csv_path = path;
  }
}

}  // namespace

Dataset load_experiment_dataset(const DatasetSource& source) {
  if (source.kind == DatasetSource::Kind::Gaussian) return generate_gaussian(source.gaussian);
  return load_dataset(source.path);
}

std::string summary_csv_path(const ExperimentSpec& spec) {
  return (fs::path(spec.output_dir) / "summary.csv").string();
}

ExperimentSummary run_experiment(const ExperimentSpec& spec_in, std::ostream& log) {
  ExperimentSpec spec = spec_in;
  spec.validate();
  const Dataset dataset = load_experiment_dataset(spec.dataset);
  const ObjectiveModel objective(dataset, spec.regularizer, spec.lambda);
  log << "dataset: n=" << dataset.num_samples() << " d=" << dataset.dim()
      << (dataset.is_dense() ? " dense" : " sparse") << "\n";

  std::map<std::string, std::string> notes;
  const bool wants_sgd =
      std::find(spec.methods.begin(), spec.methods.end(), "sgd") != spec.methods.end();
  const bool wants_saga =
      std::find(spec.methods.begin(), spec.methods.end(), "saga") != spec.methods.end();
  if (wants_sgd && spec.sgd_step_grid)
    sweep_step_size(objective, spec, false, &spec.sgd.step_size, &notes["sgd"], log);
  if (wants_saga && spec.saga_step_grid)
    sweep_step_size(objective, spec, true, &spec.saga.step_size, &notes["saga"], log);

  std::vector<std::pair<std::string, uint64_t>> tasks;
  for (const auto& method : spec.methods)
    for (uint64_t seed : spec.seeds) tasks.emplace_back(method, seed);

  const int64_t schedule_total = spec.scr.schedule_total > 0 ? spec.scr.schedule_total
                                                             : spec.scr.max_iterations;
  std::vector<RunOutcome> outcomes = run_all(objective, spec, tasks, schedule_total);
  if (spec.zero_time)
    for (auto& outcome : outcomes) outcome.wall_seconds = 0.0;
  write_outcome_csvs(outcomes, spec);

  double f_star = polish_f_star(objective, spec);
  for (const auto& outcome : outcomes)
    if (!outcome.failed) f_star = std::min(f_star, best_f_in(outcome));

  for (const auto& outcome : outcomes) {
    log << outcome.method << " seed " << outcome.seed << ": "
        << (outcome.failed ? "FAILED (" + outcome.error + ")"
                           : std::string(run_status_name(outcome.status)) +
                                 " f=" + format_double(outcome.final_f) +
                                 " epochs=" + format_double(outcome.epochs))
        << "\n";
  }

  ExperimentSummary summary = summarize_outcomes(spec, spec.methods, std::move(outcomes), f_star,
                                                 notes);
  write_summary_csv(summary, summary_csv_path(spec));
  log << "f_star=" << format_double(summary.f_star) << "\n";
  return summary;
}

ExperimentSummary run_schedule_comparison(const ExperimentSpec& spec_in, std::ostream& log) {
  ExperimentSpec spec = spec_in;
  spec.validate();
  const Dataset dataset = load_experiment_dataset(spec.dataset);
  const ObjectiveModel objective(dataset, spec.regularizer, spec.lambda);
  const uint64_t seed = spec.seeds.front();

  // The adaptive run fixes the iteration budget the hand-tuned schedules
  // are calibrated against (they must reach n at their final iteration).
  RunOutcome adaptive = execute_run(objective, spec, "scr", seed, 0);
  const auto total = static_cast<int64_t>(adaptive.trace.records.size());
  log << "adaptive run: " << total << " iterations, status "
      << (adaptive.failed ? "failed" : run_status_name(adaptive.status)) << "\n";
  if (adaptive.failed || total < 1) throw SolverError("schedule comparison: adaptive run failed");

  std::vector<std::pair<std::string, uint64_t>> tasks{
      {"scr-linear", seed}, {"scr-exponential", seed}, {"arc", seed}};
  std::vector<RunOutcome> outcomes = run_all(objective, spec, tasks, total);
  outcomes.insert(outcomes.begin(), std::move(adaptive));
  if (spec.zero_time)
    for (auto& outcome : outcomes) outcome.wall_seconds = 0.0;
  write_outcome_csvs(outcomes, spec);

  double f_star = polish_f_star(objective, spec);
  for (const auto& outcome : outcomes)
    if (!outcome.failed) f_star = std::min(f_star, best_f_in(outcome));

  ExperimentSummary summary =
      summarize_outcomes(spec, {"scr", "scr-linear", "scr-exponential", "arc"},
                         std::move(outcomes), f_star, {});
  write_summary_csv(summary, summary_csv_path(spec));
  for (const auto& ms : summary.methods)
    log << ms.method << ": median epochs to " << format_double(spec.subopt_target)
        << " suboptimality = " << format_double(ms.median_epochs_to_target) << "\n";
  return summary;
}

namespace {

// Random dense cubic subproblem with eigenvalues in [lo, hi].
CubicModel random_dense_model(int64_t d, double eig_lo, double eig_hi, double sigma, Rng& rng,
                              Eigen::MatrixXd& storage) {
  Eigen::MatrixXd raw(d, d);
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < d; ++j) raw(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd eigs(d);
  for (int64_t j = 0; j < d; ++j) eigs[j] = rng.uniform(eig_lo, eig_hi);
  storage = q * eigs.asDiagonal() * q.transpose();
  storage = 0.5 * (storage + storage.transpose());

  CubicModel model;
  model.f0 = rng.uniform(-1.0, 1.0);
  model.g.resize(d);
  for (int64_t j = 0; j < d; ++j) model.g[j] = rng.normal();
  model.sigma = sigma;
  model.dense = &storage;
  return model;
}

void verify_default_profile(InvariantReport& report, std::ostream& log) {
  // Lanczos/exact agreement on random dense problems.
  {
    Rng rng(11);
    bool agree = true;
    bool decrease_ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd storage;
      CubicModel model = random_dense_model(10, -2.0, 5.0, 1.0, rng, storage);
      const auto exact = solve_exact(model);
      LanczosOptions lopts;
      lopts.max_dim = 10;
      lopts.kappa_theta = 1e-10;  // effectively disable TC so the full space is reached
      const auto krylov = solve_lanczos(model, lopts);
      worst = std::max(worst, (exact.step - krylov.step).norm());
      agree = agree && (exact.step - krylov.step).norm() <= 1e-6;
      const double sn = exact.step.norm();
      decrease_ok =
          decrease_ok && exact.model_decrease >= model.sigma / 6.0 * sn * sn * sn - 1e-10;
    }
    report.add("subproblem_lanczos_matches_exact", agree, "worst |ds|=" + format_double(worst));
    report.add("subproblem_decrease_bound", decrease_ok);
  }

  // Convex run: convergence + trace invariants.
  {
    const Dataset data = generate_gaussian({1500, 15, 21});
    const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
    ScrConfig cfg;
    cfg.seed = 3;
    cfg.max_iterations = 80;
    cfg.grad_tol = 1e-8;
    const RunResult run = scr_run(objective, cfg);
    report.add("convex_run_converged", run.status == RunStatus::GradientTolerance,
               "final grad norm " + format_double(run.final_grad_norm));
    const InvariantReport inv = check_convergence_invariants(run.trace, cfg);
    for (const auto& item : inv.items) report.add("convex_run_" + item.name, item.pass, item.detail);
  }

  // Concentration bounds at desk scale.
  {
    const Dataset data = generate_gaussian({1200, 12, 5});
    const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
    Eigen::VectorXd x(12);
    Rng xr(2);
    for (int j = 0; j < 12; ++j) x[j] = 0.3 * xr.normal();
    Rng rng(17);
    const auto grad_report = verify_gradient_bernstein(objective, x, 300, 0.1, 300, rng);
    const auto hess_report = verify_hessian_bernstein(objective, x, 300, 0.1, 300, rng);
    report.add("bernstein_gradient", grad_report.violation_rate <= 0.1,
               "rate=" + format_double(grad_report.violation_rate));
    report.add("bernstein_hessian", hess_report.violation_rate <= 0.1,
               "rate=" + format_double(hess_report.violation_rate));
    log << "bernstein rates: grad " << grad_report.violation_rate << ", hess "
        << hess_report.violation_rate << "\n";
  }

  // Non-convex run reaches an approximate second-order point.
  {
    const Dataset data = generate_gaussian({1000, 10, 9});
    const ObjectiveModel objective(data, RegularizerKind::Nonconvex, 1e-3);
    ScrConfig cfg;
    cfg.seed = 5;
    cfg.max_iterations = 120;
    cfg.grad_tol = 1e-6;
    const RunResult run = scr_run(objective, cfg);
    const auto [min_eig, second_order] = second_order_check(objective, run.x, 1e-4);
    report.add("nonconvex_first_order", run.final_grad_norm <= 1e-5,
               "grad norm " + format_double(run.final_grad_norm));
    report.add("nonconvex_second_order", second_order, "min eig " + format_double(min_eig));
  }
}

void verify_negative_control_profile(InvariantReport& report, std::ostream& log) {
  const Dataset data = generate_gaussian({600, 8, 13});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  ScrConfig cfg;
  cfg.seed = 1;
  cfg.max_iterations = 40;
  const RunResult run = scr_run(objective, cfg);
  if (run.trace.records.size() < 3) {
    report.add("negative_control_setup", false, "reference run too short");
    return;
  }

  // Tampered penalty update (gamma < 1): sigma decays through the floor.
  {
    Trace tampered = run.trace;
    double sigma = cfg.sigma0;
    for (auto& r : tampered.records) {
      r.sigma = sigma;
      sigma *= 1e-6;  // what a gamma << 1 update would do: decay through the floor
    }
    const InvariantReport inv = check_convergence_invariants(tampered, cfg);
    bool caught = false;
    for (const auto& item : inv.items)
      if (!item.pass && (item.name == "sigma_floor" || item.name == "unsuccessful_streak_cap"))
        caught = true;
    report.add("checker_catches_sigma_tamper", caught);
    log << "sigma tamper " << (caught ? "caught" : "MISSED") << "\n";
  }

  // Accepted step with increasing f must trip the monotonicity check.
  {
    Trace tampered = run.trace;
    auto& last = tampered.records.back();
    last.step_class = StepClass::Successful;
    last.rho = 0.9;
    last.f_full = tampered.initial_f + 1.0;
    const InvariantReport inv = check_convergence_invariants(tampered, cfg);
    bool caught = false;
    for (const auto& item : inv.items)
      if (!item.pass && (item.name == "monotone_accepted_f" || item.name == "sufficient_decrease"))
        caught = true;
    report.add("checker_catches_f_increase", caught);
  }

  // A generic random vector must fail the model-minimizer conditions.
  {
    Rng rng(3);
    Eigen::MatrixXd storage;
    const CubicModel model = random_dense_model(6, -1.0, 4.0, 1.0, rng, storage);
    Eigen::VectorXd s(6);
    for (int j = 0; j < 6; ++j) s[j] = rng.normal();
    report.add("random_step_fails_a1", !check_a1(model, s).pass);
  }
}

void verify_convex_tail_profile(InvariantReport& report, std::ostream& log) {
  const Dataset data = generate_gaussian({2000, 20, 33});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  ScrConfig cfg;
  cfg.seed = 4;
  cfg.max_iterations = 100;
  cfg.grad_tol = 1e-8;
  const RunResult run = scr_run(objective, cfg);
  report.add("convex_tail_converged", run.status == RunStatus::GradientTolerance,
             "final grad norm " + format_double(run.final_grad_norm));
  const auto tail = quadratic_tail_check(run.trace);
  report.add("quadratic_tail", tail.pass, tail.detail);
  log << "quadratic tail: " << tail.detail << "\n";
}

}  // namespace

InvariantReport verify_suite(const std::string& profile, std::ostream& log) {
  InvariantReport report;
  if (profile == "default")
    verify_default_profile(report, log);
  else if (profile == "negative-control")
    verify_negative_control_profile(report, log);
  else if (profile == "convex-tail")
    verify_convex_tail_profile(report, log);
  else
    throw ContractError("verify: unknown profile " + profile);

  for (const auto& item : report.items)
    log << (item.pass ? "PASS " : "FAIL ") << item.name
        << (item.detail.empty() ? "" : " (" + item.detail + ")") << "\n";
  return report;
}

void summarize_directory(const std::string& dir, std::ostream& log) {
  std::vector<RunOutcome> outcomes;
  std::vector<std::string> methods;
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    if (entry.path().filename() == "summary.csv") continue;
    files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const std::string stem = fs::path(file).stem().string();
    const auto sep = stem.rfind("_seed");
    if (sep == std::string::npos) continue;
    RunOutcome outcome;
    outcome.method = stem.substr(0, sep);
    outcome.seed = std::strtoull(stem.substr(sep + 5).c_str(), nullptr, 10);
    outcome.trace = read_trace_csv(file);
    outcome.csv_path = file;
    if (!outcome.trace.records.empty()) {
      outcome.final_f = outcome.trace.records.back().f_full;
      outcome.epochs = outcome.trace.records.back().epochs;
      outcome.wall_seconds = outcome.trace.records.back().seconds;
    } else {
      outcome.final_f = outcome.trace.initial_f;
    }
    if (std::find(methods.begin(), methods.end(), outcome.method) == methods.end())
      methods.push_back(outcome.method);
    outcomes.push_back(std::move(outcome));
  }
  if (outcomes.empty()) throw IoError("no trace CSVs found in " + dir);

  double f_star = std::numeric_limits<double>::infinity();
  for (const auto& outcome : outcomes) f_star = std::min(f_star, best_f_in(outcome));

  ExperimentSpec spec;
  spec.methods = methods;
  spec.output_dir = dir;
  ExperimentSummary summary =
      summarize_outcomes(spec, methods, std::move(outcomes), f_star, {});
  write_summary_csv(summary, (fs::path(dir) / "summary.csv").string());
  log << "summarized " << summary.runs.size() << " runs, f_star=" << format_double(f_star)
      << "\n";
}

}  // namespace scr
