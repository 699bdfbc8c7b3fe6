#include "scr/scr_solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "scr/common.hpp"

namespace scr {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SampleSizes sizes_for_iteration(const SolverState& state, const Objective& objective,
                                const ScrConfig& config) {
  const int64_t n = objective.num_samples();
  const int64_t d = objective.dim();
  const int64_t floor_size = sample_size_floor(config.sampling, n);

  SampleSizes sizes;
  switch (config.schedule) {
    case SampleSchedule::Full:
      sizes = {n, n};
      break;
    case SampleSchedule::Linear:
      sizes = schedule_linear(std::min(state.iteration, config.schedule_total),
                              config.schedule_total, n, floor_size);
      break;
    case SampleSchedule::Exponential:
      sizes = schedule_exponential(std::min(state.iteration, config.schedule_total),
                                   config.schedule_total, n, floor_size);
      break;
    case SampleSchedule::Adaptive: {
      if (state.iteration == 0) {
        sizes = {floor_size, floor_size};
      } else {
        // The previous step norm estimates the current one.
        const double estimate = std::max(state.prev_step_norm, 1e-12);
        sizes.grad = gradient_sample_size(config.sampling, estimate, d, n);
        sizes.hess = hessian_sample_size(config.sampling, estimate, d, n);
      }
      break;
    }
  }
  if (state.prev_unsuccessful) {
    // Sizes may never shrink while the iterate is stuck.
    sizes.grad = std::max(sizes.grad, state.sizes.grad);
    sizes.hess = std::max(sizes.hess, state.sizes.hess);
  }
  return sizes;
}

}  // namespace

void ScrConfig::validate() const {
  if (!(gamma > 1.0)) throw ContractError("ScrConfig: gamma must exceed 1");
  if (!(eta1 > 0.0 && eta2 > eta1 && eta2 < 1.0))
    throw ContractError("ScrConfig: need 1 > eta2 > eta1 > 0");
  if (!(sigma0 > 0.0)) throw ContractError("ScrConfig: sigma0 must be positive");
  if (!(epsilon_m > 0.0)) throw ContractError("ScrConfig: epsilon_m must be positive");
  if (!(kappa_theta > 0.0 && kappa_theta < 1.0))
    throw ContractError("ScrConfig: kappa_theta must lie in (0,1)");
  if (max_iterations < 1) throw ContractError("ScrConfig: max_iterations must be positive");
  if (grad_check_stride < 1) throw ContractError("ScrConfig: grad_check_stride must be positive");
  if ((schedule == SampleSchedule::Linear || schedule == SampleSchedule::Exponential) &&
      schedule_total < 1)
    throw ContractError("ScrConfig: schedule_total required for fixed schedules");
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::GradientTolerance: return "gradient_tolerance";
    case RunStatus::MaxIterations: return "max_iterations";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Failed: return "failed";
  }
  return "unknown";
}

double update_sigma(double rho, double sigma, double grad_norm, const ScrConfig& config) {
  if (rho > config.eta2) return std::max(std::min(sigma, grad_norm), config.epsilon_m);
  if (rho >= config.eta1) return sigma;
  return config.gamma * sigma;
}

SolverState make_initial_state(const Objective& objective, const ScrConfig& config,
                               Eigen::VectorXd x0) {
  config.validate();
  SolverState state;
  state.x = x0.size() == 0 ? Eigen::VectorXd::Zero(objective.dim()) : std::move(x0);
  if (state.x.size() != objective.dim()) throw ContractError("x0 has wrong dimension");
  if (!state.x.allFinite()) throw ContractError("x0 must be finite");
  state.sigma = config.sigma0;
  state.f_full = objective.value(state.x);
  state.function_sample_evals += objective.num_samples();
  Rng master(config.seed);
  state.rng_grad = master.substream(1);
  state.rng_hess = master.substream(2);
  state.start_time = std::chrono::steady_clock::now();
  return state;
}

TraceRecord scr_step(SolverState& state, const Objective& objective, const ScrConfig& config) {
  const int64_t n = objective.num_samples();

  const SampleSizes sizes = sizes_for_iteration(state, objective, config);
  const auto grad_set = draw_index_set(n, sizes.grad, state.rng_grad);
  const auto hess_set = draw_index_set(n, sizes.hess, state.rng_hess);

  const Eigen::VectorXd g = objective.gradient(state.x, grad_set);
  state.gradient_sample_evals += sizes.grad;

  CubicModel model;
  model.f0 = state.f_full;
  model.g = g;
  model.sigma = state.sigma;
  model.op = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    out = objective.hessian_vector(state.x, hess_set, v);
    state.hvp_sample_evals += sizes.hess;
  };

  LanczosOptions lopts;
  lopts.kappa_theta = config.kappa_theta;
  lopts.max_dim = config.max_krylov_dim;

  TraceRecord rec;
  rec.iteration = state.iteration;
  rec.sigma = state.sigma;  // the penalty used at this iteration (pre-update)
  rec.grad_samples = sizes.grad;
  rec.hess_samples = sizes.hess;

  bool solver_failed = false;
  std::string failure;
  SubproblemSolution sol;
  try {
    sol = solve_lanczos(model, lopts);
  } catch (const SolverError& e) {
    solver_failed = true;
    failure = e.what();
  }

  double rho = -std::numeric_limits<double>::infinity();
  double f_trial = std::numeric_limits<double>::quiet_NaN();
  if (!solver_failed) {
    rec.step_norm = sol.step.norm();
    rec.krylov_dim = sol.krylov_dim;
    if (!(sol.model_decrease > 0.0) || !sol.step.allFinite()) {
      // A1 guarantees a strictly positive model decrease for s != 0; treat
      // a violation as a solver failure and let sigma grow.
      solver_failed = true;
    } else {
      if (config.sampled_rho) {
        const double f_ref = objective.value(state.x, grad_set);
        f_trial = objective.value(state.x + sol.step, grad_set);
        state.function_sample_evals += 2 * sizes.grad;
        rho = (f_ref - f_trial) / sol.model_decrease;
        // The iterate bookkeeping still tracks the full objective.
        if (rho >= config.eta1) {
          f_trial = objective.value(state.x + sol.step);
          state.function_sample_evals += n;
        }
      } else {
        f_trial = objective.value(state.x + sol.step);
        state.function_sample_evals += n;
        rho = (state.f_full - f_trial) / sol.model_decrease;
      }
      if (!std::isfinite(f_trial)) {
        solver_failed = true;
        rho = -std::numeric_limits<double>::infinity();
      }
    }
  }

  const bool accepted = !solver_failed && rho >= config.eta1;
  if (accepted) {
    state.x += sol.step;
    state.f_full = f_trial;
    state.successful += 1;
    rec.step_class = rho > config.eta2 ? StepClass::VerySuccessful : StepClass::Successful;
  } else {
    state.unsuccessful += 1;
    rec.step_class = StepClass::Unsuccessful;
  }

  state.sigma = update_sigma(solver_failed ? -1.0 : rho, state.sigma, g.norm(), config);
  state.prev_unsuccessful = !accepted;
  state.sizes = sizes;
  if (!solver_failed) state.prev_step_norm = rec.step_norm;
  state.iteration += 1;

  rec.rho = solver_failed ? std::numeric_limits<double>::quiet_NaN() : rho;
  rec.f_full = state.f_full;
  rec.epochs = state.epochs(n);
  rec.seconds = elapsed_seconds(state.start_time);
  return rec;
}

RunResult scr_run(const Objective& objective, const ScrConfig& config, Eigen::VectorXd x0) {
  SolverState state = make_initial_state(objective, config, std::move(x0));

  RunResult result;
  result.trace.initial_f = state.f_full;
  const Eigen::VectorXd g0 = objective.gradient(state.x);
  result.trace.initial_grad_norm = g0.norm();
  if (result.trace.initial_grad_norm <= config.grad_tol) {
    result.x = state.x;
    result.status = RunStatus::GradientTolerance;
    result.final_f = state.f_full;
    result.final_grad_norm = result.trace.initial_grad_norm;
    return result;
  }

  result.status = RunStatus::MaxIterations;
  for (int64_t k = 0; k < config.max_iterations; ++k) {
    TraceRecord rec = scr_step(state, objective, config);

    if ((k + 1) % config.grad_check_stride == 0 || k + 1 == config.max_iterations) {
      // Diagnostic full gradient; not counted as algorithmic work.
      const double gn = objective.gradient(state.x).norm();
      rec.grad_norm_full = gn;
      result.final_grad_norm = gn;
      if (gn <= config.grad_tol) {
        result.trace.records.push_back(rec);
        result.status = RunStatus::GradientTolerance;
        break;
      }
    }
    result.trace.records.push_back(rec);

    if (!std::isfinite(state.f_full) || state.f_full > config.divergence_bound) {
      result.status = RunStatus::Diverged;
      result.message = "objective exceeded divergence bound";
      break;
    }
  }

  result.x = state.x;
  result.final_f = state.f_full;
  return result;
}

void InvariantReport::add(std::string name, bool pass, std::string detail) {
  all_pass = all_pass && pass;
  items.push_back({std::move(name), pass, std::move(detail)});
}

InvariantReport check_convergence_invariants(const Trace& trace, const ScrConfig& config,
                                             bool expect_quadratic_tail) {
  InvariantReport report;
  const auto& recs = trace.records;
  if (recs.empty()) {
    report.add("nonempty_trace", false, "trace has no records");
    return report;
  }

  double sigma_max = config.sigma0;
  bool sigma_floor_ok = true;
  for (const auto& r : recs) {
    sigma_max = std::max(sigma_max, r.sigma);
    if (r.sigma < config.epsilon_m * (1.0 - 1e-12)) sigma_floor_ok = false;
  }
  report.add("sigma_floor", sigma_floor_ok,
             "sigma_max=" + format_double(sigma_max));
  report.add("sigma_bounded", std::isfinite(sigma_max));

  // Lemma-4 chain on accepted steps:
  // f_k - f_{k+1} >= eta1 (f_k - m_k(s_k)) >= eta1 sigma_k/6 ||s_k||^3,
  // with the model decrease recovered from rho.
  bool decrease_ok = true;
  bool monotone_ok = true;
  std::string decrease_detail;
  double prev_f = trace.initial_f;
  for (const auto& r : recs) {
    if (r.step_class == StepClass::Unsuccessful) {
      if (r.f_full != prev_f) {
        monotone_ok = false;
        decrease_detail = "iterate moved on a rejected step at iteration " +
                          std::to_string(r.iteration);
      }
      prev_f = r.f_full;
      continue;
    }
    const double decrease = prev_f - r.f_full;
    const double tol = 1e-10 * std::max(1.0, std::abs(prev_f));
    if (decrease < -tol) {
      monotone_ok = false;
      decrease_detail = "f increased at iteration " + std::to_string(r.iteration);
    }
    const double model_decrease = decrease / r.rho;
    const double sn = r.step_norm;
    const double floor_decrease = config.eta1 * (r.sigma / 6.0) * sn * sn * sn;
    if (!(decrease + tol >= config.eta1 * model_decrease) || !(decrease + tol >= floor_decrease)) {
      decrease_ok = false;
      decrease_detail = "iteration " + std::to_string(r.iteration);
    }
    prev_f = r.f_full;
  }
  report.add("sufficient_decrease", decrease_ok, decrease_detail);
  report.add("monotone_accepted_f", monotone_ok, decrease_detail);

  // Consecutive unsuccessful streaks cannot outlast the sigma growth cap.
  const int64_t cap = static_cast<int64_t>(
      std::ceil(std::log(sigma_max / config.epsilon_m) / std::log(config.gamma)));
  int64_t streak = 0;
  int64_t worst_streak = 0;
  for (const auto& r : recs) {
    if (r.step_class == StepClass::Unsuccessful)
      worst_streak = std::max(worst_streak, ++streak);
    else
      streak = 0;
  }
  report.add("unsuccessful_streak_cap", worst_streak <= cap,
             "worst=" + std::to_string(worst_streak) + " cap=" + std::to_string(cap));

  if (expect_quadratic_tail) {
    const auto tail = quadratic_tail_check(trace);
    report.add("quadratic_tail", tail.pass, tail.detail);
  }
  return report;
}

QuadraticTailCheck quadratic_tail_check(const Trace& trace, double slack) {
  QuadraticTailCheck check;
  std::vector<double> grads;
  grads.push_back(trace.initial_grad_norm);
  for (const auto& r : trace.records)
    if (r.step_class != StepClass::Unsuccessful && std::isfinite(r.grad_norm_full) &&
        r.grad_norm_full > 0.0)
      grads.push_back(r.grad_norm_full);

  if (grads.size() < 4) {
    check.detail = "need at least 3 successful tail iterations with gradient norms";
    return check;
  }
  const size_t m = grads.size();
  // Ratios over the last three steps: fit c on the first, validate the rest.
  const double c_fit = grads[m - 3] / (grads[m - 4] * grads[m - 4]);
  double worst = 0.0;
  for (size_t k = m - 3; k + 1 < m; ++k)
    worst = std::max(worst, grads[k + 1] / (grads[k] * grads[k]));
  check.fitted_c = c_fit;
  check.worst_ratio = worst;
  check.pass = worst <= slack * std::max(c_fit, 1e-300);
  check.detail = "c_fit=" + format_double(c_fit) + " worst=" + format_double(worst);
  return check;
}

std::pair<double, bool> second_order_check(const Eigen::MatrixXd& hessian, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  return {min_eig, min_eig >= -tol};
}

std::pair<double, bool> second_order_check(const Objective& objective, const Eigen::VectorXd& x,
                                           double tol) {
  return second_order_check(objective.hessian(x), tol);
}

}  // namespace scr
