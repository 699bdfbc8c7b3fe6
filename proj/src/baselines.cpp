#include "scr/baselines.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "scr/common.hpp"
#include "scr/sampling.hpp"

namespace scr {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::VectorXd resolve_x0(const Objective& objective, Eigen::VectorXd x0) {
  if (x0.size() == 0) return Eigen::VectorXd::Zero(objective.dim());
  if (x0.size() != objective.dim()) throw ContractError("x0 has wrong dimension");
  if (!x0.allFinite()) throw ContractError("x0 must be finite");
  return x0;
}

// Epochs count gradient and Hessian work only (the hardware-independent
// cost unit); plain function evaluations from line searches are excluded.
struct WorkCounter {
  int64_t gradient_evals = 0;
  int64_t hessian_evals = 0;
  int64_t n = 1;
  double epochs() const {
    return static_cast<double>(gradient_evals + hessian_evals) / static_cast<double>(n);
  }
};

TraceRecord baseline_record(int64_t iteration, Clock::time_point start, const WorkCounter& work,
                            double f, double grad_norm, StepClass cls, double step_norm) {
  TraceRecord rec;
  rec.iteration = iteration;
  rec.seconds = elapsed(start);
  rec.epochs = work.epochs();
  rec.f_full = f;
  rec.grad_norm_full = grad_norm;
  rec.step_class = cls;
  rec.step_norm = step_norm;
  return rec;
}

// Backtracking Armijo: returns the accepted t, or 0 when the search failed.
template <typename ValueFn>
double armijo_backtrack(ValueFn&& value_at, double f0, double directional, double c,
                        double backtrack, int max_iters, double* f_out) {
  double t = 1.0;
  for (int i = 0; i < max_iters; ++i) {
    const double f_t = value_at(t);
    if (std::isfinite(f_t) && f_t <= f0 + c * t * directional) {
      *f_out = f_t;
      return t;
    }
    t *= backtrack;
  }
  return 0.0;
}

}  // namespace

RunResult sgd_run(const Objective& objective, const SgdConfig& config, Eigen::VectorXd x0) {
  if (!(config.step_size >= 0.0)) throw ContractError("sgd: step size must be nonnegative");
  if (!(config.minibatch_fraction > 0.0 && config.minibatch_fraction <= 1.0))
    throw ContractError("sgd: minibatch fraction must lie in (0,1]");

  const auto start = Clock::now();
  const int64_t n = objective.num_samples();
  WorkCounter work{0, n};
  Eigen::VectorXd x = resolve_x0(objective, std::move(x0));
  Rng rng = Rng(config.seed).substream(3);

  const int64_t batch =
      std::clamp<int64_t>(static_cast<int64_t>(std::ceil(config.minibatch_fraction *
                                                         static_cast<double>(n))),
                          1, n);

  RunResult result;
  result.trace.initial_f = objective.value(x);
  result.trace.initial_grad_norm = objective.gradient(x).norm();
  result.status = RunStatus::MaxIterations;

  for (int64_t k = 0; k < config.max_iterations; ++k) {
    const auto set = draw_index_set(n, batch, rng);
    const Eigen::VectorXd g = objective.gradient(x, set);
    work.gradient_evals += batch;
    x -= config.step_size * g;

    const bool record = (k + 1) % config.record_stride == 0 || k + 1 == config.max_iterations;
    if (record) {
      const double f = objective.value(x);  // diagnostic, not counted
      const double gn = objective.gradient(x).norm();
      result.trace.records.push_back(baseline_record(k, start, work, f, gn, StepClass::None,
                                                     config.step_size * g.norm()));
      result.final_f = f;
      result.final_grad_norm = gn;
      if (config.grad_tol > 0.0 && gn <= config.grad_tol) {
        result.status = RunStatus::GradientTolerance;
        break;
      }
      if (!std::isfinite(f) || f > config.divergence_bound) {
        result.status = RunStatus::Diverged;
        result.message = "objective exceeded divergence bound";
        break;
      }
    }
  }
  result.x = x;
  return result;
}

RunResult saga_run(const Objective& objective, const SagaConfig& config, Eigen::VectorXd x0) {
  const int64_t n = objective.num_samples();
  const int64_t d = objective.dim();
  if (n * d > config.table_budget)
    throw ContractError("saga: gradient table of " + std::to_string(n * d) +
                        " entries exceeds the budget");

  const auto start = Clock::now();
  WorkCounter work{0, n};
  Eigen::VectorXd x = resolve_x0(objective, std::move(x0));
  Rng rng = Rng(config.seed).substream(4);

  // Stored per-sample gradients at the last evaluation point, plus their mean.
  Eigen::MatrixXd table(d, n);
  for (int64_t i = 0; i < n; ++i) table.col(i) = objective.sample_gradient(i, x);
  work.gradient_evals += n;
  Eigen::VectorXd mean = table.rowwise().mean();

  RunResult result;
  result.trace.initial_f = objective.value(x);
  result.trace.initial_grad_norm = objective.gradient(x).norm();
  result.status = RunStatus::MaxIterations;

  for (int64_t k = 0; k < config.max_iterations; ++k) {
    const auto j = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n)));
    const Eigen::VectorXd gj = objective.sample_gradient(j, x);
    work.gradient_evals += 1;
    x -= config.step_size * (gj - table.col(j) + mean);
    mean += (gj - table.col(j)) / static_cast<double>(n);
    table.col(j) = gj;

    if ((k + 1) % 100 == 0) {
      // Bookkeeping invariant: the running mean tracks the exact table mean.
      mean = table.rowwise().mean();
    }

    const bool record = (k + 1) % config.record_stride == 0 || k + 1 == config.max_iterations;
    if (record) {
      const double f = objective.value(x);
      const double gn = objective.gradient(x).norm();
      result.trace.records.push_back(
          baseline_record(k, start, work, f, gn, StepClass::None, std::nan("")));
      result.final_f = f;
      result.final_grad_norm = gn;
      if (config.grad_tol > 0.0 && gn <= config.grad_tol) {
        result.status = RunStatus::GradientTolerance;
        break;
      }
      if (!std::isfinite(f) || f > config.divergence_bound) {
        result.status = RunStatus::Diverged;
        result.message = "objective exceeded divergence bound";
        break;
      }
    }
  }
  result.x = x;
  return result;
}

RunResult newton_ls_run(const Objective& objective, const NewtonConfig& config,
                        Eigen::VectorXd x0) {
  const auto start = Clock::now();
  const int64_t n = objective.num_samples();
  WorkCounter work{0, n};
  Eigen::VectorXd x = resolve_x0(objective, std::move(x0));

  RunResult result;
  double f = objective.value(x);
  work.sample_evals += n;
  Eigen::VectorXd g = objective.gradient(x);
  work.sample_evals += n;
  result.trace.initial_f = f;
  result.trace.initial_grad_norm = g.norm();
  result.status = RunStatus::MaxIterations;

  for (int64_t k = 0; k < config.max_iterations; ++k) {
    if (g.norm() <= config.grad_tol) {
      result.status = RunStatus::GradientTolerance;
      break;
    }
    const Eigen::MatrixXd h = objective.hessian(x);
    work.sample_evals += n;  // one pass over the data
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) {
      result.status = RunStatus::Failed;
      result.message = "singular_hessian";
      break;
    }
    const Eigen::VectorXd p = llt.solve(-g);
    const double directional = g.dot(p);
    if (!(directional < 0.0)) {
      result.status = RunStatus::Failed;
      result.message = "singular_hessian";
      break;
    }

    double f_next = f;
    const double t = armijo_backtrack(
        [&](double tt) {
          work.sample_evals += n;
          return objective.value(x + tt * p);
        },
        f, directional, config.armijo_c, config.backtrack, config.max_line_search, &f_next);
    if (t == 0.0) {
      result.status = RunStatus::Failed;
      result.message = "line_search_failed";
      break;
    }

    x += t * p;
    f = f_next;
    g = objective.gradient(x);
    work.sample_evals += n;
    result.trace.records.push_back(
        baseline_record(k, start, work, f, g.norm(), StepClass::Successful, t * p.norm()));
    if (!std::isfinite(f) || f > config.divergence_bound) {
      result.status = RunStatus::Diverged;
      break;
    }
  }
  result.x = x;
  result.final_f = f;
  result.final_grad_norm = g.norm();
  return result;
}

RunResult lbfgs_run(const Objective& objective, const LbfgsConfig& config, Eigen::VectorXd x0) {
  if (config.memory < 1) throw ContractError("lbfgs: memory must be positive");
  const auto start = Clock::now();
  const int64_t n = objective.num_samples();
  WorkCounter work{0, n};
  Eigen::VectorXd x = resolve_x0(objective, std::move(x0));

  RunResult result;
  double f = objective.value(x);
  work.sample_evals += n;
  Eigen::VectorXd g = objective.gradient(x);
  work.sample_evals += n;
  result.trace.initial_f = f;
  result.trace.initial_grad_norm = g.norm();
  result.status = RunStatus::MaxIterations;

  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;

  auto two_loop = [&](const Eigen::VectorXd& grad) {
    Eigen::VectorXd q = grad;
    const auto m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) {
      const double gamma = s_hist[m - 1].dot(y_hist[m - 1]) / y_hist[m - 1].squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    return Eigen::VectorXd(-q);
  };

  for (int64_t k = 0; k < config.max_iterations; ++k) {
    if (g.norm() <= config.grad_tol) {
      result.status = RunStatus::GradientTolerance;
      break;
    }
    Eigen::VectorXd p = two_loop(g);
    double directional = g.dot(p);
    if (!(directional < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      p = -g;
      directional = g.dot(p);
    }

    double t = 0.0;
    double f_next = f;
    if (config.line_search == LineSearchMode::Armijo) {
      t = armijo_backtrack(
          [&](double tt) {
            work.sample_evals += n;
            return objective.value(x + tt * p);
          },
          f, directional, config.armijo_c, config.backtrack, config.max_line_search, &f_next);
    } else {
      // Derivative bisection: find t with grad f(x+tp)'p ~ 0.
      double hi = 1.0;
      double dhi = objective.gradient(x + hi * p).dot(p);
      work.sample_evals += n;
      int grow = 0;
      while (dhi < 0.0 && grow++ < 60) {
        hi *= 2.0;
        dhi = objective.gradient(x + hi * p).dot(p);
        work.sample_evals += n;
      }
      double lo = 0.0;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double dmid = objective.gradient(x + mid * p).dot(p);
        work.sample_evals += n;
        if (dmid < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      t = 0.5 * (lo + hi);
      f_next = objective.value(x + t * p);
      work.sample_evals += n;
      if (!(f_next <= f)) t = 0.0;
    }
    if (t == 0.0) {
      result.status = RunStatus::Failed;
      result.message = "line_search_failed";
      break;
    }

    const Eigen::VectorXd step = t * p;
    const Eigen::VectorXd g_next = objective.gradient(x + step);
    work.sample_evals += n;
    const Eigen::VectorXd y = g_next - g;
    const double sy = step.dot(y);
    if (sy > config.curvature_skip_tol) {
      s_hist.push_back(step);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > config.memory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }

    x += step;
    f = f_next;
    g = g_next;
    result.trace.records.push_back(
        baseline_record(k, start, work, f, g.norm(), StepClass::Successful, step.norm()));
    if (!std::isfinite(f) || f > config.divergence_bound) {
      result.status = RunStatus::Diverged;
      break;
    }
  }
  result.x = x;
  result.final_f = f;
  result.final_grad_norm = g.norm();
  return result;
}

double estimate_hessian_norm(const Objective& objective, const Eigen::VectorXd& x, int iters,
                             uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(objective.dim());
  for (int64_t j = 0; j < v.size(); ++j) v[j] = rng.normal();
  v.normalize();
  double norm = 0.0;
  for (int i = 0; i < iters; ++i) {
    Eigen::VectorXd hv = objective.hessian_vector(x, v);
    norm = hv.norm();
    if (norm == 0.0) return 0.0;
    v = hv / norm;
  }
  return norm;
}

}  // namespace scr
