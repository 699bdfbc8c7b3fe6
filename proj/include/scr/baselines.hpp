#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "scr/objective.hpp"
#include "scr/scr_solver.hpp"

namespace scr {

/// Constant-step minibatch SGD.
struct SgdConfig {
  double step_size = 0.01;
  double minibatch_fraction = 0.1;  // ceil(fraction * n) samples per step
  int64_t max_iterations = 1000;
  uint64_t seed = 0;
  int64_t record_stride = 10;  // trace row every k-th iteration
  double grad_tol = 0.0;       // 0 disables the full-gradient stop
  double divergence_bound = 1e10;
};
RunResult sgd_run(const Objective& objective, const SgdConfig& config,
                  Eigen::VectorXd x0 = Eigen::VectorXd());

/// SAGA with a dense n x d gradient table and a running average.
struct SagaConfig {
  double step_size = 0.01;
  int64_t max_iterations = 100000;  // single-sample steps
  uint64_t seed = 0;
  int64_t record_stride = 1000;
  double grad_tol = 0.0;
  double divergence_bound = 1e10;
  int64_t table_budget = 200000000;  // refuse when n*d exceeds this
};
RunResult saga_run(const Objective& objective, const SagaConfig& config,
                   Eigen::VectorXd x0 = Eigen::VectorXd());

/// Dense Newton with backtracking Armijo line search. A Cholesky failure
/// (singular or indefinite Hessian) ends the run with status Failed and
/// message "singular_hessian", keeping the partial trace.
struct NewtonConfig {
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_line_search = 60;
  int64_t max_iterations = 100;
  double grad_tol = 1e-8;
  double divergence_bound = 1e10;
};
RunResult newton_ls_run(const Objective& objective, const NewtonConfig& config,
                        Eigen::VectorXd x0 = Eigen::VectorXd());

enum class LineSearchMode {
  Armijo,
  // Derivative bisection to high accuracy; costs a gradient per probe.
  ExactBisection,
};

/// L-BFGS with two-loop recursion. Curvature pairs with s'y below
/// curvature_skip_tol are dropped; a non-descent direction resets the
/// memory to steepest descent.
struct LbfgsConfig {
  int memory = 20;
  LineSearchMode line_search = LineSearchMode::Armijo;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_line_search = 60;
  int64_t max_iterations = 500;
  double grad_tol = 1e-8;
  double curvature_skip_tol = 1e-10;
  double divergence_bound = 1e10;
};
RunResult lbfgs_run(const Objective& objective, const LbfgsConfig& config,
                    Eigen::VectorXd x0 = Eigen::VectorXd());

/// Spectral norm estimate of the full Hessian at x by power iteration;
/// used to scale the SGD step-size grid.
double estimate_hessian_norm(const Objective& objective, const Eigen::VectorXd& x, int iters,
                             uint64_t seed);

}  // namespace scr
