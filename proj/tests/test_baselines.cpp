#include <doctest.h>

#include <sstream>

#include "scr/baselines.hpp"
#include "scr/common.hpp"
#include "scr/trace.hpp"
#include "test_helpers.hpp"

using namespace scr;

namespace {

// All-zero feature rows make the data term constant, so the objective is the
// pure regularizer: with L2 it is the quadratic ln 2 + lambda ||x||^2.
Dataset zero_dataset(int64_t n, int64_t d) {
  std::vector<double> values(static_cast<size_t>(n * d), 0.0);
  std::vector<double> labels(static_cast<size_t>(n), 1.0);
  return Dataset::from_dense(n, d, std::move(values), std::move(labels));
}

Eigen::VectorXd counting_vector(int64_t d) {
  Eigen::VectorXd x(d);
  for (int64_t j = 0; j < d; ++j) x[j] = static_cast<double>(j + 1);
  return x;
}

}  // namespace

TEST_CASE("sgd with zero step size keeps the iterate") {
  const Dataset data = generate_gaussian({100, 5, 1});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  SgdConfig cfg;
  cfg.step_size = 0.0;
  cfg.max_iterations = 20;
  cfg.record_stride = 5;
  const RunResult run = sgd_run(objective, cfg);
  CHECK(run.x.norm() == 0.0);
  CHECK(run.final_f == run.trace.initial_f);
}

TEST_CASE("full-batch sgd reproduces a hand-coded gradient descent trajectory") {
  const Dataset data = generate_gaussian({80, 6, 2});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  SgdConfig cfg;
  cfg.step_size = 0.5;
  cfg.minibatch_fraction = 1.0;
  cfg.max_iterations = 15;
  const RunResult run = sgd_run(objective, cfg);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  for (int k = 0; k < 15; ++k) x -= cfg.step_size * objective.gradient(x);
  CHECK((run.x - x).norm() <= 1e-14 * (1.0 + x.norm()));
}

TEST_CASE("sgd decreases the objective on average over seeds") {
  const Dataset data = generate_gaussian({200, 5, 3});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  const double l_hat = estimate_hessian_norm(objective, Eigen::VectorXd::Zero(5), 50, 1);
  SgdConfig cfg;
  cfg.step_size = 0.5 / l_hat;
  cfg.max_iterations = 200;
  cfg.record_stride = 200;

  double mean_final = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    mean_final += sgd_run(objective, cfg).final_f;
  }
  mean_final /= 10.0;
  const double f0 = objective.value(Eigen::VectorXd::Zero(5));
  CHECK(mean_final < f0);
}

TEST_CASE("saga on a single sample reduces to gradient descent") {
  const Dataset data = generate_gaussian({1, 4, 4});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-2);
  SagaConfig cfg;
  cfg.step_size = 0.3;
  cfg.max_iterations = 25;
  cfg.record_stride = 25;
  const RunResult run = saga_run(objective, cfg);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  for (int k = 0; k < 25; ++k) x -= cfg.step_size * objective.gradient(x);
  CHECK((run.x - x).norm() <= 1e-12 * (1.0 + x.norm()));
}

TEST_CASE("saga converges linearly on a strongly convex problem") {
  const Dataset data = generate_gaussian({300, 5, 5});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-2);
  // SAGA stability is governed by the worst per-sample smoothness, not the
  // averaged Hessian norm: L_i = ||a_i||^2/4 + 2*lambda.
  double l_max = 0.0;
  for (int64_t i = 0; i < data.num_samples(); ++i)
    l_max = std::max(l_max, 0.25 * data.row_norm_sq(i) + 2e-2);

  SagaConfig cfg;
  cfg.step_size = 1.0 / (3.0 * l_max);
  cfg.seed = 1;
  cfg.max_iterations = 300 * 40;  // 40 effective passes
  cfg.record_stride = 300;
  const RunResult run = saga_run(objective, cfg);

  // Long-run optimum from Newton.
  NewtonConfig newton;
  newton.grad_tol = 1e-12;
  const double f_star = newton_ls_run(objective, newton).final_f;

  const double initial_gap = run.trace.initial_f - f_star;
  const double final_gap = run.final_f - f_star;
  CHECK(final_gap >= -1e-12);
  CHECK(final_gap <= 1e-3 * initial_gap);  // orders of magnitude in 40 passes

  // Roughly linear decay: the midpoint gap sits well below the initial gap.
  const auto& recs = run.trace.records;
  const double mid_gap = recs[recs.size() / 2].f_full - f_star;
  CHECK(mid_gap <= 0.1 * initial_gap);
}

TEST_CASE("saga refuses oversized gradient tables") {
  const Dataset data = generate_gaussian({100, 10, 6});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  SagaConfig cfg;
  cfg.table_budget = 500;  // 100*10 exceeds this
  CHECK_THROWS_AS(saga_run(objective, cfg), ContractError);
}

TEST_CASE("newton solves a quadratic objective in one step") {
  const Dataset data = zero_dataset(10, 3);
  const ObjectiveModel objective(data, RegularizerKind::L2, 0.5);  // f = ln2 + 0.5 ||x||^2
  NewtonConfig cfg;
  cfg.grad_tol = 1e-12;
  const RunResult run = newton_ls_run(objective, cfg, counting_vector(3));
  CHECK(run.status == RunStatus::GradientTolerance);
  CHECK(run.trace.records.size() == 1);  // one step to the origin, t = 1
  CHECK(run.x.norm() <= 1e-12);
  CHECK(run.trace.records[0].step_norm == doctest::Approx(counting_vector(3).norm()));
}

TEST_CASE("newton exhibits a quadratic tail on convex logistic regression") {
  const Dataset data = generate_gaussian({400, 10, 7});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  NewtonConfig cfg;
  cfg.grad_tol = 1e-10;
  const RunResult run = newton_ls_run(objective, cfg);
  CHECK(run.status == RunStatus::GradientTolerance);
  const auto tail = quadratic_tail_check(run.trace);
  INFO(tail.detail);
  CHECK(tail.pass);
}

TEST_CASE("newton reports singular hessians as a named failure") {
  // Zero feature rows with the non-convex penalty at x_j = 1/sqrt(3): the
  // penalty curvature vanishes there while the gradient does not, so the
  // Hessian is exactly singular at the starting point.
  const Dataset data = zero_dataset(10, 3);
  const ObjectiveModel objective(data, RegularizerKind::Nonconvex, 0.5);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 1.0 / std::sqrt(3.0));
  REQUIRE(objective.hessian(x0).cwiseAbs().maxCoeff() <= 1e-15);
  REQUIRE(objective.gradient(x0).norm() > 0.1);

  NewtonConfig cfg;
  const RunResult run = newton_ls_run(objective, cfg, x0);
  CHECK(run.status == RunStatus::Failed);
  CHECK(run.message == "singular_hessian");
}

TEST_CASE("lbfgs first iteration is scaled steepest descent") {
  const Dataset data = generate_gaussian({100, 5, 8});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);
  LbfgsConfig cfg;
  cfg.max_iterations = 1;
  const RunResult run = lbfgs_run(objective, cfg);
  const Eigen::VectorXd g0 = objective.gradient(Eigen::VectorXd::Zero(5));
  const Eigen::VectorXd step = run.x;  // started from the origin
  // Collinear with -g0.
  const double cosine = -step.dot(g0) / (step.norm() * g0.norm());
  CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lbfgs with exact line search terminates in at most d+1 steps on a quadratic") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  a.diagonal() << 1.0, 2.0, 3.0, 4.0, 5.0;
  Eigen::VectorXd b(5);
  b << 1.0, -2.0, 0.5, 1.5, -1.0;
  const testing::ToyQuadratic quad(a, b);

  LbfgsConfig cfg;
  cfg.memory = 20;
  cfg.line_search = LineSearchMode::ExactBisection;
  cfg.grad_tol = 1e-8;
  cfg.max_iterations = 20;
  const RunResult run = lbfgs_run(quad, cfg);
  CHECK(run.status == RunStatus::GradientTolerance);
  CHECK(static_cast<int64_t>(run.trace.records.size()) <= 6);
  CHECK((a * run.x + b).norm() <= 1e-7);
}

TEST_CASE("lbfgs reaches tight suboptimality on convex logistic regression") {
  const Dataset data = generate_gaussian({400, 10, 9});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);

  NewtonConfig newton;
  newton.grad_tol = 1e-12;
  const double f_star = newton_ls_run(objective, newton).final_f;

  LbfgsConfig cfg;
  cfg.grad_tol = 1e-9;
  cfg.max_iterations = 300;
  const RunResult run = lbfgs_run(objective, cfg);
  CHECK(run.status == RunStatus::GradientTolerance);
  CHECK(run.final_f - f_star <= 1e-6);
}

TEST_CASE("all methods emit the shared trace schema") {
  const Dataset data = generate_gaussian({60, 4, 10});
  const ObjectiveModel objective(data, RegularizerKind::L2, 1e-3);

  std::vector<Trace> traces;
  {
    SgdConfig cfg;
    cfg.step_size = 0.1;
    cfg.max_iterations = 10;
    cfg.record_stride = 5;
    traces.push_back(sgd_run(objective, cfg).trace);
  }
  {
    SagaConfig cfg;
    cfg.step_size = 0.1;
    cfg.max_iterations = 50;
    cfg.record_stride = 25;
    traces.push_back(saga_run(objective, cfg).trace);
  }
  {
    NewtonConfig cfg;
    traces.push_back(newton_ls_run(objective, cfg).trace);
  }
  {
    LbfgsConfig cfg;
    cfg.max_iterations = 20;
    traces.push_back(lbfgs_run(objective, cfg).trace);
  }

  for (const auto& trace : traces) {
    std::ostringstream out;
    write_trace_csv(trace, out);
    std::istringstream in(out.str());
    CHECK_NOTHROW(validate_trace_schema(in));
    // SCR-specific columns hold sentinels.
    for (const auto& r : trace.records) {
      CHECK(std::isnan(r.rho));
      CHECK(std::isnan(r.sigma));
      CHECK(r.grad_samples == -1);
      CHECK(r.hess_samples == -1);
      CHECK(r.krylov_dim == -1);
    }
  }
}
