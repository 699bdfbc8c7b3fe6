#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace scr {

using LinearOperator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Local model m(s) = f0 + <g, s> + 1/2 <s, B s> + (sigma/3) ||s||^3 with a
/// symmetric B given either densely or as a matrix-vector closure.
struct CubicModel {
  double f0 = 0.0;
  Eigen::VectorXd g;
  double sigma = 1.0;
  const Eigen::MatrixXd* dense = nullptr;  // non-owning; dense mode when set
  LinearOperator op;                       // operator mode otherwise

  int64_t dim() const { return g.size(); }
  void apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
};

double model_value(const CubicModel& model, const Eigen::VectorXd& s);

/// grad m(s) = g + B s + sigma ||s|| s.
Eigen::VectorXd model_gradient(const CubicModel& model, const Eigen::VectorXd& s);

/// First-order condition <s, grad m(s)> = 0 split into the residual
/// <s,g> + <s,Bs> + sigma||s||^3 (must vanish) and the curvature slack
/// <s,Bs> + sigma||s||^3 (must be nonnegative). Tolerances are scaled by
/// 1 + |f0| + ||g|| ||s||.
struct A1Check {
  double residual = 0.0;
  double slack = 0.0;
  bool pass = true;
};
A1Check check_a1(const CubicModel& model, const Eigen::VectorXd& s, double tol = 1e-8);

struct SubproblemSolution {
  Eigen::VectorXd step;
  double lambda = 0.0;          // sigma * ||step||
  double model_decrease = 0.0;  // f0 - m(step)
  int krylov_dim = 0;           // 0 for the dense solver
  bool tc_satisfied = true;
  bool breakdown = false;  // Krylov space became invariant
  double a1_residual = 0.0;
  double a1_slack = 0.0;
  int newton_iters = 0;
  // Model value after each Krylov expansion; nonincreasing in exact
  // arithmetic. Empty for the dense solver.
  std::vector<double> subspace_model_values;
};

struct ExactSolverOptions {
  double root_tol = 1e-13;       // relative secular-equation residual
  int max_newton_iters = 200;
  double hard_case_tol = 1e-10;  // |<g, leftmost eigvec>| <= tol * ||g||
};

/// Global minimizer of the cubic model for dense symmetric B: solves
/// (B + lambda I) s = -g, lambda = sigma ||s||, B + lambda I PSD, by a
/// safeguarded Newton iteration on 1/||s(lambda)|| - sigma/lambda over the
/// eigendecomposition of B, with explicit hard-case handling.
SubproblemSolution solve_exact(const CubicModel& model, const ExactSolverOptions& opts = {});

struct LanczosOptions {
  double kappa_theta = 0.5;      // inner stop factor, in (0,1)
  int max_dim = 0;               // 0 means dim()
  double breakdown_tol = 1e-14;  // relative beta threshold
  int full_reorth_limit = 200;   // full reorthogonalization up to this dim
  ExactSolverOptions inner;
};

/// Krylov-subspace minimizer: builds a Lanczos basis of
/// span{g, Bg, B^2 g, ...}, globally minimizes the projected cubic on the
/// tridiagonal model after every expansion, and stops once the termination
/// criterion ||grad m(s)|| <= kappa_theta * min(1, ||s||) * ||g|| holds.
/// Each returned step minimizes the model over its subspace, so the A1
/// conditions hold by construction.
SubproblemSolution solve_lanczos(const CubicModel& model, const LanczosOptions& opts = {});

/// Symmetry probe for operator-mode models: checks <v, Bw> == <w, Bv> on
/// random probe pairs. Returns the worst relative asymmetry.
double probe_operator_asymmetry(const CubicModel& model, int probes, uint64_t seed);

}  // namespace scr
