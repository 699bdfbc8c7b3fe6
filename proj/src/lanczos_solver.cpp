#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "scr/common.hpp"
#include "scr/subproblem.hpp"

namespace scr {

namespace {

// Solution of the projected cubic model in tridiagonal coordinates plus the
// quantities the termination test needs.
struct InnerSolve {
  Eigen::VectorXd y;
  double step_norm = 0.0;
  double model_decrease = 0.0;
  double a1_residual = 0.0;
  double a1_slack = 0.0;
  double gradient_norm = 0.0;  // || grad m(Q y) || in the full space
};

InnerSolve solve_projected(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                           double gnorm, double sigma, double next_beta,
                           const ExactSolverOptions& opts) {
  const int64_t m = alpha.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int64_t i = 0; i < m; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < m) {
      t(i, i + 1) = beta[i];
      t(i + 1, i) = beta[i];
    }
  }
  CubicModel projected;
  projected.f0 = 0.0;
  projected.g = Eigen::VectorXd::Zero(m);
  projected.g[0] = gnorm;
  projected.sigma = sigma;
  projected.dense = &t;
  SubproblemSolution inner = solve_exact(projected, opts);

  InnerSolve out;
  out.y = inner.step;
  out.step_norm = inner.step.norm();
  out.model_decrease = inner.model_decrease;
  out.a1_residual = inner.a1_residual;
  out.a1_slack = inner.a1_slack;
  // grad m(Qy) = Q (g_proj + T y + sigma ||y|| y) + next_beta * y_m * q_{m+1};
  // the two parts are orthogonal.
  Eigen::VectorXd inner_grad = projected.g + t * inner.step;
  inner_grad += sigma * out.step_norm * inner.step;
  const double leaked = next_beta * inner.step[m - 1];
  out.gradient_norm = std::sqrt(inner_grad.squaredNorm() + leaked * leaked);
  return out;
}

}  // namespace

SubproblemSolution solve_lanczos(const CubicModel& model, const LanczosOptions& opts) {
  if (model.sigma <= 0.0) throw ContractError("solve_lanczos: sigma must be positive");
  if (!(opts.kappa_theta > 0.0 && opts.kappa_theta < 1.0))
    throw ContractError("solve_lanczos: kappa_theta must lie in (0,1)");

  const int64_t d = model.dim();
  const double gnorm = model.g.norm();

  SubproblemSolution sol;
  if (gnorm == 0.0) {
    // Termination criterion is vacuous at g = 0; the operator-mode solver
    // returns the zero step (the dense solver handles negative curvature).
    sol.step = Eigen::VectorXd::Zero(d);
    return sol;
  }

  const int64_t max_dim = opts.max_dim > 0 ? std::min<int64_t>(opts.max_dim, d) : d;

  std::vector<Eigen::VectorXd> basis;
  basis.reserve(static_cast<size_t>(max_dim));
  basis.push_back(model.g / gnorm);

  Eigen::VectorXd alphas(max_dim), betas(max_dim);
  Eigen::VectorXd w(d);
  InnerSolve best;
  int64_t dims_used = 0;
  bool breakdown = false;
  bool tc = false;

  for (int64_t i = 0; i < max_dim; ++i) {
    model.apply(basis[static_cast<size_t>(i)], w);
    if (i > 0) w -= betas[i - 1] * basis[static_cast<size_t>(i - 1)];
    const double alpha = basis[static_cast<size_t>(i)].dot(w);
    w -= alpha * basis[static_cast<size_t>(i)];
    alphas[i] = alpha;

    if (i < opts.full_reorth_limit) {
      // Two-pass Gram-Schmidt against the whole basis; orthogonality loss is
      // the dominant failure mode at these problem sizes.
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) w -= q.dot(w) * q;
    } else {
      // Selective: recent vectors only.
      for (size_t back = basis.size() >= 2 ? basis.size() - 2 : 0; back < basis.size(); ++back)
        w -= basis[back].dot(w) * basis[back];
    }

    const double beta = w.norm();
    betas[i] = beta;
    dims_used = i + 1;

    const double t_scale = std::max({1.0, alphas.head(i + 1).cwiseAbs().maxCoeff(),
                                     betas.head(i + 1).cwiseAbs().maxCoeff()});
    const bool is_breakdown = beta <= opts.breakdown_tol * t_scale;

    best = solve_projected(alphas.head(i + 1), betas.head(i), gnorm, model.sigma,
                           is_breakdown ? 0.0 : beta, opts.inner);
    sol.subspace_model_values.push_back(model.f0 - best.model_decrease);

    const double theta = opts.kappa_theta * std::min(1.0, best.step_norm);
    const bool tc_hit = best.gradient_norm <= theta * gnorm;
    if (tc_hit || is_breakdown) {
      // On breakdown the Krylov space is invariant, so the projected
      // minimizer is the global minimizer on it; nothing can be gained by
      // expanding further.
      tc = tc_hit;
      breakdown = is_breakdown;
      break;
    }
    if (i + 1 < max_dim) basis.push_back(w / beta);
  }

  sol.step = Eigen::VectorXd::Zero(d);
  for (int64_t j = 0; j < dims_used; ++j) sol.step += best.y[j] * basis[static_cast<size_t>(j)];
  sol.lambda = model.sigma * best.step_norm;
  sol.model_decrease = best.model_decrease;
  sol.krylov_dim = static_cast<int>(dims_used);
  sol.tc_satisfied = tc;
  sol.breakdown = breakdown;
  sol.a1_residual = best.a1_residual;
  sol.a1_slack = best.a1_slack;
  return sol;
}

}  // namespace scr
