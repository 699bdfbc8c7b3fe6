#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "scr/common.hpp"
#include "scr/subproblem.hpp"

namespace scr {

namespace {

struct EigenCoords {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd basis;
  Eigen::VectorXd g_coords;  // basis^T g
};

// ||s(lambda)||^2 and its lambda-derivative in eigen coordinates, where
// s(lambda) = -(B + lambda I)^{-1} g.
double step_norm_sq(const EigenCoords& ec, double lambda, double* derivative) {
  double nsq = 0.0;
  double dnsq = 0.0;
  for (int64_t j = 0; j < ec.eigenvalues.size(); ++j) {
    const double denom = ec.eigenvalues[j] + lambda;
    const double term = ec.g_coords[j] / denom;
    nsq += term * term;
    dnsq += term * term / denom;
  }
  if (derivative != nullptr) *derivative = -2.0 * dnsq;
  return nsq;
}

SubproblemSolution assemble(const CubicModel& model, const EigenCoords& ec,
                            const Eigen::VectorXd& coords, int newton_iters) {
  SubproblemSolution sol;
  sol.step = ec.basis * coords;
  const double norm = coords.norm();
  const double cubic = model.sigma * norm * norm * norm;
  const double gs = ec.g_coords.dot(coords);
  const double curvature = coords.dot(ec.eigenvalues.cwiseProduct(coords));
  sol.lambda = model.sigma * norm;
  sol.model_decrease = -(gs + 0.5 * curvature + cubic / 3.0);
  sol.a1_residual = gs + curvature + cubic;
  sol.a1_slack = curvature + cubic;
  sol.newton_iters = newton_iters;
  return sol;
}

}  // namespace

SubproblemSolution solve_exact(const CubicModel& model, const ExactSolverOptions& opts) {
  if (model.dense == nullptr) throw ContractError("solve_exact: dense B required");
  if (model.sigma <= 0.0) throw ContractError("solve_exact: sigma must be positive");
  const Eigen::MatrixXd& b = *model.dense;
  const int64_t d = model.dim();
  if (b.rows() != d || b.cols() != d) throw ContractError("solve_exact: B/g dimension mismatch");

  const double b_scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * b_scale)
    throw ContractError("solve_exact: B is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  if (es.info() != Eigen::Success) throw SolverError("solve_exact: eigendecomposition failed");

  EigenCoords ec{es.eigenvalues(), es.eigenvectors(), es.eigenvectors().transpose() * model.g};
  const double leftmost = ec.eigenvalues[0];
  const double gnorm = model.g.norm();
  Eigen::VectorXd coords = Eigen::VectorXd::Zero(d);

  if (gnorm == 0.0) {
    // No first-order information. The model minimizer is 0 when B is PSD,
    // otherwise a leftmost-eigenvector step of length -leftmost/sigma.
    if (leftmost < 0.0) coords[0] = -leftmost / model.sigma;
    return assemble(model, ec, coords, 0);
  }

  const double lo = std::max(-leftmost, 0.0);

  if (leftmost < 0.0) {
    const double cluster_tol = 1e-12 * std::max(1.0, std::abs(leftmost));
    int64_t cluster_end = 0;
    while (cluster_end < d && ec.eigenvalues[cluster_end] <= leftmost + cluster_tol)
      ++cluster_end;
    double g_leftmost_sq = 0.0;
    for (int64_t j = 0; j < cluster_end; ++j) g_leftmost_sq += ec.g_coords[j] * ec.g_coords[j];

    if (std::sqrt(g_leftmost_sq) <= opts.hard_case_tol * gnorm) {
      double perp_sq = 0.0;
      for (int64_t j = cluster_end; j < d; ++j) {
        const double term = ec.g_coords[j] / (ec.eigenvalues[j] + lo);
        perp_sq += term * term;
      }
      const double target = lo / model.sigma;  // required step length at lambda = -leftmost
      if (perp_sq <= target * target) {
        // Hard case: lambda* = -leftmost, pad with a leftmost-eigenvector
        // component so that sigma ||s|| = lambda*.
        for (int64_t j = cluster_end; j < d; ++j)
          coords[j] = -ec.g_coords[j] / (ec.eigenvalues[j] + lo);
        coords[0] = std::sqrt(std::max(0.0, target * target - perp_sq));
        return assemble(model, ec, coords, 0);
      }
    }
  }

  // Safeguarded Newton on phi(lambda) = 1/||s(lambda)|| - sigma/lambda, which
  // is increasing on (lo, inf) and crosses zero at the secular root.
  double hi = 0.5 * (-leftmost + std::sqrt(leftmost * leftmost + 4.0 * model.sigma * gnorm));
  if (!(hi > lo)) hi = lo + std::max(1.0, std::abs(lo));
  for (int grow = 0; grow < 200; ++grow) {
    const double nsq = step_norm_sq(ec, hi, nullptr);
    if (1.0 / std::sqrt(nsq) - model.sigma / hi >= 0.0) break;
    hi *= 2.0;
  }

  double bracket_lo = lo;
  double bracket_hi = hi;
  double lambda = 0.5 * (bracket_lo + bracket_hi);
  int iters = 0;
  bool converged = false;
  for (; iters < opts.max_newton_iters; ++iters) {
    double dnsq = 0.0;
    const double nsq = step_norm_sq(ec, lambda, &dnsq);
    const double ns = std::sqrt(nsq);
    // Secular residual ||s(lambda)|| - lambda/sigma drives the A1 identity
    // error, so convergence is measured on it directly.
    if (std::abs(ns - lambda / model.sigma) <= opts.root_tol * std::max(1.0, ns)) {
      converged = true;
      break;
    }
    const double phi = 1.0 / ns - model.sigma / lambda;
    const double dphi = -0.5 * dnsq / (nsq * ns) + model.sigma / (lambda * lambda);
    if (phi < 0.0)
      bracket_lo = lambda;
    else
      bracket_hi = lambda;
    double next = lambda - phi / dphi;
    if (!(next > bracket_lo && next < bracket_hi)) next = 0.5 * (bracket_lo + bracket_hi);
    if (next == lambda || bracket_hi - bracket_lo <=
                              1e-16 * std::max(1.0, std::abs(lambda))) {
      converged = true;  // bracket exhausted at floating-point resolution
      break;
    }
    lambda = next;
  }
  if (!converged)
    throw SolverError("solve_exact: secular Newton did not converge after " +
                      std::to_string(opts.max_newton_iters) + " iterations (lambda=" +
                      std::to_string(lambda) + ", bracket width=" +
                      std::to_string(bracket_hi - bracket_lo) + ")");

  for (int64_t j = 0; j < d; ++j) coords[j] = -ec.g_coords[j] / (ec.eigenvalues[j] + lambda);
  return assemble(model, ec, coords, iters);
}

}  // namespace scr
