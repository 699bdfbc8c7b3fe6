#include <Eigen/Core>
#include <cmath>

#include "scr/common.hpp"
#include "scr/rng.hpp"
#include "scr/subproblem.hpp"

namespace scr {

void CubicModel::apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (dense != nullptr) {
    out.noalias() = (*dense) * v;
    return;
  }
  if (!op) throw ContractError("CubicModel: no operator set");
  op(v, out);
}

Eigen::VectorXd CubicModel::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  apply(v, out);
  return out;
}

double model_value(const CubicModel& model, const Eigen::VectorXd& s) {
  const double norm = s.norm();
  return model.f0 + model.g.dot(s) + 0.5 * s.dot(model.apply(s)) +
         model.sigma / 3.0 * norm * norm * norm;
}

Eigen::VectorXd model_gradient(const CubicModel& model, const Eigen::VectorXd& s) {
  return model.g + model.apply(s) + model.sigma * s.norm() * s;
}

A1Check check_a1(const CubicModel& model, const Eigen::VectorXd& s, double tol) {
  const double norm = s.norm();
  const double curvature = s.dot(model.apply(s));
  const double cubic = model.sigma * norm * norm * norm;
  A1Check out;
  out.residual = s.dot(model.g) + curvature + cubic;
  out.slack = curvature + cubic;
  const double scale = 1.0 + std::abs(model.f0) + model.g.norm() * norm;
  out.pass = std::abs(out.residual) <= tol * scale && out.slack >= -tol * scale;
  return out;
}

double probe_operator_asymmetry(const CubicModel& model, int probes, uint64_t seed) {
  Rng rng(seed);
  const int64_t d = model.dim();
  double worst = 0.0;
  Eigen::VectorXd v(d), w(d);
  for (int p = 0; p < probes; ++p) {
    for (int64_t j = 0; j < d; ++j) v[j] = rng.normal();
    for (int64_t j = 0; j < d; ++j) w[j] = rng.normal();
    const double vbw = v.dot(model.apply(w));
    const double wbv = w.dot(model.apply(v));
    const double scale = 1.0 + std::max(std::abs(vbw), std::abs(wbv));
    worst = std::max(worst, std::abs(vbw - wbv) / scale);
  }
  return worst;
}

}  // namespace scr
