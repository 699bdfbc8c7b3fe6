#include "scr/objective.hpp"

#include <cmath>
#include <numeric>

#include "scr/common.hpp"
#include "scr/kernels.hpp"

namespace scr {

double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double nonconvex_penalty(double t) { return t * t / (1.0 + t * t); }

double nonconvex_penalty_d1(double t) {
  const double q = 1.0 + t * t;
  return 2.0 * t / (q * q);
}

double nonconvex_penalty_d2(double t) {
  const double q = 1.0 + t * t;
  return 2.0 * (1.0 - 3.0 * t * t) / (q * q * q);
}

std::vector<int64_t> full_index_set(int64_t n) {
  std::vector<int64_t> set(static_cast<size_t>(n));
  std::iota(set.begin(), set.end(), int64_t{0});
  return set;
}

Eigen::MatrixXd Objective::hessian(const Eigen::VectorXd& x, IndexSpan set) const {
  const int64_t d = dim();
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(d);
  for (int64_t j = 0; j < d; ++j) {
    unit[j] = 1.0;
    h.col(j) = hessian_vector(x, set, unit);
    unit[j] = 0.0;
  }
  return h;
}

Eigen::MatrixXd Objective::sample_hessian(int64_t i, const Eigen::VectorXd& x) const {
  const int64_t idx[1] = {i};
  return hessian(x, IndexSpan(idx, 1));
}

double Objective::value(const Eigen::VectorXd& x) const { return value(x, full_index_set(num_samples())); }

Eigen::VectorXd Objective::gradient(const Eigen::VectorXd& x) const {
  return gradient(x, full_index_set(num_samples()));
}

Eigen::VectorXd Objective::hessian_vector(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& v) const {
  return hessian_vector(x, full_index_set(num_samples()), v);
}

Eigen::MatrixXd Objective::hessian(const Eigen::VectorXd& x) const {
  return hessian(x, full_index_set(num_samples()));
}

ObjectiveModel::ObjectiveModel(const Dataset& data, RegularizerKind kind, double lambda)
    : data_(&data), kind_(kind), lambda_(lambda) {
  if (lambda < 0.0) throw ContractError("ObjectiveModel: lambda must be nonnegative");
}

void ObjectiveModel::check_inputs(const Eigen::VectorXd& x, IndexSpan set) const {
  if (set.empty()) throw ContractError("ObjectiveModel: empty index set");
  if (x.size() != dim()) throw ContractError("ObjectiveModel: x has wrong dimension");
  if (!x.allFinite()) throw ContractError("ObjectiveModel: non-finite input vector");
  const int64_t n = num_samples();
  for (int64_t i : set)
    if (i < 0 || i >= n) throw ContractError("ObjectiveModel: index out of range");
}

double ObjectiveModel::regularizer_value(const Eigen::VectorXd& x) const {
  if (kind_ == RegularizerKind::L2)
    return lambda_ * kernels::sum_squares(x.data(), x.size());
  double acc = 0.0;
  for (int64_t j = 0; j < x.size(); ++j) acc += nonconvex_penalty(x[j]);
  return lambda_ * acc;
}

Eigen::VectorXd ObjectiveModel::regularizer_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(x.size());
  if (kind_ == RegularizerKind::L2) {
    g = 2.0 * lambda_ * x;
  } else {
    for (int64_t j = 0; j < x.size(); ++j) g[j] = lambda_ * nonconvex_penalty_d1(x[j]);
  }
  return g;
}

Eigen::VectorXd ObjectiveModel::regularizer_hessian_vector(const Eigen::VectorXd& x,
                                                           const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  if (kind_ == RegularizerKind::L2) {
    out = 2.0 * lambda_ * v;
  } else {
    for (int64_t j = 0; j < v.size(); ++j) out[j] = lambda_ * nonconvex_penalty_d2(x[j]) * v[j];
  }
  return out;
}

double ObjectiveModel::value(const Eigen::VectorXd& x, IndexSpan set) const {
  check_inputs(x, set);
  double acc = 0.0;
  for (int64_t i : set) {
    const double z = data_->row_dot(i, x.data());
    acc += log1p_exp(-data_->label(i) * z);
  }
  return acc / static_cast<double>(set.size()) + regularizer_value(x);
}

Eigen::VectorXd ObjectiveModel::gradient(const Eigen::VectorXd& x, IndexSpan set) const {
  check_inputs(x, set);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
  for (int64_t i : set) {
    const double y = data_->label(i);
    const double z = data_->row_dot(i, x.data());
    const double coeff = -y * sigmoid(-y * z);
    data_->row_axpy(i, coeff, g.data());
  }
  g /= static_cast<double>(set.size());
  g += regularizer_gradient(x);
  return g;
}

Eigen::VectorXd ObjectiveModel::hessian_vector(const Eigen::VectorXd& x, IndexSpan set,
                                               const Eigen::VectorXd& v) const {
  check_inputs(x, set);
  if (v.size() != dim()) throw ContractError("ObjectiveModel: v has wrong dimension");
  if (!v.allFinite()) throw ContractError("ObjectiveModel: non-finite input vector");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  for (int64_t i : set) {
    const double z = data_->row_dot(i, x.data());
    const double weight = sigmoid(z) * sigmoid(-z);  // stable for large |z|
    const double along = data_->row_dot(i, v.data());
    data_->row_axpy(i, weight * along, out.data());
  }
  out /= static_cast<double>(set.size());
  out += regularizer_hessian_vector(x, v);
  return out;
}

Eigen::VectorXd ObjectiveModel::sample_gradient(int64_t i, const Eigen::VectorXd& x) const {
  const int64_t idx[1] = {i};
  return gradient(x, IndexSpan(idx, 1));
}

Eigen::MatrixXd ObjectiveModel::hessian(const Eigen::VectorXd& x, IndexSpan set) const {
  check_inputs(x, set);
  const int64_t d = dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd row(d);
  const double inv = 1.0 / static_cast<double>(set.size());
  for (int64_t i : set) {
    const double z = data_->row_dot(i, x.data());
    const double weight = sigmoid(z) * sigmoid(-z);
    data_->row_dense(i, row.data());
    h.selfadjointView<Eigen::Lower>().rankUpdate(row, weight * inv);
  }
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  if (kind_ == RegularizerKind::L2) {
    h.diagonal().array() += 2.0 * lambda_;
  } else {
    for (int64_t j = 0; j < d; ++j) h(j, j) += lambda_ * nonconvex_penalty_d2(x[j]);
  }
  return h;
}

Eigen::MatrixXd ObjectiveModel::sample_hessian(int64_t i, const Eigen::VectorXd& x) const {
  const int64_t idx[1] = {i};
  return hessian(x, IndexSpan(idx, 1));
}

}  // namespace scr
