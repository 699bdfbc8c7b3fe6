#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>

#include "scr/dataset.hpp"

namespace scr {

using IndexSpan = std::span<const int64_t>;

enum class RegularizerKind { L2, Nonconvex };

/// Numerically stable log(1 + exp(t)).
double log1p_exp(double t);
/// Numerically stable 1 / (1 + exp(-t)).
double sigmoid(double t);

// Per-coordinate non-convex penalty t^2 / (1 + t^2) and its derivatives
// (the regularization weight is applied by the caller). The second
// derivative is certified against finite differences in the tests.
double nonconvex_penalty(double t);
double nonconvex_penalty_d1(double t);
double nonconvex_penalty_d2(double t);

/// Finite-sum objective f(x) = (1/n) sum_i f_i(x). Evaluations accept an
/// explicit index set; summation follows the order of the set, so a fixed
/// set gives bit-identical results run to run. Implementations are immutable
/// after construction and safe for concurrent reads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int64_t num_samples() const = 0;
  virtual int64_t dim() const = 0;

  virtual double value(const Eigen::VectorXd& x, IndexSpan set) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x, IndexSpan set) const = 0;
  virtual Eigen::VectorXd hessian_vector(const Eigen::VectorXd& x, IndexSpan set,
                                         const Eigen::VectorXd& v) const = 0;

  /// Gradient of the single summand f_i (used by SAGA and the
  /// concentration-bound checks).
  virtual Eigen::VectorXd sample_gradient(int64_t i, const Eigen::VectorXd& x) const = 0;

  /// Dense Hessian over the set. Default assembles column-by-column from
  /// hessian_vector; implementations override when they can do better.
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x, IndexSpan set) const;

  /// Dense Hessian of the single summand f_i.
  virtual Eigen::MatrixXd sample_hessian(int64_t i, const Eigen::VectorXd& x) const;

  // Full-batch conveniences (set = {0..n-1}).
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::VectorXd hessian_vector(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
};

/// Binary logistic regression with an L2 or bounded non-convex penalty:
///   f_i(x) = log(1 + exp(-y_i <a_i, x>)) + r(x),
///   r(x)   = lambda * ||x||^2            (L2)
///          = lambda * sum_j x_j^2/(1+x_j^2)  (Nonconvex).
/// The regularizer is never subsampled; only the data term is averaged over
/// the index set. Per-sample Hessians are applied in the factored form
/// w_i * a_i (a_i' v) and never materialized.
class ObjectiveModel final : public Objective {
 public:
  ObjectiveModel(const Dataset& data, RegularizerKind kind, double lambda);

  int64_t num_samples() const override { return data_->num_samples(); }
  int64_t dim() const override { return data_->dim(); }
  RegularizerKind regularizer() const { return kind_; }
  double lambda() const { return lambda_; }
  const Dataset& dataset() const { return *data_; }

  double value(const Eigen::VectorXd& x, IndexSpan set) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, IndexSpan set) const override;
  Eigen::VectorXd hessian_vector(const Eigen::VectorXd& x, IndexSpan set,
                                 const Eigen::VectorXd& v) const override;
  Eigen::VectorXd sample_gradient(int64_t i, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x, IndexSpan set) const override;
  Eigen::MatrixXd sample_hessian(int64_t i, const Eigen::VectorXd& x) const override;

  double regularizer_value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd regularizer_gradient(const Eigen::VectorXd& x) const;
  Eigen::VectorXd regularizer_hessian_vector(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& v) const;

  using Objective::gradient;
  using Objective::hessian;
  using Objective::hessian_vector;
  using Objective::value;

 private:
  void check_inputs(const Eigen::VectorXd& x, IndexSpan set) const;

  const Dataset* data_;
  RegularizerKind kind_;
  double lambda_;
};

/// The ascending full index set {0, ..., n-1}.
std::vector<int64_t> full_index_set(int64_t n);

}  // namespace scr
