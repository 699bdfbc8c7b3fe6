#include "scr/sampling.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "scr/common.hpp"

namespace scr {

namespace {

int64_t clamp_size(double raw, int64_t floor_size, int64_t n) {
  if (!std::isfinite(raw) || raw >= static_cast<double>(n)) return n;
  const int64_t size = static_cast<int64_t>(std::ceil(raw));
  return std::clamp(size, std::min(floor_size, n), n);
}

void check_size_inputs(const SamplingParams& params, double step, int64_t d, int64_t n) {
  if (step <= 0.0 || !std::isfinite(step))
    throw ContractError("sample size: step norm estimate must be positive");
  if (d < 1 || n < 1) throw ContractError("sample size: d and n must be positive");
  if (params.grad_agreement <= 0.0 || params.hess_agreement <= 0.0 || params.kappa_f <= 0.0 ||
      params.kappa_g <= 0.0)
    throw ContractError("sample size: agreement constants must be positive");
  if (params.mode == SamplingMode::Theoretical &&
      !(params.delta > 0.0 && params.delta < 1.0))
    throw ContractError("sample size: delta must lie in (0,1)");
  if (!(params.floor_fraction > 0.0 && params.floor_fraction <= 1.0))
    throw ContractError("sample size: floor fraction must lie in (0,1]");
}

}  // namespace

int64_t sample_size_floor(const SamplingParams& params, int64_t n) {
  const auto floor_size =
      static_cast<int64_t>(std::ceil(params.floor_fraction * static_cast<double>(n)));
  return std::clamp<int64_t>(floor_size, 1, n);
}

int64_t gradient_sample_size(const SamplingParams& params, double step_norm_estimate, int64_t d,
                             int64_t n) {
  check_size_inputs(params, step_norm_estimate, d, n);
  const double log_term = params.mode == SamplingMode::Theoretical
                              ? std::log(2.0 * static_cast<double>(d) / params.delta)
                              : std::log(static_cast<double>(d));
  const double s2 = step_norm_estimate * step_norm_estimate;
  const double raw = 32.0 * params.kappa_f * params.kappa_f * (log_term + 0.25) /
                     (params.grad_agreement * params.grad_agreement * s2 * s2);
  return clamp_size(raw, sample_size_floor(params, n), n);
}

int64_t hessian_sample_size(const SamplingParams& params, double step_norm_estimate, int64_t d,
                            int64_t n) {
  check_size_inputs(params, step_norm_estimate, d, n);
  const bool theoretical = params.mode == SamplingMode::Theoretical;
  const double log_term = theoretical
                              ? std::log(2.0 * static_cast<double>(d) / params.delta)
                              : std::log(static_cast<double>(d));
  const double constant = theoretical ? 16.0 : 36.0;
  const double cs = params.hess_agreement * step_norm_estimate;
  const double raw = constant * params.kappa_g * params.kappa_g * log_term / (cs * cs);
  return clamp_size(raw, sample_size_floor(params, n), n);
}

std::vector<int64_t> draw_index_set(int64_t n, int64_t size, Rng& rng) {
  if (size < 1 || size > n) throw ContractError("draw_index_set: size out of range");
  std::vector<int64_t> pool(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
  if (size == n) return pool;

  // Partial Fisher-Yates: the first `size` entries become the sample.
  for (int64_t i = 0; i < size; ++i) {
    const auto j = i + static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n - i)));
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(size));
  std::sort(pool.begin(), pool.end());  // ascending summation order
  return pool;
}

KappaEstimates estimate_kappas(const Objective& objective, const Eigen::VectorXd& x,
                               IndexSpan warmup) {
  if (warmup.empty()) throw ContractError("estimate_kappas: empty warmup set");
  KappaEstimates est;
  for (int64_t i : warmup) {
    est.kappa_f = std::max(est.kappa_f, objective.sample_gradient(i, x).norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(objective.sample_hessian(i, x),
                                                      Eigen::EigenvaluesOnly);
    est.kappa_g = std::max(est.kappa_g, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return est;
}

BernsteinReport verify_gradient_bernstein(const Objective& objective, const Eigen::VectorXd& x,
                                          int64_t sample_size, double delta, int trials,
                                          Rng& rng) {
  const int64_t n = objective.num_samples();
  const int64_t d = objective.dim();
  const Eigen::VectorXd full_grad = objective.gradient(x);

  double kappa_f = 0.0;
  for (int64_t i = 0; i < n; ++i)
    kappa_f = std::max(kappa_f, objective.sample_gradient(i, x).norm());

  BernsteinReport report;
  report.trials = trials;
  report.bound = 4.0 * std::sqrt(2.0) * kappa_f *
                 std::sqrt((std::log(2.0 * static_cast<double>(d) / delta) + 0.25) /
                           static_cast<double>(sample_size));
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    const auto set = draw_index_set(n, sample_size, rng);
    const double deviation = (objective.gradient(x, set) - full_grad).norm();
    report.mean_deviation += deviation;
    report.max_deviation = std::max(report.max_deviation, deviation);
    if (deviation > report.bound) ++violations;
  }
  report.mean_deviation /= std::max(trials, 1);
  report.violation_rate = static_cast<double>(violations) / std::max(trials, 1);
  return report;
}

BernsteinReport verify_hessian_bernstein(const Objective& objective, const Eigen::VectorXd& x,
                                         int64_t sample_size, double delta, int trials,
                                         Rng& rng) {
  const int64_t n = objective.num_samples();
  const int64_t d = objective.dim();
  const Eigen::MatrixXd full_hess = objective.hessian(x);

  double kappa_g = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(objective.sample_hessian(i, x),
                                                      Eigen::EigenvaluesOnly);
    kappa_g = std::max(kappa_g, es.eigenvalues().cwiseAbs().maxCoeff());
  }

  BernsteinReport report;
  report.trials = trials;
  report.bound =
      4.0 * kappa_g *
      std::sqrt(std::log(2.0 * static_cast<double>(d) / delta) / static_cast<double>(sample_size));
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    const auto set = draw_index_set(n, sample_size, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(objective.hessian(x, set) - full_hess,
                                                      Eigen::EigenvaluesOnly);
    const double deviation = es.eigenvalues().cwiseAbs().maxCoeff();
    report.mean_deviation += deviation;
    report.max_deviation = std::max(report.max_deviation, deviation);
    if (deviation > report.bound) ++violations;
  }
  report.mean_deviation /= std::max(trials, 1);
  report.violation_rate = static_cast<double>(violations) / std::max(trials, 1);
  return report;
}

SampleSizes schedule_linear(int64_t iteration, int64_t total, int64_t n, int64_t floor_size) {
  if (total < 1 || iteration < 0 || iteration > total)
    throw ContractError("schedule_linear: iteration must lie in [0, total]");
  floor_size = std::clamp<int64_t>(floor_size, 1, n);
  const double frac = static_cast<double>(iteration) / static_cast<double>(total);
  const auto size = static_cast<int64_t>(
      std::llround(static_cast<double>(floor_size) + frac * static_cast<double>(n - floor_size)));
  const int64_t clamped = std::clamp(size, floor_size, n);
  return {clamped, clamped};
}

SampleSizes schedule_exponential(int64_t iteration, int64_t total, int64_t n,
                                 int64_t floor_size) {
  if (total < 1 || iteration < 0 || iteration > total)
    throw ContractError("schedule_exponential: iteration must lie in [0, total]");
  floor_size = std::clamp<int64_t>(floor_size, 1, n);
  if (iteration == total) return {n, n};
  // ratio solved from the endpoints: floor * r^total = n
  const double ratio = std::pow(static_cast<double>(n) / static_cast<double>(floor_size),
                                1.0 / static_cast<double>(total));
  const auto size = static_cast<int64_t>(
      std::ceil(static_cast<double>(floor_size) * std::pow(ratio, static_cast<double>(iteration))));
  const int64_t clamped = std::clamp(size, floor_size, n);
  return {clamped, clamped};
}

}  // namespace scr
