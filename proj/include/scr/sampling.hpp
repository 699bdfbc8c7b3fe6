#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "scr/objective.hpp"
#include "scr/rng.hpp"

namespace scr {

/// Theoretical mode sizes the samples so the agreement conditions hold with
/// probability 1-delta (log(2d/delta) terms, constants 32/16). Practical
/// mode follows the O(1-1/d) variant (log(d) terms, constants 32/36) and is
/// the default.
enum class SamplingMode { Theoretical, Practical };

struct SamplingParams {
  SamplingMode mode = SamplingMode::Practical;
  double grad_agreement = 1.0;  // M; scales the gradient sample size
  double hess_agreement = 1.0;  // C; scales the Hessian sample size
  // Lipschitz constants of f_i and grad f_i. Left at 1 they are folded into
  // the user-set agreement constants; estimate_kappas() fills them from a
  // warmup batch when explicit values are wanted.
  double kappa_f = 1.0;
  double kappa_g = 1.0;
  double delta = 0.1;            // theoretical-mode failure probability
  double floor_fraction = 0.05;  // also the iteration-0 fraction
};

struct SampleSizes {
  int64_t grad = 0;
  int64_t hess = 0;
};

int64_t sample_size_floor(const SamplingParams& params, int64_t n);

/// ceil(32 kf^2 (log(2d/delta)+1/4) / (M^2 s^4)) clamped to [floor, n];
/// practical mode replaces log(2d/delta) by log(d). Monotone nonincreasing
/// in the step estimate and in M.
int64_t gradient_sample_size(const SamplingParams& params, double step_norm_estimate, int64_t d,
                             int64_t n);

/// Theoretical: ceil(16 kg^2 log(2d/delta) / (C s)^2); practical:
/// ceil(36 kg^2 log(d) / (C s)^2). Clamped to [floor, n].
int64_t hessian_sample_size(const SamplingParams& params, double step_norm_estimate, int64_t d,
                            int64_t n);

/// Uniform subset of {0..n-1} without replacement, returned in ascending
/// order. size == n short-circuits to the full set without consuming
/// randomness, so pinned-to-n runs are independent of the generator state.
std::vector<int64_t> draw_index_set(int64_t n, int64_t size, Rng& rng);

struct KappaEstimates {
  double kappa_f = 0.0;  // max_i ||grad f_i(x)||
  double kappa_g = 0.0;  // max_i ||hess f_i(x)||_2
};
KappaEstimates estimate_kappas(const Objective& objective, const Eigen::VectorXd& x,
                               IndexSpan warmup);

struct BernsteinReport {
  double violation_rate = 0.0;
  double bound = 0.0;          // deviation bound the trials were tested against
  double mean_deviation = 0.0;
  double max_deviation = 0.0;
  int trials = 0;
};

/// Monte-Carlo check of the gradient deviation bound
/// ||g_S - grad f|| <= 4 sqrt(2) kf sqrt((log(2d/delta)+1/4)/|S|),
/// kf estimated as max_i ||grad f_i(x)||. Desk scale only (full gradient is
/// computed once).
BernsteinReport verify_gradient_bernstein(const Objective& objective, const Eigen::VectorXd& x,
                                          int64_t sample_size, double delta, int trials,
                                          Rng& rng);

/// Spectral-norm analogue: ||B_S - H||_2 <= 4 kg sqrt(log(2d/delta)/|S|),
/// kg estimated as max_i ||hess f_i(x)||_2. Requires small d (dense
/// eigensolves per trial).
BernsteinReport verify_hessian_bernstein(const Objective& objective, const Eigen::VectorXd& x,
                                         int64_t sample_size, double delta, int trials,
                                         Rng& rng);

/// Hand-tuned schedules reaching n exactly at iteration `total`.
SampleSizes schedule_linear(int64_t iteration, int64_t total, int64_t n, int64_t floor_size);
SampleSizes schedule_exponential(int64_t iteration, int64_t total, int64_t n, int64_t floor_size);

}  // namespace scr
