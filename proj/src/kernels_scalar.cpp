#include "scr/kernels.hpp"

namespace scr::kernels::scalar {

double dot(const double* a, const double* b, int64_t n) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares(const double* a, int64_t n) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sparse_dot(const int32_t* idx, const double* val, int64_t nnz, const double* x) {
  double acc = 0.0;
  for (int64_t k = 0; k < nnz; ++k) acc += val[k] * x[idx[k]];
  return acc;
}

}  // namespace scr::kernels::scalar
