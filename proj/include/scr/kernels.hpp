#pragma once

#include <cstdint>

namespace scr::kernels {

/// Instruction sets the dense inner loops can run on. Scalar kernels are the
/// reference implementation; vector variants must agree with them to tight
/// floating-point tolerance (see tests/test_kernels.cpp).
enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);

/// True when the running CPU reports AVX2 + FMA support.
bool cpu_has_avx2();

/// True when AVX2 kernels were compiled into this binary.
bool avx2_compiled();

/// Currently dispatched instruction set. Resolution order: force_isa() if
/// called, else the SCR_KERNELS environment variable ("scalar"/"avx2"),
/// else the best set the CPU supports.
Isa active_isa();

/// Pin the dispatched instruction set. Throws if the requested set is not
/// available on this CPU/build.
void force_isa(Isa isa);

/// Drop a force_isa() pin and re-detect.
void reset_isa();

// Dispatched entry points. Accumulation order within one kernel variant is
// fixed, so results are reproducible run-to-run for a given Isa.
double dot(const double* a, const double* b, int64_t n);
double sum_squares(const double* a, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);
double sparse_dot(const int32_t* idx, const double* val, int64_t nnz, const double* x);

/// y[idx[k]] += alpha * val[k]. Scatter has no AVX2 form; always scalar.
void sparse_axpy(double alpha, const int32_t* idx, const double* val, int64_t nnz, double* y);

namespace scalar {
double dot(const double* a, const double* b, int64_t n);
double sum_squares(const double* a, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);
double sparse_dot(const int32_t* idx, const double* val, int64_t nnz, const double* x);
}  // namespace scalar

namespace avx2 {
// Defined only when avx2_compiled(); call through the dispatched entry
// points unless you have checked cpu_has_avx2().
double dot(const double* a, const double* b, int64_t n);
double sum_squares(const double* a, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);
double sparse_dot(const int32_t* idx, const double* val, int64_t nnz, const double* x);
}  // namespace avx2

}  // namespace scr::kernels
