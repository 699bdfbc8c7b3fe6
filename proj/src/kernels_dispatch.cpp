#include "scr/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "scr/common.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#define SCR_KERNELS_X86 1
#else
#define SCR_KERNELS_X86 0
#endif

namespace scr::kernels {

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, int64_t);
  double (*sum_squares)(const double*, int64_t);
  void (*axpy)(double, const double*, double*, int64_t);
  double (*sparse_dot)(const int32_t*, const double*, int64_t, const double*);
};

constexpr KernelTable kScalarTable{scalar::dot, scalar::sum_squares, scalar::axpy,
                                   scalar::sparse_dot};

#if SCR_KERNELS_X86
constexpr KernelTable kAvx2Table{avx2::dot, avx2::sum_squares, avx2::axpy, avx2::sparse_dot};
#endif

struct Dispatch {
  Isa isa;
  const KernelTable* table;
};

Isa detect_isa() {
  if (const char* env = std::getenv("SCR_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::Avx2;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

Dispatch make_dispatch(Isa isa) {
#if SCR_KERNELS_X86
  if (isa == Isa::Avx2) return {Isa::Avx2, &kAvx2Table};
#endif
  return {Isa::Scalar, &kScalarTable};
}

Dispatch& dispatch() {
  static Dispatch d = make_dispatch(detect_isa());
  return d;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_compiled() { return SCR_KERNELS_X86 != 0; }

bool cpu_has_avx2() {
#if SCR_KERNELS_X86
  unsigned eax, ebx, ecx, edx;
  if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
  const bool avx2 = (ebx & (1u << 5)) != 0;
  if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
  const bool fma = (ecx & (1u << 12)) != 0;
  return avx2 && fma;
#else
  return false;
#endif
}

Isa active_isa() { return dispatch().isa; }

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && !(avx2_compiled() && cpu_has_avx2()))
    throw ContractError("force_isa: AVX2 kernels unavailable on this CPU/build");
  dispatch() = make_dispatch(isa);
}

void reset_isa() { dispatch() = make_dispatch(detect_isa()); }

double dot(const double* a, const double* b, int64_t n) { return dispatch().table->dot(a, b, n); }

double sum_squares(const double* a, int64_t n) { return dispatch().table->sum_squares(a, n); }

void axpy(double alpha, const double* x, double* y, int64_t n) {
  dispatch().table->axpy(alpha, x, y, n);
}

double sparse_dot(const int32_t* idx, const double* val, int64_t nnz, const double* x) {
  return dispatch().table->sparse_dot(idx, val, nnz, x);
}

void sparse_axpy(double alpha, const int32_t* idx, const double* val, int64_t nnz, double* y) {
  for (int64_t k = 0; k < nnz; ++k) y[idx[k]] += alpha * val[k];
}

}  // namespace scr::kernels
