#pragma once

// Data-parallel inner loops used by the likelihood, the acyclicity term and the
// optimizer. Every kernel has a scalar reference implementation; wider
// variants (AVX2+FMA on x86-64) are selected at runtime and must agree with the
// reference to within rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace zico::kernels {

enum class Isa { kScalar, kAvx2 };

struct AdamWCoefficients {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double weight_decay;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  const char* name;

  // c[m x n] += a[m x k] * b[k x n]; all row-major.
  void (*gemm_nn)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                  const double* b, double* c);
  // c[m x n] += a^T * b where a is [k x m] and b is [k x n].
  void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                  const double* b, double* c);
  double (*sum_squares)(const double* x, std::size_t n);
  void (*scale)(double* x, std::size_t n, double factor);
  // Updates the moments in place and writes the (unscaled) step direction
  //   dir = m_hat / (sqrt(v_hat) + eps) + weight_decay * theta
  // so that the caller can apply theta -= lr * dir with backtracking.
  void (*adamw_direction)(const double* theta, const double* grad, double* m,
                          double* v, double* dir, std::size_t n,
                          const AdamWCoefficients& c);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();
// Null when the AVX2 translation unit was not built.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);

// Active table. The first call picks the widest supported ISA unless the
// ZICO_KERNELS environment variable forces "scalar" or "avx2".
const KernelTable& active();
// Overrides the active table; returns false if the ISA is unavailable.
bool select(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace zico::kernels
