// Compiled with -mavx2 -mfma. Nothing in this file may run before
// cpu_supports(Isa::kAvx2) has been checked by the dispatcher.

#include <immintrin.h>

#include <cmath>

#include "zico/kernels.hpp"

namespace zico::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// ci[0..n) += s * bp[0..n)
inline void fma_row(double s, const double* bp, double* ci, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d c0 = _mm256_loadu_pd(ci + j);
    __m256d c1 = _mm256_loadu_pd(ci + j + 4);
    c0 = _mm256_fmadd_pd(vs, _mm256_loadu_pd(bp + j), c0);
    c1 = _mm256_fmadd_pd(vs, _mm256_loadu_pd(bp + j + 4), c1);
    _mm256_storeu_pd(ci + j, c0);
    _mm256_storeu_pd(ci + j + 4, c1);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_loadu_pd(ci + j);
    c0 = _mm256_fmadd_pd(vs, _mm256_loadu_pd(bp + j), c0);
    _mm256_storeu_pd(ci + j, c0);
  }
  for (; j < n; ++j) ci[j] = std::fma(s, bp[j], ci[j]);
}

void gemm_nn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a,
                  const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      fma_row(aip, b + p * n, ci, n);
    }
  }
}

void gemm_tn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a,
                  const double* b, double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = ap[i];
      if (api == 0.0) continue;
      fma_row(api, bp, c + i * n, n);
    }
  }
}

double sum_squares_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d x0 = _mm256_loadu_pd(x + i);
    const __m256d x1 = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(x0, x0, acc0);
    acc1 = _mm256_fmadd_pd(x1, x1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void scale_avx2(double* x, std::size_t n, double factor) {
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(f, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= factor;
}

void adamw_direction_avx2(const double* theta, const double* grad, double* m,
                          double* v, double* dir, std::size_t n,
                          const AdamWCoefficients& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d inv_bc1 = _mm256_set1_pd(1.0 / c.bias_correction1);
  const __m256d inv_bc2 = _mm256_set1_pd(1.0 / c.bias_correction2);
  const __m256d eps = _mm256_set1_pd(c.eps);
  const __m256d wd = _mm256_set1_pd(c.weight_decay);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d mi = _mm256_mul_pd(b1, _mm256_loadu_pd(m + i));
    mi = _mm256_fmadd_pd(one_b1, g, mi);
    __m256d vi = _mm256_mul_pd(b2, _mm256_loadu_pd(v + i));
    vi = _mm256_fmadd_pd(one_b2, _mm256_mul_pd(g, g), vi);
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_mul_pd(mi, inv_bc1);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vi, inv_bc2)), eps);
    const __m256d d = _mm256_fmadd_pd(wd, _mm256_loadu_pd(theta + i), _mm256_div_pd(m_hat, denom));
    _mm256_storeu_pd(dir + i, d);
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * (g * g);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    dir[i] = m_hat / (std::sqrt(v_hat) + c.eps) + c.weight_decay * theta[i];
  }
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

constexpr KernelTable kAvx2Table{
    Isa::kAvx2,     "avx2",      gemm_nn_avx2,         gemm_tn_avx2,
    sum_squares_avx2, scale_avx2, adamw_direction_avx2, axpy_avx2,
};

}  // namespace

const KernelTable* avx2_table_impl() { return &kAvx2Table; }

}  // namespace zico::kernels
