// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "optnet/simd/kernels.hpp"

namespace optnet::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double dot(const double* x, const double* y, std::size_t k) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 8 <= k; p += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + p), _mm256_loadu_pd(y + p), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + p + 4), _mm256_loadu_pd(y + p + 4), acc1);
  }
  for (; p + 4 <= k; p += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + p), _mm256_loadu_pd(y + p), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; p < k; ++p) acc += x[p] * y[p];
  return acc;
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    std::size_t j = 0;
    // Four rows of B per pass share the loads of A's row.
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd();
      __m256d s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(ai + p);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
      }
      // Transpose-reduce the four accumulators into one vector of dot products.
      const __m256d t01 = _mm256_hadd_pd(s0, s1);
      const __m256d t23 = _mm256_hadd_pd(s2, s3);
      const __m256d swapped = _mm256_permute2f128_pd(t01, t23, 0x21);
      const __m256d blended = _mm256_blend_pd(t01, t23, 0b1100);
      __m256d sums = _mm256_add_pd(swapped, blended);
      alignas(32) double out[4];
      _mm256_store_pd(out, sums);
      for (; p < k; ++p) {
        const double ap = ai[p];
        out[0] += ap * b0[p];
        out[1] += ap * b1[p];
        out[2] += ap * b2[p];
        out[3] += ap * b3[p];
      }
      sums = _mm256_load_pd(out);
      if (accumulate) sums = _mm256_add_pd(sums, _mm256_loadu_pd(ci + j));
      _mm256_storeu_pd(ci + j, sums);
    }
    for (; j < n; ++j) {
      const double acc = dot(ai, b + j * k, k);
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

// Shared body of gemm_tn / gemm_nn: C row i gets sum_p coef(i, p) * B[p, :],
// with the C row held in registers 16 columns at a time.
template <typename Coef>
inline void rank_update_row(std::size_t n, std::size_t k, const double* b, double* ci,
                            bool accumulate, Coef coef) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256d c0 = accumulate ? _mm256_loadu_pd(ci + j) : _mm256_setzero_pd();
    __m256d c1 = accumulate ? _mm256_loadu_pd(ci + j + 4) : _mm256_setzero_pd();
    __m256d c2 = accumulate ? _mm256_loadu_pd(ci + j + 8) : _mm256_setzero_pd();
    __m256d c3 = accumulate ? _mm256_loadu_pd(ci + j + 12) : _mm256_setzero_pd();
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d s = _mm256_set1_pd(coef(p));
      const double* bp = b + p * n + j;
      c0 = _mm256_fmadd_pd(s, _mm256_loadu_pd(bp), c0);
      c1 = _mm256_fmadd_pd(s, _mm256_loadu_pd(bp + 4), c1);
      c2 = _mm256_fmadd_pd(s, _mm256_loadu_pd(bp + 8), c2);
      c3 = _mm256_fmadd_pd(s, _mm256_loadu_pd(bp + 12), c3);
    }
    _mm256_storeu_pd(ci + j, c0);
    _mm256_storeu_pd(ci + j + 4, c1);
    _mm256_storeu_pd(ci + j + 8, c2);
    _mm256_storeu_pd(ci + j + 12, c3);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = accumulate ? _mm256_loadu_pd(ci + j) : _mm256_setzero_pd();
    for (std::size_t p = 0; p < k; ++p) {
      c0 = _mm256_fmadd_pd(_mm256_set1_pd(coef(p)), _mm256_loadu_pd(b + p * n + j), c0);
    }
    _mm256_storeu_pd(ci + j, c0);
  }
  for (; j < n; ++j) {
    double acc = accumulate ? ci[j] : 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += coef(p) * b[p * n + j];
    ci[j] = acc;
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    rank_update_row(n, k, b, c + i * n, accumulate,
                    [a, m, i](std::size_t p) { return a[p * m + i]; });
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    rank_update_row(n, k, b, c + i * n, accumulate, [ai](std::size_t p) { return ai[p]; });
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2, &gemm_nt, &gemm_tn, &gemm_nn, &axpy};
}

}  // namespace optnet::simd
