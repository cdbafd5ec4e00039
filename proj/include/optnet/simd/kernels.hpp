#pragma once

// Dense linear-algebra kernels behind every layer product.
//
// Each instruction set provides the same four entry points. The scalar table is
// the reference; vector tables must agree with it to rounding (see
// tests/unit/test_kernels.cpp). Matrices are row-major with no padding.

#include <cstddef>
#include <string_view>

namespace optnet::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
Isa parse_isa(std::string_view name);

struct KernelTable {
  Isa isa;
  /// C[m x n] (+)= A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  /// C[m x n] (+)= A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  /// C[m x n] (+)= A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  /// y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

const KernelTable& scalar_kernels();
/// nullptr when the build has no AVX2 variant.
const KernelTable* avx2_kernels();

/// Best instruction set both compiled in and supported by the running CPU.
Isa detect_isa();
bool isa_available(Isa isa);

/// Active table. Chosen on first use from detect_isa(), unless the
/// OPTNET_ISA environment variable names another available set.
const KernelTable& kernels();

/// Switch the active table. Throws UsageError if `isa` is unavailable.
/// Not thread-safe with concurrent kernel use.
void set_active_isa(Isa isa);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(OPTNET_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace optnet::simd
