#include <atomic>
#include <cstdlib>
#include <string>

#include "optnet/math/errors.hpp"
#include "optnet/simd/kernels.hpp"

namespace optnet::simd {

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  throw UsageError("unknown instruction set '" + std::string(name) + "'");
}

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* avx2_kernels() {
#if defined(OPTNET_HAVE_AVX2)
  return &detail::kAvx2Table;
#else
  return nullptr;
#endif
}

bool isa_available(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(OPTNET_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_isa() { return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

namespace {

const KernelTable& table_for(Isa isa) {
  if (isa == Isa::Avx2) {
    if (const KernelTable* t = avx2_kernels()) return *t;
  }
  return scalar_kernels();
}

const KernelTable* initial_table() {
  Isa isa = detect_isa();
  if (const char* env = std::getenv("OPTNET_ISA")) {
    const Isa wanted = parse_isa(env);
    if (isa_available(wanted)) isa = wanted;
  }
  return &table_for(isa);
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw UsageError("instruction set '" + std::string(to_string(isa)) +
                     "' is not available on this machine");
  }
  active().store(&table_for(isa), std::memory_order_relaxed);
}

}  // namespace optnet::simd
