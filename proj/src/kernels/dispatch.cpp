#include <atomic>

#include "iab/errors.hpp"
#include "iab/kernels.hpp"

namespace iab::kernels {

namespace {

const KernelTable kScalar{&scalar::dot, &scalar::norm_sq, &scalar::mix, Isa::scalar};

#ifdef IAB_HAVE_AVX2_KERNELS
const KernelTable kAvx2{&avx2::dot, &avx2::norm_sq, &avx2::mix, Isa::avx2};
#endif

const KernelTable* best() { return avx2_available() ? &table(Isa::avx2) : &kScalar; }

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{best()};
  return ptr;
}

}  // namespace

bool avx2_available() {
#if defined(IAB_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table(Isa isa) {
  if (isa == Isa::avx2) {
#ifdef IAB_HAVE_AVX2_KERNELS
    if (avx2_available()) return kAvx2;
#endif
    throw Error(Errc::invalid_config, "avx2 kernels are not available on this host");
  }
  return kScalar;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

void select(std::string_view name) {
  if (name == "auto") {
    current().store(best(), std::memory_order_release);
  } else if (name == "scalar") {
    select(Isa::scalar);
  } else if (name == "avx2") {
    select(Isa::avx2);
  } else {
    throw Error(Errc::invalid_config, "unknown kernel set '" + std::string(name) + "'");
  }
}

std::string_view name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace iab::kernels
