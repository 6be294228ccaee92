#pragma once

// Complex inner-loop kernels over antenna arrays. Every kernel has a scalar
// reference and an AVX2 variant; the active table is picked at runtime.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace iab::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  /// sum_i a[i] * b[i] (no conjugation).
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
  /// sum_i |a[i]|^2.
  double (*norm_sq)(const cplx* a, std::size_t n);
  /// out[i] = los_weight * los[i] + nlos_weight * nlos[i].
  void (*mix)(cplx* out, const cplx* los, const cplx* nlos, cplx los_weight,
              double nlos_weight, std::size_t n);
  Isa isa;
};

namespace scalar {
cplx dot(const cplx* a, const cplx* b, std::size_t n);
double norm_sq(const cplx* a, std::size_t n);
void mix(cplx* out, const cplx* los, const cplx* nlos, cplx los_weight, double nlos_weight,
         std::size_t n);
}  // namespace scalar

namespace avx2 {
cplx dot(const cplx* a, const cplx* b, std::size_t n);
double norm_sq(const cplx* a, std::size_t n);
void mix(cplx* out, const cplx* los, const cplx* nlos, cplx los_weight, double nlos_weight,
         std::size_t n);
}  // namespace avx2

/// True when the AVX2 variants are compiled in and the CPU reports AVX2+FMA.
bool avx2_available();

const KernelTable& table(Isa isa);

/// Currently selected table; defaults to the best available ISA.
const KernelTable& active();

/// Throws Error(invalid_config) if the requested ISA is unavailable.
void select(Isa isa);

/// Parses "auto" | "scalar" | "avx2" and selects.
void select(std::string_view name);

std::string_view name(Isa isa);

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double norm_sq(std::span<const cplx> a) { return active().norm_sq(a.data(), a.size()); }

}  // namespace iab::kernels
