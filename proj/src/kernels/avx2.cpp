// Compiled with -mavx2 -mfma. Each __m256d lane pair holds one complex<double>
// as (re, im), so a register carries two array elements.

#include <immintrin.h>

#include "iab/kernels.hpp"

namespace iab::kernels::avx2 {

namespace {

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  // acc_rr = (ar*br, ai*bi, ...), acc_ri = (ar*bi, ai*br, ...)
  __m256d acc_rr = _mm256_setzero_pd();
  __m256d acc_ri = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = load2(a + i);
    const __m256d vb = load2(b + i);
    const __m256d vb_sw = _mm256_permute_pd(vb, 0b0101);
    acc_rr = _mm256_fmadd_pd(va, vb, acc_rr);
    acc_ri = _mm256_fmadd_pd(va, vb_sw, acc_ri);
  }
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  double re = hsum(_mm256_mul_pd(acc_rr, sign));
  double im = hsum(acc_ri);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

double norm_sq(const cplx* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = load2(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return total;
}

void mix(cplx* out, const cplx* los, const cplx* nlos, cplx los_weight, double nlos_weight,
         std::size_t n) {
  const __m256d wr = _mm256_set1_pd(los_weight.real());
  const __m256d wi = _mm256_set1_pd(los_weight.imag());
  const __m256d wn = _mm256_set1_pd(nlos_weight);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d l = load2(los + i);
    const __m256d l_sw = _mm256_permute_pd(l, 0b0101);
    // (lr*wr - li*wi, li*wr + lr*wi)
    const __m256d prod = _mm256_addsub_pd(_mm256_mul_pd(l, wr), _mm256_mul_pd(l_sw, wi));
    const __m256d r = _mm256_fmadd_pd(load2(nlos + i), wn, prod);
    _mm256_storeu_pd(reinterpret_cast<double*>(out + i), r);
  }
  for (; i < n; ++i) {
    const double lr = los[i].real();
    const double li = los[i].imag();
    out[i] = cplx(lr * los_weight.real() - li * los_weight.imag() + nlos_weight * nlos[i].real(),
                  lr * los_weight.imag() + li * los_weight.real() + nlos_weight * nlos[i].imag());
  }
}

}  // namespace iab::kernels::avx2
