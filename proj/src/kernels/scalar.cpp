#include "iab/kernels.hpp"

namespace iab::kernels::scalar {

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

double norm_sq(const cplx* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  }
  return acc;
}

void mix(cplx* out, const cplx* los, const cplx* nlos, cplx los_weight, double nlos_weight,
         std::size_t n) {
  const double wr = los_weight.real();
  const double wi = los_weight.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double lr = los[i].real();
    const double li = los[i].imag();
    out[i] = cplx(lr * wr - li * wi + nlos_weight * nlos[i].real(),
                  lr * wi + li * wr + nlos_weight * nlos[i].imag());
  }
}

}  // namespace iab::kernels::scalar
