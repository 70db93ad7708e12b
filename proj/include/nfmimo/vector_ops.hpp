#pragma once

// Fixed-order BLAS-1 helpers on complex vectors. Summation order never depends on the thread
// count, so results are bit-stable.

#include <cmath>
#include <complex>
#include <span>

#include "nfmimo/error.hpp"

namespace nfmimo {

using cplx = std::complex<double>;

/// <a, b> = sum conj(a_i) b_i
inline cplx vdot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw InvalidArgument("vdot: length mismatch");
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

inline double squared_norm(std::span<const cplx> a) {
  double acc = 0.0;
  for (const cplx& v : a) acc += std::norm(v);
  return acc;
}

inline double norm2(std::span<const cplx> a) { return std::sqrt(squared_norm(a)); }

/// y += alpha * x
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  if (x.size() != y.size()) throw InvalidArgument("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const cplx> a) {
  for (const cplx& v : a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace nfmimo
