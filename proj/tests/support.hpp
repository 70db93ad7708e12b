#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "nfmimo/nfmimo.hpp"

namespace nfmimo::testing {

using cvec = std::vector<cplx>;

/// 2 Tx x 3 Rx, 5 frequencies, 7 x 7 x 7 voxels.
inline ImagingConfig tiny_config() {
  ImagingConfig c;
  c.array = mills_cross(0.3, 2, 3);
  c.freqs = {4e9, 16e9, 5};
  c.grid = {7, 7, 7, 0.0125, 0.0125, 0.00625, {0.0, 0.0, 0.5}};
  return c;
}

/// 7 x 7 x 7 voxels with M = 4 * 4 * 25 = 400 >= N = 343.
inline ImagingConfig full_sampling_config() {
  ImagingConfig c;
  c.array = mills_cross(0.3, 4, 4);
  c.freqs = {4e9, 16e9, 25};
  c.grid = {7, 7, 7, 0.0125, 0.0125, 0.00625, {0.0, 0.0, 0.5}};
  return c;
}

/// 64-bit LCG, uniform in [0, 1). Matches tests/oracles/ssim_golden.py.
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : s_(seed) {}
  double next() {
    s_ = s_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s_ >> 11) / 9007199254740992.0;
  }

 private:
  std::uint64_t s_;
};

inline cvec random_complex(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  cvec v(n);
  for (cplx& x : v) x = {rng.normal(), rng.normal()};
  return v;
}

/// Row-major dense A straight from the kernel formula, no shared code with the operator.
inline cvec dense_reference(const ImagingConfig& cfg) {
  const std::size_t M = cfg.num_measurements(), N = cfg.num_voxels();
  cvec a(M * N);
  const double c0 = 299792458.0;
  const double pi = std::acos(-1.0);
  std::size_t m = 0;
  for (const Point3& t : cfg.array.tx)
    for (const Point3& r : cfg.array.rx)
      for (std::size_t f = 0; f < cfg.freqs.n_steps; ++f, ++m) {
        const double fh = cfg.freqs.f_min_hz + (cfg.freqs.f_max_hz - cfg.freqs.f_min_hz) * static_cast<double>(f) /
                                                   static_cast<double>(cfg.freqs.n_steps - 1);
        const double k = 2.0 * pi * fh / c0;
        std::size_t n = 0;
        for (std::size_t ix = 0; ix < cfg.grid.nx; ++ix)
          for (std::size_t iy = 0; iy < cfg.grid.ny; ++iy)
            for (std::size_t iz = 0; iz < cfg.grid.nz; ++iz, ++n) {
              const double vx = cfg.grid.center.x + (static_cast<double>(ix) - 0.5 * static_cast<double>(cfg.grid.nx - 1)) * cfg.grid.dx;
              const double vy = cfg.grid.center.y + (static_cast<double>(iy) - 0.5 * static_cast<double>(cfg.grid.ny - 1)) * cfg.grid.dy;
              const double vz = cfg.grid.center.z + (static_cast<double>(iz) - 0.5 * static_cast<double>(cfg.grid.nz - 1)) * cfg.grid.dz;
              const double dt = std::hypot(vx - t.x, vy - t.y, vz - t.z);
              const double dr = std::hypot(vx - r.x, vy - r.y, vz - r.z);
              a[m * N + n] = std::polar(1.0 / (4.0 * pi * dt * dr), -k * (dt + dr));
            }
      }
  return a;
}

inline cvec dense_mul(const cvec& a, std::size_t M, std::size_t N, const cvec& s) {
  cvec y(M);
  for (std::size_t m = 0; m < M; ++m) {
    cplx acc = 0.0;
    for (std::size_t n = 0; n < N; ++n) acc += a[m * N + n] * s[n];
    y[m] = acc;
  }
  return y;
}

inline cvec dense_mul_adj(const cvec& a, std::size_t M, std::size_t N, const cvec& y) {
  cvec s(N);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < N; ++n) s[n] += std::conj(a[m * N + n]) * y[m];
  return s;
}

inline double rel_err(const cvec& a, const cvec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

/// Smoothed-TV objective and its gradient (w.r.t. real and imaginary parts packed as complex),
/// with its own finite differences.
struct TvOracleProblem {
  cvec a;
  std::size_t M, N, nx, ny, nz;
  cvec y;
  double lambda, eps;

  std::size_t at(std::size_t x, std::size_t yy, std::size_t z) const { return (x * ny + yy) * nz + z; }

  double value_and_grad(const cvec& s, cvec* grad) const {
    cvec r = dense_mul(a, M, N, s);
    double f = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      r[m] -= y[m];
      f += std::norm(r[m]);
    }
    if (grad) {
      *grad = dense_mul_adj(a, M, N, r);
      for (cplx& g : *grad) g *= 2.0;
    }
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t yy = 0; yy < ny; ++yy)
        for (std::size_t z = 0; z < nz; ++z) {
          const std::size_t i = at(x, yy, z);
          const std::size_t nb[3] = {x + 1 < nx ? at(x + 1, yy, z) : i, yy + 1 < ny ? at(x, yy + 1, z) : i,
                                     z + 1 < nz ? at(x, yy, z + 1) : i};
          for (std::size_t j : nb) {
            const cplx d = s[j] - s[i];
            const double mag = std::sqrt(std::norm(d) + eps);
            f += lambda * mag;
            if (grad && j != i) {
              const cplx g = lambda * d / mag;
              (*grad)[j] += g;
              (*grad)[i] -= g;
            }
          }
        }
    return f;
  }
};

/// Accelerated gradient with backtracking and function-value restart.
inline double tv_oracle_minimize(const TvOracleProblem& p, cvec s, std::size_t iters) {
  double step = 1.0;
  cvec x = s, x_prev = s, v = s, g;
  double t = 1.0;
  double fx = p.value_and_grad(x, nullptr);
  for (std::size_t it = 0; it < iters; ++it) {
    const double fv = p.value_and_grad(v, &g);
    double gg = 0.0;
    for (const cplx& z : g) gg += std::norm(z);
    if (gg == 0.0) break;
    cvec cand(p.N);
    double fc = 0.0;
    for (;;) {
      for (std::size_t n = 0; n < p.N; ++n) cand[n] = v[n] - step * g[n];
      fc = p.value_and_grad(cand, nullptr);
      if (fc <= fv - 0.5 * step * gg) break;
      step *= 0.5;
      if (step < 1e-30) break;
    }
    if (fc > fx) {
      // restart momentum
      t = 1.0;
      v = x;
      continue;
    }
    x_prev = x;
    x = cand;
    fx = fc;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t n = 0; n < p.N; ++n) v[n] = x[n] + ((t - 1.0) / t_next) * (x[n] - x_prev[n]);
    t = t_next;
    step *= 1.1;
  }
  return fx;
}

/// Kolmogorov-Smirnov statistic of samples against U(lo, hi).
inline double ks_uniform(std::vector<double> v, double lo, double hi) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = (v[i] - lo) / (hi - lo);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace nfmimo::testing
