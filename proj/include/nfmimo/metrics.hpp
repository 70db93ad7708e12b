#pragma once

// Magnitude-domain quality metrics.
//
// psnr3d: 10 log10(s_max^2 / MSE) over all voxels, s_max = max |truth|, capped at 300 dB.
// ssim_slice_avg: Gaussian-window SSIM (11 x 11, sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1) on every
// x-y slice at fixed z, averaged over z. Windows are evaluated only where they fit entirely inside
// the slice ("valid" filtering, as in the reference SSIM implementation).

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "nfmimo/error.hpp"
#include "nfmimo/forward_model.hpp"
#include "nfmimo/geometry.hpp"

namespace nfmimo {

inline constexpr double psnr_cap_db = 300.0;

namespace detail {

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

}  // namespace detail

template <class T, class U>
double psnr3d(std::span<const T> truth, std::span<const U> recon) {
  if (truth.size() != recon.size()) throw InvalidArgument("psnr3d: shape mismatch");
  if (truth.empty()) throw InvalidArgument("psnr3d: empty volumes");
  double peak = 0.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double t = detail::magnitude(truth[i]);
    const double d = t - detail::magnitude(recon[i]);
    peak = std::max(peak, t);
    sse += d * d;
  }
  if (!(peak > 0.0)) throw InvalidArgument("psnr3d: ground truth is all zero");
  const double mse = sse / static_cast<double>(truth.size());
  if (mse == 0.0) return psnr_cap_db;
  return std::min(psnr_cap_db, 10.0 * std::log10(peak * peak / mse));
}

template <class A, class B>
double psnr3d(const A& truth, const B& recon) {
  if (!(truth.grid == recon.grid)) throw InvalidArgument("psnr3d: grid mismatch");
  return psnr3d(std::span(truth.values.data(), truth.values.size()), std::span(recon.values.data(), recon.values.size()));
}

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM of two nx-by-ny images stored row-major (x outer, y inner).
inline double ssim2d(std::span<const double> a, std::span<const double> b, std::size_t nx, std::size_t ny,
                     const SsimParams& prm = {}) {
  if (a.size() != nx * ny || b.size() != nx * ny) throw InvalidArgument("ssim2d: shape mismatch");
  const std::size_t w = prm.window;
  if (nx < w || ny < w) throw InvalidArgument("ssim2d: image smaller than the SSIM window");

  std::vector<double> kernel(w * w);
  {
    const double half = 0.5 * static_cast<double>(w - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const double di = static_cast<double>(i) - half;
        const double dj = static_cast<double>(j) - half;
        const double v = std::exp(-(di * di + dj * dj) / (2.0 * prm.sigma * prm.sigma));
        kernel[i * w + j] = v;
        sum += v;
      }
    }
    for (double& v : kernel) v /= sum;
  }

  const double c1 = (prm.k1 * prm.dynamic_range) * (prm.k1 * prm.dynamic_range);
  const double c2 = (prm.k2 * prm.dynamic_range) * (prm.k2 * prm.dynamic_range);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t x0 = 0; x0 + w <= nx; ++x0) {
    for (std::size_t y0 = 0; y0 + w <= ny; ++y0) {
      double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
      for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
          const double k = kernel[i * w + j];
          const double va = a[(x0 + i) * ny + y0 + j];
          const double vb = b[(x0 + i) * ny + y0 + j];
          mu_a += k * va;
          mu_b += k * vb;
          aa += k * va * va;
          bb += k * vb * vb;
          ab += k * va * vb;
        }
      }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

template <class T, class U>
double ssim_slice_avg(const VoxelGrid& grid, std::span<const T> truth, std::span<const U> recon,
                      const SsimParams& prm = {}) {
  if (truth.size() != grid.size() || recon.size() != grid.size()) throw InvalidArgument("ssim_slice_avg: shape mismatch");
  std::vector<double> sa(grid.nx * grid.ny), sb(grid.nx * grid.ny);
  double acc = 0.0;
  for (std::size_t iz = 0; iz < grid.nz; ++iz) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        const std::size_t n = grid.flatten(ix, iy, iz);
        sa[ix * grid.ny + iy] = detail::magnitude(truth[n]);
        sb[ix * grid.ny + iy] = detail::magnitude(recon[n]);
      }
    }
    acc += ssim2d(sa, sb, grid.nx, grid.ny, prm);
  }
  return acc / static_cast<double>(grid.nz);
}

template <class A, class B>
double ssim_slice_avg(const A& truth, const B& recon, const SsimParams& prm = {}) {
  if (!(truth.grid == recon.grid)) throw InvalidArgument("ssim_slice_avg: grid mismatch");
  return ssim_slice_avg(truth.grid, std::span(truth.values.data(), truth.values.size()),
                        std::span(recon.values.data(), recon.values.size()), prm);
}

/// Measurements per unknown, M / N.
inline double compression_ratio(const ImagingConfig& cfg) {
  return static_cast<double>(cfg.num_measurements()) / static_cast<double>(cfg.num_voxels());
}

}  // namespace nfmimo
