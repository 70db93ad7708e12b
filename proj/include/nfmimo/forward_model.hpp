#pragma once

// Discrete Born-approximation observation model y = A s + w.
//
//   A[m, n] = p(k_m) exp(-j k_m (d_t + d_r)) / (4 pi d_t d_r)
//
// with d_t, d_r the distances from the center of voxel n to the transmitter and receiver of
// measurement m. `ObservationOperator` applies A and A^H without materializing A; `SystemMatrix`
// is the dense realization for small configurations and cross-checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nfmimo/error.hpp"
#include "nfmimo/geometry.hpp"
#include "nfmimo/rng.hpp"
#include "nfmimo/vector_ops.hpp"

namespace nfmimo {

/// Real-valued volume in canonical voxel order (magnitudes, normalized images).
struct RealVolume {
  VoxelGrid grid;
  std::vector<double> values;

  static RealVolume zeros(const VoxelGrid& g) { return {g, std::vector<double>(g.size(), 0.0)}; }
};

/// Complex reflectivity s in canonical voxel order.
struct ReflectivityVolume {
  VoxelGrid grid;
  std::vector<cplx> values;

  static ReflectivityVolume zeros(const VoxelGrid& g) { return {g, std::vector<cplx>(g.size())}; }

  RealVolume magnitude() const {
    RealVolume out{grid, std::vector<double>(values.size())};
    std::transform(values.begin(), values.end(), out.values.begin(), [](const cplx& v) { return std::abs(v); });
    return out;
  }
};

/// Measurements y in canonical measurement order.
struct MeasurementVector {
  std::vector<cplx> values;
};

/// One entry of A for wavenumber k, pulse weight p and distances d_t, d_r.
inline cplx propagation_term(double k, cplx pulse, double d_t, double d_r) {
  if (!(d_t > 0.0) || !(d_r > 0.0)) throw DegenerateGeometry("voxel coincides with an antenna (zero distance)");
  return pulse * std::polar(1.0 / (4.0 * std::numbers::pi * d_t * d_r), -k * (d_t + d_r));
}

inline cplx matrix_entry(const ImagingConfig& cfg, std::size_t m, std::size_t n) {
  const MeasurementIndex mi = cfg.unflatten_measurement(m);
  const Point3 c = voxel_center(cfg.grid, n);
  return propagation_term(cfg.freqs.wavenumber(mi.freq), cfg.pulse(mi.freq), distance(cfg.array.tx[mi.tx], c),
                          distance(cfg.array.rx[mi.rx], c));
}

inline constexpr std::size_t default_dense_budget_bytes = std::size_t{4} << 30;

inline std::size_t dense_matrix_bytes(const ImagingConfig& cfg) {
  return cfg.num_measurements() * cfg.num_voxels() * sizeof(cplx);
}

/// Dense row-major M x N realization of A.
class SystemMatrix {
 public:
  SystemMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  cplx& operator()(std::size_t m, std::size_t n) { return entries_[m * cols_ + n]; }
  const cplx& operator()(std::size_t m, std::size_t n) const { return entries_[m * cols_ + n]; }

  std::span<const cplx> row(std::size_t m) const { return {entries_.data() + m * cols_, cols_}; }

  std::vector<cplx> multiply(std::span<const cplx> s) const {
    if (s.size() != cols_) throw InvalidArgument("SystemMatrix::multiply: length mismatch");
    std::vector<cplx> y(rows_);
    for (std::size_t m = 0; m < rows_; ++m) {
      cplx acc{};
      const cplx* r = entries_.data() + m * cols_;
      for (std::size_t n = 0; n < cols_; ++n) acc += r[n] * s[n];
      y[m] = acc;
    }
    return y;
  }

  std::vector<cplx> multiply_adjoint(std::span<const cplx> y) const {
    if (y.size() != rows_) throw InvalidArgument("SystemMatrix::multiply_adjoint: length mismatch");
    std::vector<cplx> s(cols_);
    for (std::size_t m = 0; m < rows_; ++m) {
      const cplx* r = entries_.data() + m * cols_;
      for (std::size_t n = 0; n < cols_; ++n) s[n] += std::conj(r[n]) * y[m];
    }
    return s;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<cplx> entries_;
};

/// Materializes A entry by entry. Throws CapacityError when the matrix would exceed `budget_bytes`.
inline SystemMatrix build_matrix(const ImagingConfig& cfg, std::size_t budget_bytes = default_dense_budget_bytes) {
  cfg.validate();
  const std::size_t bytes = dense_matrix_bytes(cfg);
  if (bytes > budget_bytes)
    throw CapacityError("dense system matrix needs " + std::to_string(bytes) + " bytes, budget is " +
                        std::to_string(budget_bytes) + "; use the matrix-free ObservationOperator instead");
  const std::size_t rows = cfg.num_measurements();
  const std::size_t cols = cfg.num_voxels();
  SystemMatrix a(rows, cols);
  std::vector<Point3> centers(cols);
  for (std::size_t n = 0; n < cols; ++n) centers[n] = voxel_center(cfg.grid, n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t mm = 0; mm < static_cast<std::ptrdiff_t>(rows); ++mm) {
    const auto m = static_cast<std::size_t>(mm);
    const MeasurementIndex mi = cfg.unflatten_measurement(m);
    const double k = cfg.freqs.wavenumber(mi.freq);
    const cplx p = cfg.pulse(mi.freq);
    for (std::size_t n = 0; n < cols; ++n)
      a(m, n) = propagation_term(k, p, distance(cfg.array.tx[mi.tx], centers[n]), distance(cfg.array.rx[mi.rx], centers[n]));
  }
  return a;
}

struct OperatorOptions {
  /// Include the 1/(4 pi d_t d_r) spreading loss. Off gives the pure-phase kernel of backprojection.
  bool amplitude_weighting = true;
  /// Include p(k). Off treats p(k) as 1.
  bool apply_pulse = true;
  /// Per (Tx/Rx pair, voxel) phasors are precomputed when they fit in this many bytes.
  std::size_t phasor_cache_bytes = std::size_t{1} << 30;
};

/// Matrix-free A and A^H.
///
/// For a fixed Tx/Rx pair and voxel the frequency dependence is a geometric sequence
/// exp(-j k_0 d) * exp(-j dk d)^i because the sweep is uniform, so only two phasors are needed per
/// (pair, voxel). Forward products are parallel over pairs (each owns its N_f outputs); adjoint
/// products are parallel over voxel blocks. Every output element is accumulated by one thread in a
/// fixed order, so results do not depend on the thread count.
class ObservationOperator {
 public:
  explicit ObservationOperator(ImagingConfig cfg, OperatorOptions opts = {})
      : cfg_(std::move(cfg)), opts_(opts) {
    cfg_.validate();
    n_tx_ = cfg_.array.num_tx();
    n_rx_ = cfg_.array.num_rx();
    n_pairs_ = n_tx_ * n_rx_;
    n_freq_ = cfg_.freqs.n_steps;
    n_vox_ = cfg_.num_voxels();
    k0_ = cfg_.freqs.wavenumber(0);
    dk_ = 2.0 * std::numbers::pi * cfg_.freqs.step_hz() / speed_of_light;

    pulse_.resize(n_freq_);
    for (std::size_t f = 0; f < n_freq_; ++f) pulse_[f] = opts_.apply_pulse ? cfg_.pulse(f) : cplx(1.0, 0.0);

    tx_dist_.resize(n_tx_ * n_vox_);
    rx_dist_.resize(n_rx_ * n_vox_);
    for (std::size_t n = 0; n < n_vox_; ++n) {
      const Point3 c = voxel_center(cfg_.grid, n);
      for (std::size_t t = 0; t < n_tx_; ++t) tx_dist_[t * n_vox_ + n] = distance(cfg_.array.tx[t], c);
      for (std::size_t r = 0; r < n_rx_; ++r) rx_dist_[r * n_vox_ + n] = distance(cfg_.array.rx[r], c);
    }
    const auto positive = [](double d) { return d > 0.0; };
    if (!std::all_of(tx_dist_.begin(), tx_dist_.end(), positive) ||
        !std::all_of(rx_dist_.begin(), rx_dist_.end(), positive))
      throw DegenerateGeometry("a voxel center coincides with an antenna position");

    const std::size_t cache_bytes = 4 * n_pairs_ * n_vox_ * sizeof(double);
    if (cache_bytes <= opts_.phasor_cache_bytes) {
      cache_.resize(4 * n_pairs_ * n_vox_);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n_pairs_); ++p) {
        double* base = cache_.data() + static_cast<std::size_t>(p) * 4 * n_vox_;
        compute_phasors(static_cast<std::size_t>(p), 0, n_vox_, base, base + n_vox_, base + 2 * n_vox_,
                        base + 3 * n_vox_);
      }
    }
  }

  const ImagingConfig& config() const noexcept { return cfg_; }
  const OperatorOptions& options() const noexcept { return opts_; }
  std::size_t rows() const noexcept { return n_pairs_ * n_freq_; }
  std::size_t cols() const noexcept { return n_vox_; }
  bool phasors_cached() const noexcept { return !cache_.empty(); }

  std::vector<cplx> forward(std::span<const cplx> s) const {
    std::vector<cplx> y(rows());
    forward(s, y);
    return y;
  }

  void forward(std::span<const cplx> s, std::span<cplx> y) const {
    if (s.size() != cols()) throw InvalidArgument("forward: volume length does not match the voxel grid");
    if (y.size() != rows()) throw InvalidArgument("forward: output length does not match the measurement count");
#pragma omp parallel
    {
      Scratch sc;
      std::vector<double> acc(2 * n_freq_ * kLanes);
#pragma omp for schedule(static)
      for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(n_pairs_); ++pp) {
        const auto p = static_cast<std::size_t>(pp);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t n0 = 0; n0 < n_vox_; n0 += kChunk) {
          const std::size_t len = std::min(kChunk, n_vox_ - n0);
          const Phasors ph = phasors(p, n0, len, sc);
          double* zr = sc.zr.data();
          double* zi = sc.zi.data();
          for (std::size_t i = 0; i < len; ++i) {
            const double vr = s[n0 + i].real(), vi = s[n0 + i].imag();
            zr[i] = ph.base_re[i] * vr - ph.base_im[i] * vi;
            zi[i] = ph.base_re[i] * vi + ph.base_im[i] * vr;
          }
          for (std::size_t f = 0; f < n_freq_; ++f) {
            double* ar = acc.data() + 2 * f * kLanes;
            double* ai = ar + kLanes;
            std::size_t i = 0;
            for (; i + kLanes <= len; i += kLanes) {
              for (std::size_t l = 0; l < kLanes; ++l) {
                ar[l] += zr[i + l];
                ai[l] += zi[i + l];
              }
            }
            for (std::size_t l = 0; i < len; ++i, ++l) {
              ar[l] += zr[i];
              ai[l] += zi[i];
            }
            if (f + 1 == n_freq_) break;
            for (std::size_t j = 0; j < len; ++j) {
              const double r = zr[j] * ph.step_re[j] - zi[j] * ph.step_im[j];
              const double im = zr[j] * ph.step_im[j] + zi[j] * ph.step_re[j];
              zr[j] = r;
              zi[j] = im;
            }
          }
        }
        for (std::size_t f = 0; f < n_freq_; ++f) {
          const double* ar = acc.data() + 2 * f * kLanes;
          const double* ai = ar + kLanes;
          double re = 0.0, im = 0.0;
          for (std::size_t l = 0; l < kLanes; ++l) {
            re += ar[l];
            im += ai[l];
          }
          y[p * n_freq_ + f] = pulse_[f] * cplx(re, im);
        }
      }
    }
  }

  std::vector<cplx> adjoint(std::span<const cplx> y) const {
    std::vector<cplx> s(cols());
    adjoint(y, s);
    return s;
  }

  void adjoint(std::span<const cplx> y, std::span<cplx> s) const {
    if (y.size() != rows()) throw InvalidArgument("adjoint: measurement length does not match the config");
    if (s.size() != cols()) throw InvalidArgument("adjoint: output length does not match the voxel grid");
    // Coefficients of the per-pair polynomial in conj(step): c_f = conj(p_f) y_{p,f}.
    std::vector<cplx> coeff(rows());
    for (std::size_t p = 0; p < n_pairs_; ++p)
      for (std::size_t f = 0; f < n_freq_; ++f) coeff[p * n_freq_ + f] = std::conj(pulse_[f]) * y[p * n_freq_ + f];

    const std::size_t n_chunks = (n_vox_ + kChunk - 1) / kChunk;
#pragma omp parallel
    {
      Scratch sc;
      std::vector<double> out_re(kChunk), out_im(kChunk);
#pragma omp for schedule(static)
      for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(n_chunks); ++cc) {
        const std::size_t n0 = static_cast<std::size_t>(cc) * kChunk;
        const std::size_t len = std::min(kChunk, n_vox_ - n0);
        std::fill(out_re.begin(), out_re.end(), 0.0);
        std::fill(out_im.begin(), out_im.end(), 0.0);
        double* hr = sc.zr.data();
        double* hi = sc.zi.data();
        for (std::size_t p = 0; p < n_pairs_; ++p) {
          const cplx* c = coeff.data() + p * n_freq_;
          bool any = false;
          for (std::size_t f = 0; f < n_freq_; ++f) any = any || c[f] != cplx{};
          if (!any) continue;
          const Phasors ph = phasors(p, n0, len, sc);
          // Horner in w = conj(step): h = sum_f c_f w^f
          const double cr_last = c[n_freq_ - 1].real(), ci_last = c[n_freq_ - 1].imag();
          for (std::size_t i = 0; i < len; ++i) {
            hr[i] = cr_last;
            hi[i] = ci_last;
          }
          for (std::size_t f = n_freq_ - 1; f-- > 0;) {
            const double cr = c[f].real(), ci = c[f].imag();
            for (std::size_t i = 0; i < len; ++i) {
              const double wr = ph.step_re[i], wi = ph.step_im[i];
              const double r = hr[i] * wr + hi[i] * wi + cr;
              const double im = hi[i] * wr - hr[i] * wi + ci;
              hr[i] = r;
              hi[i] = im;
            }
          }
          for (std::size_t i = 0; i < len; ++i) {
            const double br = ph.base_re[i], bi = ph.base_im[i];
            out_re[i] += br * hr[i] + bi * hi[i];
            out_im[i] += br * hi[i] - bi * hr[i];
          }
        }
        for (std::size_t i = 0; i < len; ++i) s[n0 + i] = cplx(out_re[i], out_im[i]);
      }
    }
  }

  /// Column n of A evaluated directly from the kernel (independent of the product paths).
  std::vector<cplx> column(std::size_t n) const {
    if (n >= n_vox_) throw InvalidArgument("column: voxel index out of range");
    std::vector<cplx> col(rows());
    for (std::size_t t = 0; t < n_tx_; ++t) {
      for (std::size_t r = 0; r < n_rx_; ++r) {
        const double dt = tx_dist_[t * n_vox_ + n];
        const double dr = rx_dist_[r * n_vox_ + n];
        const double amp = opts_.amplitude_weighting ? 1.0 / (4.0 * std::numbers::pi * dt * dr) : 1.0;
        for (std::size_t f = 0; f < n_freq_; ++f) {
          const double k = cfg_.freqs.wavenumber(f);
          col[cfg_.measurement_index(t, r, f)] = pulse_[f] * std::polar(amp, -k * (dt + dr));
        }
      }
    }
    return col;
  }

 private:
  static constexpr std::size_t kChunk = 512;
  static constexpr std::size_t kLanes = 8;

  struct Scratch {
    std::vector<double> base_re = std::vector<double>(kChunk), base_im = std::vector<double>(kChunk);
    std::vector<double> step_re = std::vector<double>(kChunk), step_im = std::vector<double>(kChunk);
    std::vector<double> zr = std::vector<double>(kChunk), zi = std::vector<double>(kChunk);
  };

  struct Phasors {
    const double* base_re;
    const double* base_im;
    const double* step_re;
    const double* step_im;
  };

  void compute_phasors(std::size_t p, std::size_t n0, std::size_t len, double* br, double* bi, double* sr,
                       double* si) const {
    const std::size_t t = p / n_rx_;
    const std::size_t r = p % n_rx_;
    const double* dt = tx_dist_.data() + t * n_vox_ + n0;
    const double* dr = rx_dist_.data() + r * n_vox_ + n0;
    const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    for (std::size_t i = 0; i < len; ++i) {
      const double d = dt[i] + dr[i];
      const double amp = opts_.amplitude_weighting ? inv4pi / (dt[i] * dr[i]) : 1.0;
      const double a0 = -k0_ * d;
      const double a1 = -dk_ * d;
      br[i] = amp * std::cos(a0);
      bi[i] = amp * std::sin(a0);
      sr[i] = std::cos(a1);
      si[i] = std::sin(a1);
    }
  }

  Phasors phasors(std::size_t p, std::size_t n0, std::size_t len, Scratch& sc) const {
    if (!cache_.empty()) {
      const double* base = cache_.data() + p * 4 * n_vox_ + n0;
      return {base, base + n_vox_, base + 2 * n_vox_, base + 3 * n_vox_};
    }
    compute_phasors(p, n0, len, sc.base_re.data(), sc.base_im.data(), sc.step_re.data(), sc.step_im.data());
    return {sc.base_re.data(), sc.base_im.data(), sc.step_re.data(), sc.step_im.data()};
  }

  ImagingConfig cfg_;
  OperatorOptions opts_;
  std::size_t n_tx_ = 0, n_rx_ = 0, n_pairs_ = 0, n_freq_ = 0, n_vox_ = 0;
  double k0_ = 0.0, dk_ = 0.0;
  std::vector<cplx> pulse_;
  std::vector<double> tx_dist_;  // [t * N + n]
  std::vector<double> rx_dist_;  // [r * N + n]
  std::vector<double> cache_;    // per pair: base_re, base_im, step_re, step_im, each of length N
};

namespace detail {
inline OperatorOptions uncached() {
  OperatorOptions o;
  o.phasor_cache_bytes = 0;
  return o;
}
}  // namespace detail

inline MeasurementVector apply_forward(const ImagingConfig& cfg, const ReflectivityVolume& s) {
  if (!(s.grid == cfg.grid)) throw InvalidArgument("apply_forward: volume grid does not match the config");
  return {ObservationOperator(cfg, detail::uncached()).forward(s.values)};
}

inline ReflectivityVolume apply_adjoint(const ImagingConfig& cfg, const MeasurementVector& y) {
  return {cfg.grid, ObservationOperator(cfg, detail::uncached()).adjoint(y.values)};
}

// --- noise ---------------------------------------------------------------------------------

/// Measurement SNR in dB plus the seed of the noise stream. snr_db = +inf disables noise.
struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  bool enabled() const noexcept { return !(std::isinf(snr_db) && snr_db > 0.0); }
};

/// sigma_w such that 10 log10(||As||^2 / (M sigma_w^2)) = snr_db.
inline double noise_sigma_from_snr(double signal_energy, std::size_t num_measurements, double snr_db) {
  if (std::isnan(snr_db) || (std::isinf(snr_db) && snr_db < 0.0)) throw InvalidArgument("SNR must be finite or +inf");
  if (!(signal_energy > 0.0)) throw UndefinedQuantity("SNR is undefined for an all-zero noiseless signal");
  if (num_measurements == 0) throw InvalidArgument("no measurements");
  return std::sqrt(signal_energy / (static_cast<double>(num_measurements) * std::pow(10.0, snr_db / 10.0)));
}

inline double noise_sigma_from_snr(const ImagingConfig& cfg, const ReflectivityVolume& s, double snr_db) {
  return noise_sigma_from_snr(squared_norm(apply_forward(cfg, s).values), cfg.num_measurements(), snr_db);
}

/// w_m = sigma (g1 + j g2) / sqrt(2), g1, g2 i.i.d. standard normal; E|w_m|^2 = sigma^2.
inline std::vector<cplx> complex_gaussian_noise(std::size_t count, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  const double scale = sigma / std::numbers::sqrt2;
  std::vector<cplx> w(count);
  for (cplx& v : w) {
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    v = {scale * g1, scale * g2};
  }
  return w;
}

/// Adds noise to clean measurements y = As, using ||y||^2 as the signal energy.
inline MeasurementVector add_noise(const MeasurementVector& clean, const NoiseSpec& spec) {
  if (!spec.enabled()) return clean;
  const double sigma = noise_sigma_from_snr(squared_norm(clean.values), clean.values.size(), spec.snr_db);
  MeasurementVector out = clean;
  const std::vector<cplx> w = complex_gaussian_noise(out.values.size(), sigma, spec.seed);
  for (std::size_t m = 0; m < w.size(); ++m) out.values[m] += w[m];
  return out;
}

/// Adds noise to y with sigma calibrated against ||A s||^2.
inline MeasurementVector add_noise(const MeasurementVector& y, const NoiseSpec& spec, const ReflectivityVolume& s,
                                   const ImagingConfig& cfg) {
  if (y.values.size() != cfg.num_measurements()) throw InvalidArgument("add_noise: measurement length mismatch");
  if (!spec.enabled()) return y;
  const double sigma = noise_sigma_from_snr(cfg, s, spec.snr_db);
  MeasurementVector out = y;
  const std::vector<cplx> w = complex_gaussian_noise(out.values.size(), sigma, spec.seed);
  for (std::size_t m = 0; m < w.size(); ++m) out.values[m] += w[m];
  return out;
}

}  // namespace nfmimo
