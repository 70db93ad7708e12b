#pragma once

// Antenna arrays, frequency sweeps, voxel grids and the canonical index orders.
//
// Measurement index: m = (i_tx * N_rx + i_rx) * N_f + i_f
// Voxel index:       n = (i_x * n_y + i_y) * n_z + i_z
//
// Every file exchanged by the toolkit uses these orders.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "nfmimo/error.hpp"

namespace nfmimo {

inline constexpr double speed_of_light = 299'792'458.0;  // m/s, exact

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Planar MIMO array in the z = 0 plane.
struct AntennaArray {
  std::vector<Point3> tx;
  std::vector<Point3> rx;

  std::size_t num_tx() const noexcept { return tx.size(); }
  std::size_t num_rx() const noexcept { return rx.size(); }
  std::size_t num_pairs() const noexcept { return tx.size() * rx.size(); }

  void validate() const {
    check_list(tx, "tx");
    check_list(rx, "rx");
  }

 private:
  static void check_list(const std::vector<Point3>& list, const char* name) {
    if (list.empty()) throw InvalidArgument(std::string("antenna list '") + name + "' is empty");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].z != 0.0)
        throw InvalidArgument(std::string("antenna '") + name + "' #" + std::to_string(i) + " is not in the z=0 plane");
      for (std::size_t j = 0; j < i; ++j) {
        if (distance(list[i], list[j]) < 1e-12)
          throw InvalidArgument(std::string("duplicate antenna position in '") + name + "' at entries " +
                                std::to_string(j) + " and " + std::to_string(i));
      }
    }
  }
};

/// Mills Cross: transmitters on the horizontal arm (y = 0), receivers on the vertical arm (x = 0),
/// both uniformly spaced over [-width/2, +width/2] including the endpoints.
inline AntennaArray mills_cross(double width_m, std::size_t n_tx, std::size_t n_rx) {
  if (!(width_m > 0.0) || !std::isfinite(width_m)) throw InvalidArgument("mills_cross: width must be positive");
  if (n_tx < 2 || n_rx < 2) throw InvalidArgument("mills_cross: need at least 2 antennas per arm");

  const auto arm = [width_m](std::size_t count, std::size_t i) {
    // Written symmetrically so that positions i and count-1-i are exact negatives.
    const double t = static_cast<double>(2 * i) - static_cast<double>(count - 1);
    return 0.5 * width_m * t / static_cast<double>(count - 1);
  };

  AntennaArray array;
  array.tx.reserve(n_tx);
  array.rx.reserve(n_rx);
  for (std::size_t i = 0; i < n_tx; ++i) array.tx.push_back({arm(n_tx, i), 0.0, 0.0});
  for (std::size_t i = 0; i < n_rx; ++i) array.rx.push_back({0.0, arm(n_rx, i), 0.0});
  return array;
}

/// Uniform frequency sweep, endpoints included. A single step sits at f_min.
struct FrequencyGrid {
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
  std::size_t n_steps = 1;

  void validate() const {
    if (n_steps < 1) throw InvalidArgument("frequency grid needs at least one step");
    if (!(f_min_hz > 0.0) || !std::isfinite(f_max_hz)) throw InvalidArgument("frequencies must be positive and finite");
    if (!(f_min_hz < f_max_hz)) throw InvalidArgument("frequency grid requires f_min < f_max");
  }

  double step_hz() const noexcept {
    return n_steps > 1 ? (f_max_hz - f_min_hz) / static_cast<double>(n_steps - 1) : 0.0;
  }

  double frequency(std::size_t i) const noexcept {
    if (n_steps > 1 && i + 1 == n_steps) return f_max_hz;
    return f_min_hz + static_cast<double>(i) * step_hz();
  }

  double wavenumber(std::size_t i) const noexcept {
    return 2.0 * std::numbers::pi * frequency(i) / speed_of_light;
  }
};

struct VoxelIndex {
  std::size_t ix = 0;
  std::size_t iy = 0;
  std::size_t iz = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

/// Regular voxel grid. Voxel centers sit at center + (i - (n-1)/2) * pitch on each axis.
struct VoxelGrid {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;
  double dx = 1.0;
  double dy = 1.0;
  double dz = 1.0;
  Point3 center{};

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

  std::size_t size() const noexcept { return nx * ny * nz; }

  void validate() const {
    if (nx == 0 || ny == 0 || nz == 0) throw InvalidArgument("voxel grid counts must be positive");
    if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0)) throw InvalidArgument("voxel pitch must be positive");
  }

  std::size_t flatten(std::size_t ix, std::size_t iy, std::size_t iz) const noexcept {
    return (ix * ny + iy) * nz + iz;
  }
  std::size_t flatten(const VoxelIndex& v) const noexcept { return flatten(v.ix, v.iy, v.iz); }

  VoxelIndex unflatten(std::size_t n) const {
    if (n >= size()) throw InvalidArgument("voxel index " + std::to_string(n) + " out of range");
    return {n / (ny * nz), (n / nz) % ny, n % nz};
  }

  double axis_coordinate(std::size_t count, double pitch, double origin, std::size_t i) const noexcept {
    return origin + (static_cast<double>(i) - 0.5 * static_cast<double>(count - 1)) * pitch;
  }
  double x_at(std::size_t ix) const noexcept { return axis_coordinate(nx, dx, center.x, ix); }
  double y_at(std::size_t iy) const noexcept { return axis_coordinate(ny, dy, center.y, iy); }
  double z_at(std::size_t iz) const noexcept { return axis_coordinate(nz, dz, center.z, iz); }

  Point3 center_of(const VoxelIndex& v) const noexcept { return {x_at(v.ix), y_at(v.iy), z_at(v.iz)}; }
};

inline Point3 voxel_center(const VoxelGrid& grid, std::size_t n) { return grid.center_of(grid.unflatten(n)); }

struct MeasurementIndex {
  std::size_t tx = 0;
  std::size_t rx = 0;
  std::size_t freq = 0;

  friend bool operator==(const MeasurementIndex&, const MeasurementIndex&) = default;
};

/// Everything that defines the observation operator.
struct ImagingConfig {
  AntennaArray array;
  FrequencyGrid freqs;
  VoxelGrid grid;
  /// Per-frequency pulse spectrum p(k). Empty means p(k) = 1 at every frequency.
  std::vector<std::complex<double>> pulse_spectrum;

  std::size_t num_measurements() const noexcept { return array.num_pairs() * freqs.n_steps; }
  std::size_t num_voxels() const noexcept { return grid.size(); }

  void validate() const {
    array.validate();
    freqs.validate();
    grid.validate();
    if (!pulse_spectrum.empty() && pulse_spectrum.size() != freqs.n_steps)
      throw InvalidArgument("pulse spectrum length must equal the number of frequency steps");
  }

  std::complex<double> pulse(std::size_t i_f) const noexcept {
    return pulse_spectrum.empty() ? std::complex<double>(1.0, 0.0) : pulse_spectrum[i_f];
  }

  std::size_t measurement_index(std::size_t i_tx, std::size_t i_rx, std::size_t i_f) const noexcept {
    return (i_tx * array.num_rx() + i_rx) * freqs.n_steps + i_f;
  }
  std::size_t measurement_index(const MeasurementIndex& mi) const noexcept {
    return measurement_index(mi.tx, mi.rx, mi.freq);
  }

  MeasurementIndex unflatten_measurement(std::size_t m) const {
    if (m >= num_measurements()) throw InvalidArgument("measurement index " + std::to_string(m) + " out of range");
    const std::size_t nf = freqs.n_steps;
    const std::size_t pair = m / nf;
    return {pair / array.num_rx(), pair % array.num_rx(), m % nf};
  }
};

/// 0.3 m Mills Cross (12 Tx, 13 Rx), 4-16 GHz, 25 x 25 x 49 voxels of 1.25 x 1.25 x 0.625 cm
/// centered 0.5 m in front of the array.
inline ImagingConfig reference_config(std::size_t n_steps = 15) {
  ImagingConfig cfg;
  cfg.array = mills_cross(0.3, 12, 13);
  cfg.freqs = {4e9, 16e9, n_steps};
  cfg.grid = {25, 25, 49, 0.0125, 0.0125, 0.00625, {0.0, 0.0, 0.5}};
  cfg.validate();
  return cfg;
}

}  // namespace nfmimo
