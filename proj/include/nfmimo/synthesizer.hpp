#pragma once

// Randomized extended-target scenes and deterministic test scenes.
//
// Extended target (per scene seed):
//   1. target center ~ U(x, y in [-0.05, 0.05] m; z in [0.41, 0.59] m), snapped to the nearest voxel
//   2. 5 virtual centers ~ center + N(0, 2^2) voxels per axis, rounded and clipped to the grid
//   3. 3 points per virtual center ~ virtual center + N(0, 1.5^2) voxels, rounded and clipped
//      (15 unit impulses; coincident draws accumulate)
//   4. separable Gaussian blur, sigma 1.3 voxels, radius ceil(4 sigma), replicate boundary
//   5. v <- v / max(v), then the shifted sigmoid
//        out = (g(v) - g(0)) / (g(1) - g(0)),  g(t) = 1 / (1 + exp(-gain (t - 0.5)))
//      which maps 0 -> 0 and the peak -> 1.
// Random phase, when enabled, multiplies every voxel by exp(j phi), phi ~ U[-pi, pi], drawn from
// a separate stream so magnitudes are identical with and without it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "nfmimo/config_io.hpp"
#include "nfmimo/error.hpp"
#include "nfmimo/forward_model.hpp"
#include "nfmimo/geometry.hpp"
#include "nfmimo/rng.hpp"
#include "nfmimo/tensorio.hpp"

namespace nfmimo {

struct SceneSpec {
  std::uint64_t seed = 0;
  double center_x_min = -0.05, center_x_max = 0.05;
  double center_y_min = -0.05, center_y_max = 0.05;
  double center_z_min = 0.41, center_z_max = 0.59;
  std::size_t n_virtual_centers = 5;
  std::size_t points_per_center = 3;
  double virtual_center_std = 2.0;  // voxels
  double point_std = 1.5;           // voxels
  double filter_std = 1.3;          // voxels
  double sigmoid_gain = 10.0;
  bool random_phase = false;

  void validate(const VoxelGrid& grid) const {
    if (!(virtual_center_std > 0.0) || !(point_std > 0.0) || !(filter_std > 0.0))
      throw InvalidArgument("scene standard deviations must be positive");
    if (!(sigmoid_gain > 0.0)) throw InvalidArgument("sigmoid gain must be positive");
    if (n_virtual_centers == 0 || points_per_center == 0) throw InvalidArgument("scene needs at least one point");
    const auto inside = [](double lo, double hi, double c, double pitch, std::size_t n) {
      const double half = 0.5 * pitch * static_cast<double>(n);
      return lo <= hi && lo >= c - half && hi <= c + half;
    };
    if (!inside(center_x_min, center_x_max, grid.center.x, grid.dx, grid.nx) ||
        !inside(center_y_min, center_y_max, grid.center.y, grid.dy, grid.ny) ||
        !inside(center_z_min, center_z_max, grid.center.z, grid.dz, grid.nz))
      throw InvalidArgument("scene center ranges must lie within the voxel grid");
  }

  json to_json() const {
    return {{"seed", seed},
            {"center_range_m",
             {{center_x_min, center_x_max}, {center_y_min, center_y_max}, {center_z_min, center_z_max}}},
            {"n_virtual_centers", n_virtual_centers},
            {"points_per_center", points_per_center},
            {"virtual_center_std_vox", virtual_center_std},
            {"point_std_vox", point_std},
            {"filter_std_vox", filter_std},
            {"amplitude_map", {{"type", "shifted_sigmoid"}, {"gain", sigmoid_gain}}},
            {"random_phase", random_phase}};
  }
};

struct SceneRecord {
  ReflectivityVolume truth;
  std::uint64_t seed = 0;
  json spec = json::object();
  /// Voxels that received a unit impulse before filtering (extended targets) or a point target.
  std::vector<VoxelIndex> impulse_sites;
};

namespace detail {

inline std::size_t snap_axis(double coord, double origin, double pitch, std::size_t count) {
  const double first = origin - 0.5 * static_cast<double>(count - 1) * pitch;
  const double idx = std::round((coord - first) / pitch);
  return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(count - 1)));
}

inline std::size_t clip_index(double idx, std::size_t count) {
  return static_cast<std::size_t>(std::clamp(std::round(idx), 0.0, static_cast<double>(count - 1)));
}

/// Normalized 1D Gaussian taps, radius ceil(4 sigma).
inline std::vector<double> gaussian_taps(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
  return taps;
}

}  // namespace detail

/// Separable Gaussian blur of a real volume with replicate (edge-clamped) boundary.
inline std::vector<double> gaussian_blur3d(const VoxelGrid& grid, std::span<const double> in, double sigma) {
  if (in.size() != grid.size()) throw InvalidArgument("gaussian_blur3d: volume length does not match the grid");
  const std::vector<double> taps = detail::gaussian_taps(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  std::vector<double> cur(in.begin(), in.end()), next(in.size());
  const std::size_t counts[3] = {grid.nx, grid.ny, grid.nz};
  const std::size_t strides[3] = {grid.ny * grid.nz, grid.nz, 1};
  for (int a = 0; a < 3; ++a) {
    const auto count = static_cast<std::ptrdiff_t>(counts[a]);
    const std::size_t stride = strides[a];
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const auto pos = static_cast<std::ptrdiff_t>((n / stride) % counts[a]);
      const std::size_t line_start = n - static_cast<std::size_t>(pos) * stride;
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::ptrdiff_t q = std::clamp<std::ptrdiff_t>(pos + k, 0, count - 1);
        acc += taps[static_cast<std::size_t>(k + radius)] * cur[line_start + static_cast<std::size_t>(q) * stride];
      }
      next[n] = acc;
    }
    std::swap(cur, next);
  }
  return cur;
}

/// Monotone amplitude map: 0 -> 0, 1 -> 1, sigmoid-shaped in between. Input must be in [0, 1].
inline double shifted_sigmoid(double v, double gain) {
  const auto g = [gain](double t) { return 1.0 / (1.0 + std::exp(-gain * (t - 0.5))); };
  const double lo = g(0.0);
  const double hi = g(1.0);
  return std::clamp((g(v) - lo) / (hi - lo), 0.0, 1.0);
}

/// Multiplies every voxel by exp(j phi), phi ~ U[-pi, pi] from the given seed.
inline void add_random_phase(ReflectivityVolume& vol, std::uint64_t seed) {
  Rng rng(seed);
  for (cplx& v : vol.values) v = std::abs(v) * std::polar(1.0, rng.uniform(-std::numbers::pi, std::numbers::pi));
}

inline constexpr std::uint64_t kGeometryStream = 0;
inline constexpr std::uint64_t kPhaseStream = 1;

inline SceneRecord generate_scene(const VoxelGrid& grid, const SceneSpec& spec) {
  grid.validate();
  spec.validate(grid);
  Rng rng(substream_seed(spec.seed, kGeometryStream));

  const double cx = rng.uniform(spec.center_x_min, spec.center_x_max);
  const double cy = rng.uniform(spec.center_y_min, spec.center_y_max);
  const double cz = rng.uniform(spec.center_z_min, spec.center_z_max);
  const VoxelIndex center{detail::snap_axis(cx, grid.center.x, grid.dx, grid.nx),
                          detail::snap_axis(cy, grid.center.y, grid.dy, grid.ny),
                          detail::snap_axis(cz, grid.center.z, grid.dz, grid.nz)};

  const auto jitter = [&](const VoxelIndex& around, double sd) {
    const double ix = static_cast<double>(around.ix) + rng.normal(0.0, sd);
    const double iy = static_cast<double>(around.iy) + rng.normal(0.0, sd);
    const double iz = static_cast<double>(around.iz) + rng.normal(0.0, sd);
    return VoxelIndex{detail::clip_index(ix, grid.nx), detail::clip_index(iy, grid.ny), detail::clip_index(iz, grid.nz)};
  };

  SceneRecord rec;
  rec.seed = spec.seed;
  rec.spec = spec.to_json();
  std::vector<double> impulses(grid.size(), 0.0);
  for (std::size_t v = 0; v < spec.n_virtual_centers; ++v) {
    const VoxelIndex vc = jitter(center, spec.virtual_center_std);
    for (std::size_t p = 0; p < spec.points_per_center; ++p) {
      const VoxelIndex site = jitter(vc, spec.point_std);
      impulses[grid.flatten(site)] += 1.0;
      rec.impulse_sites.push_back(site);
    }
  }

  std::vector<double> blurred = gaussian_blur3d(grid, impulses, spec.filter_std);
  const double peak = *std::max_element(blurred.begin(), blurred.end());
  rec.truth = ReflectivityVolume::zeros(grid);
  for (std::size_t n = 0; n < grid.size(); ++n)
    rec.truth.values[n] = shifted_sigmoid(std::max(0.0, blurred[n] / peak), spec.sigmoid_gain);
  if (spec.random_phase) add_random_phase(rec.truth, substream_seed(spec.seed, kPhaseStream));
  return rec;
}

/// Seed of scene i in a dataset generated from base_seed.
constexpr std::uint64_t scene_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return substream_seed(base_seed, index);
}

/// Scenes 0..n-1 of a dataset, generated in parallel; content does not depend on `threads`.
inline std::vector<SceneRecord> generate_scenes(const VoxelGrid& grid, std::size_t n_scenes, std::uint64_t base_seed,
                                                bool random_phase, int threads = 0) {
  if (n_scenes < 1) throw InvalidArgument("need at least one scene");
  std::vector<SceneRecord> out(n_scenes);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_scenes); ++i) {
    SceneSpec spec;
    spec.seed = scene_seed(base_seed, static_cast<std::uint64_t>(i));
    spec.random_phase = random_phase;
    out[static_cast<std::size_t>(i)] = generate_scene(grid, spec);
  }
  return out;
}

inline std::vector<std::uint64_t> volume_shape(const VoxelGrid& g) { return {g.nx, g.ny, g.nz}; }

inline Tensor scene_tensor(const SceneRecord& rec, DType dtype = DType::c128) {
  json meta = {{"kind", "ground_truth"}, {"seed", rec.seed}, {"spec", rec.spec}, {"grid", grid_to_json(rec.truth.grid)}};
  return Tensor::from_complex(volume_shape(rec.truth.grid), rec.truth.values, dtype, std::move(meta));
}

struct ManifestEntry {
  std::string path;
  std::uint64_t seed = 0;
  bool random_phase = false;
};

struct DatasetManifest {
  VoxelGrid grid;
  std::uint64_t base_seed = 0;
  std::vector<ManifestEntry> scenes;

  json to_json() const {
    json j;
    j["base_seed"] = base_seed;
    j["grid"] = grid_to_json(grid);
    j["scenes"] = json::array();
    for (const auto& e : scenes) j["scenes"].push_back({{"path", e.path}, {"seed", e.seed}, {"random_phase", e.random_phase}});
    return j;
  }

  static DatasetManifest from_json(const json& j) {
    DatasetManifest m;
    try {
      m.base_seed = j.at("base_seed").get<std::uint64_t>();
      m.grid = grid_from_json(j.at("grid"));
      for (const json& e : j.at("scenes"))
        m.scenes.push_back({e.at("path").get<std::string>(), e.at("seed").get<std::uint64_t>(),
                            e.at("random_phase").get<bool>()});
    } catch (const json::exception& e) {
      throw FormatError(std::string("manifest: ") + e.what());
    }
    return m;
  }
};

inline std::string scene_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05zu.nft", index);
  return buf;
}

/// Writes scene volumes plus manifest.json into `out_dir`. Paths in the manifest are relative to it.
inline DatasetManifest generate_dataset(const VoxelGrid& grid, std::size_t n_scenes, std::uint64_t base_seed,
                                        bool random_phase, const std::filesystem::path& out_dir, int threads = 0) {
  if (n_scenes < 1) throw InvalidArgument("need at least one scene");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());
  DatasetManifest manifest{grid, base_seed, std::vector<ManifestEntry>(n_scenes)};
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n_scenes); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    SceneSpec spec;
    spec.seed = scene_seed(base_seed, i);
    spec.random_phase = random_phase;
    try {
      const SceneRecord rec = generate_scene(grid, spec);
      write_tensor(out_dir / scene_file_name(i), scene_tensor(rec));
      manifest.scenes[i] = {scene_file_name(i), spec.seed, random_phase};
    } catch (const std::exception& e) {
#pragma omp critical(nfmimo_dataset_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw IoError("dataset generation failed: " + failure);
  write_json_file(out_dir / "manifest.json", manifest.to_json());
  return manifest;
}

// --- deterministic scenes -------------------------------------------------------------------

/// Solid ellipsoid of unit magnitude (voxel centers inside or on the surface).
inline SceneRecord ellipsoid_scene(const VoxelGrid& grid, const Point3& semi_axes, const Point3& center) {
  grid.validate();
  if (!(semi_axes.x > 0.0) || !(semi_axes.y > 0.0) || !(semi_axes.z > 0.0))
    throw InvalidArgument("ellipsoid semi-axes must be positive");
  const auto within = [](double c, double a, double gc, double pitch, std::size_t n) {
    const double half = 0.5 * pitch * static_cast<double>(n);
    return c - a >= gc - half - 1e-12 && c + a <= gc + half + 1e-12;
  };
  if (!within(center.x, semi_axes.x, grid.center.x, grid.dx, grid.nx) ||
      !within(center.y, semi_axes.y, grid.center.y, grid.dy, grid.ny) ||
      !within(center.z, semi_axes.z, grid.center.z, grid.dz, grid.nz))
    throw InvalidArgument("ellipsoid does not fit inside the voxel grid");

  SceneRecord rec;
  rec.truth = ReflectivityVolume::zeros(grid);
  rec.spec = {{"kind", "ellipsoid"},
              {"semi_axes_m", point_to_json(semi_axes)},
              {"center_m", point_to_json(center)}};
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point3 p = voxel_center(grid, n);
    const double u = (p.x - center.x) / semi_axes.x;
    const double v = (p.y - center.y) / semi_axes.y;
    const double w = (p.z - center.z) / semi_axes.z;
    if (u * u + v * v + w * w <= 1.0 + 1e-12) rec.truth.values[n] = 1.0;
  }
  return rec;
}

/// Unit-free impulses at given voxels; coincident voxels sum their amplitudes.
inline SceneRecord impulse_scene(const VoxelGrid& grid, const std::vector<VoxelIndex>& sites,
                                 const std::vector<double>& amplitudes) {
  if (sites.size() != amplitudes.size()) throw InvalidArgument("one amplitude per target is required");
  SceneRecord rec;
  rec.truth = ReflectivityVolume::zeros(grid);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const VoxelIndex& v = sites[i];
    if (v.ix >= grid.nx || v.iy >= grid.ny || v.iz >= grid.nz) throw InvalidArgument("target voxel outside the grid");
    rec.truth.values[grid.flatten(v)] += amplitudes[i];
  }
  rec.impulse_sites = sites;
  return rec;
}

/// Point targets snapped to their nearest voxels. Empty amplitudes means unit amplitude each.
inline SceneRecord point_target_scene(const VoxelGrid& grid, const std::vector<Point3>& positions,
                                      std::vector<double> amplitudes = {}) {
  grid.validate();
  if (amplitudes.empty()) amplitudes.assign(positions.size(), 1.0);
  std::vector<VoxelIndex> sites;
  json pos = json::array();
  for (const Point3& p : positions) {
    const auto inside = [](double c, double gc, double pitch, std::size_t n) {
      return std::abs(c - gc) <= 0.5 * pitch * static_cast<double>(n) + 1e-12;
    };
    if (!inside(p.x, grid.center.x, grid.dx, grid.nx) || !inside(p.y, grid.center.y, grid.dy, grid.ny) ||
        !inside(p.z, grid.center.z, grid.dz, grid.nz))
      throw InvalidArgument("point target lies outside the voxel grid");
    sites.push_back({detail::snap_axis(p.x, grid.center.x, grid.dx, grid.nx),
                     detail::snap_axis(p.y, grid.center.y, grid.dy, grid.ny),
                     detail::snap_axis(p.z, grid.center.z, grid.dz, grid.nz)});
    pos.push_back(point_to_json(p));
  }
  SceneRecord rec = impulse_scene(grid, sites, amplitudes);
  rec.spec = {{"kind", "point_targets"}, {"positions_m", pos}, {"amplitudes", amplitudes}};
  return rec;
}

}  // namespace nfmimo
