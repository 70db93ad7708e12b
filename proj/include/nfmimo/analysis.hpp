#pragma once

// Conditioning-based resolution analysis: condition numbers of the M x k column submatrices of A
// that belong to small point-target constellations.
//
// Constellations are built on voxel indices. A separation below one voxel pitch is degenerate
// (all targets share a voxel); otherwise d is snapped to k = round(d / pitch) voxels along the
// relevant axis; the first target sits at c - floor(k/2) (c = center voxel) and
// the rest follow at steps of k, so the constellation is centered exactly when k is even and
// off-center by half a voxel when k is odd.
//   2 targets, cross-range: along x on the center x-y line of the middle range slice.
//   4 targets, cross-range: corners of a k x k voxel square in the middle range slice.
//   2 or 4 targets, range:  along z on the x = y = center line.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "nfmimo/config_io.hpp"
#include "nfmimo/error.hpp"
#include "nfmimo/forward_model.hpp"
#include "nfmimo/synthesizer.hpp"

namespace nfmimo {

inline constexpr double kappa_cap = 1e18;

enum class Orientation { cross_range, range };

inline std::string to_string(Orientation o) { return o == Orientation::cross_range ? "xy" : "z"; }

struct ConstellationSpec {
  std::size_t n_targets = 2;
  double separation_m = 0.01;
  Orientation orientation = Orientation::cross_range;
};

struct Constellation {
  std::vector<VoxelIndex> voxels;
  std::size_t separation_voxels = 0;
  double snapped_separation_m = 0.0;
  /// Separation below one voxel pitch: all targets share one voxel.
  bool degenerate = false;
};

inline Constellation snap_constellation(const VoxelGrid& grid, const ConstellationSpec& spec) {
  grid.validate();
  if (spec.n_targets != 2 && spec.n_targets != 4) throw InvalidArgument("constellations have 2 or 4 targets");
  if (!(spec.separation_m >= 0.0) || !std::isfinite(spec.separation_m))
    throw InvalidArgument("separation must be finite and non-negative");

  const bool range = spec.orientation == Orientation::range;
  const double pitch = range ? grid.dz : grid.dx;
  const bool degenerate = spec.separation_m < pitch * (1.0 - 1e-12);
  const auto k = degenerate ? std::size_t{0} : static_cast<std::size_t>(std::llround(spec.separation_m / pitch));

  Constellation c;
  c.separation_voxels = k;
  c.snapped_separation_m = static_cast<double>(k) * pitch;
  c.degenerate = degenerate;

  const std::size_t cx = (grid.nx - 1) / 2, cy = (grid.ny - 1) / 2, cz = (grid.nz - 1) / 2;
  const auto offsets = [&](std::size_t center, std::size_t count, std::size_t n) {
    const std::size_t span = k * (n - 1);
    const std::size_t back = span / 2;
    if (back > center || center - back + span >= count)
      throw InvalidArgument("constellation does not fit inside the voxel grid");
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = center - back + i * k;
    return out;
  };

  if (range) {
    for (std::size_t iz : offsets(cz, grid.nz, spec.n_targets)) c.voxels.push_back({cx, cy, iz});
  } else if (spec.n_targets == 2) {
    for (std::size_t ix : offsets(cx, grid.nx, 2)) c.voxels.push_back({ix, cy, cz});
  } else {
    const auto xs = offsets(cx, grid.nx, 2);
    const auto ys = offsets(cy, grid.ny, 2);
    for (std::size_t ix : xs)
      for (std::size_t iy : ys) c.voxels.push_back({ix, iy, cz});
  }
  return c;
}

/// sigma_max / sigma_min of the columns; kappa_cap on rank deficiency.
inline double condition_number(const std::vector<std::vector<cplx>>& columns) {
  if (columns.empty()) throw InvalidArgument("condition_number: no columns");
  const std::size_t rows = columns.front().size();
  Eigen::MatrixXcd sub(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != rows) throw InvalidArgument("condition_number: ragged columns");
    for (std::size_t i = 0; i < rows; ++i) sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
  }
  if (columns.size() > rows) return kappa_cap;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin >= 1e-300)) return kappa_cap;
  return std::min(kappa_cap, smax / smin);
}

inline double submatrix_condition(const ObservationOperator& op, const std::vector<VoxelIndex>& voxels) {
  const VoxelGrid& grid = op.config().grid;
  std::vector<std::size_t> idx;
  for (const VoxelIndex& v : voxels) idx.push_back(grid.flatten(v));
  std::vector<std::size_t> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return kappa_cap;  // duplicate column
  std::vector<std::vector<cplx>> cols;
  for (std::size_t n : idx) cols.push_back(op.column(n));
  return condition_number(cols);
}

inline double submatrix_condition(const ImagingConfig& cfg, const ConstellationSpec& spec) {
  const Constellation c = snap_constellation(cfg.grid, spec);
  if (c.degenerate) return kappa_cap;
  return submatrix_condition(ObservationOperator(cfg, detail::uncached()), c.voxels);
}

struct ConditionRow {
  double separation_m = 0.0;
  double snapped_separation_m = 0.0;
  double kappa = 0.0;
  bool degenerate = false;
};

struct ConditionTable {
  std::string config_hash;
  std::size_t n_targets = 0;
  Orientation orientation = Orientation::cross_range;
  std::vector<ConditionRow> rows;

  std::string to_csv() const {
    std::string out = "separation_cm,snapped_cm,kappa\n";
    char buf[128];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.17g\n", r.separation_m * 100.0, r.snapped_separation_m * 100.0, r.kappa);
      out += buf;
    }
    return out;
  }
};

inline ConditionTable condition_sweep(const ImagingConfig& cfg, std::size_t n_targets,
                                      const std::vector<double>& separations_m, Orientation orientation) {
  if (!std::is_sorted(separations_m.begin(), separations_m.end()))
    throw InvalidArgument("condition_sweep: separations must be ascending");
  ConditionTable table{config_hash(cfg), n_targets, orientation, std::vector<ConditionRow>(separations_m.size())};
  if (separations_m.empty()) return table;
  const ObservationOperator op(cfg, detail::uncached());
  std::vector<std::exception_ptr> errors(separations_m.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(separations_m.size()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      const Constellation c = snap_constellation(cfg.grid, {n_targets, separations_m[i], orientation});
      const double kappa = c.degenerate ? kappa_cap : submatrix_condition(op, c.voxels);
      table.rows[i] = {separations_m[i], c.snapped_separation_m, kappa, c.degenerate};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return table;
}

/// The eight point-target resolution scenes: 4 targets at 2.50/3.75/5.00/6.25 cm in the middle
/// range slice, then 2 targets at 1.250/1.875/2.500/3.125 cm along z.
inline std::vector<SceneRecord> resolution_scenes(const VoxelGrid& grid) {
  std::vector<SceneRecord> out;
  const auto add = [&](std::size_t n, double sep, Orientation o) {
    const Constellation c = snap_constellation(grid, {n, sep, o});
    SceneRecord rec = impulse_scene(grid, c.voxels, std::vector<double>(c.voxels.size(), 1.0));
    rec.spec = {{"kind", "resolution"},
                {"n_targets", n},
                {"separation_m", sep},
                {"snapped_separation_m", c.snapped_separation_m},
                {"orientation", to_string(o)}};
    out.push_back(std::move(rec));
  };
  for (double d : {0.025, 0.0375, 0.05, 0.0625}) add(4, d, Orientation::cross_range);
  for (double d : {0.0125, 0.01875, 0.025, 0.03125}) add(2, d, Orientation::range);
  return out;
}

}  // namespace nfmimo
