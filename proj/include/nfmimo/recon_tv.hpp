#pragma once

// Total-variation regularized least squares on the complex reflectivity:
//
//   min_s ||y - A s||^2 + lambda * sum_i sqrt(|(Phi s)_i|^2 + eps)
//
// Phi stacks forward differences along x, y and z (Neumann boundary: the last difference along
// each axis is zero), so the sum runs over 3N entries. Solved by half-quadratic majorize-minimize:
// each outer step freezes W_i = 1 / (2 sqrt(|(Phi s)_i|^2 + eps)) and solves
// (A^H A + lambda Phi^H W Phi) s = A^H y by conjugate gradients warm-started at the current
// iterate, which never increases the smoothed objective.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfmimo/error.hpp"
#include "nfmimo/forward_model.hpp"
#include "nfmimo/vector_ops.hpp"

namespace nfmimo {

/// Forward differences along x, y, z; each component has one entry per voxel.
struct GradientField {
  std::vector<cplx> x;
  std::vector<cplx> y;
  std::vector<cplx> z;

  std::size_t size() const noexcept { return x.size() + y.size() + z.size(); }
};

namespace detail {

struct AxisWalk {
  std::size_t count;
  std::size_t stride;
};

inline std::array<AxisWalk, 3> axes(const VoxelGrid& g) { return {{{g.nx, g.ny * g.nz}, {g.ny, g.nz}, {g.nz, 1}}}; }

inline std::size_t axis_position(const VoxelGrid& g, std::size_t n, int axis) {
  switch (axis) {
    case 0: return n / (g.ny * g.nz);
    case 1: return (n / g.nz) % g.ny;
    default: return n % g.nz;
  }
}

}  // namespace detail

inline GradientField grad3d(const VoxelGrid& grid, std::span<const cplx> s) {
  if (s.size() != grid.size()) throw InvalidArgument("grad3d: volume length does not match the grid");
  const std::size_t n_vox = grid.size();
  GradientField g{std::vector<cplx>(n_vox), std::vector<cplx>(n_vox), std::vector<cplx>(n_vox)};
  std::vector<cplx>* comp[3] = {&g.x, &g.y, &g.z};
  const auto ax = detail::axes(grid);
  for (int a = 0; a < 3; ++a) {
    std::vector<cplx>& d = *comp[a];
    const auto [count, stride] = ax[static_cast<std::size_t>(a)];
    for (std::size_t n = 0; n < n_vox; ++n)
      if (detail::axis_position(grid, n, a) + 1 < count) d[n] = s[n + stride] - s[n];
  }
  return g;
}

/// Exact adjoint Phi^H of grad3d (the negative discrete divergence).
inline std::vector<cplx> div3d(const VoxelGrid& grid, const GradientField& u) {
  const std::size_t n_vox = grid.size();
  if (u.x.size() != n_vox || u.y.size() != n_vox || u.z.size() != n_vox)
    throw InvalidArgument("div3d: field length does not match the grid");
  std::vector<cplx> out(n_vox);
  const std::vector<cplx>* comp[3] = {&u.x, &u.y, &u.z};
  const auto ax = detail::axes(grid);
  for (int a = 0; a < 3; ++a) {
    const std::vector<cplx>& d = *comp[a];
    const auto [count, stride] = ax[static_cast<std::size_t>(a)];
    for (std::size_t n = 0; n < n_vox; ++n) {
      const std::size_t i = detail::axis_position(grid, n, a);
      cplx v{};
      if (i + 1 < count) v -= d[n];
      if (i > 0) v += d[n - stride];
      out[n] += v;
    }
  }
  return out;
}

inline double tv_penalty(const GradientField& g, double eps) {
  double acc = 0.0;
  for (const auto* comp : {&g.x, &g.y, &g.z})
    for (const cplx& v : *comp) acc += std::sqrt(std::norm(v) + eps);
  return acc;
}

struct TvParams {
  double lambda = 25.0;
  /// Smoothing constant; unset means 1e-6 * max_i |(Phi s0)_i|^2 with s0 = A^H y.
  std::optional<double> eps;
  std::size_t outer_iters = 20;
  std::size_t cg_iters = 50;
  double cg_tol = 1e-6;
  /// Stop when the relative objective decrease of an outer step falls below this.
  double objective_tol = 1e-6;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("TV lambda must be finite and >= 0");
    if (eps && !(*eps > 0.0)) throw InvalidArgument("TV eps must be > 0");
    if (outer_iters < 1 || cg_iters < 1) throw InvalidArgument("TV iteration counts must be >= 1");
    if (!(cg_tol >= 0.0) || !(objective_tol >= 0.0)) throw InvalidArgument("TV tolerances must be >= 0");
  }
};

struct TvResult {
  ReflectivityVolume volume;
  /// Objective at s0 followed by the objective after each outer step.
  std::vector<double> objective_trace;
  double eps = 0.0;
  std::size_t outer_iterations = 0;
  std::size_t cg_iterations = 0;
};

inline double objective_value(const ObservationOperator& op, std::span<const cplx> y, std::span<const cplx> s,
                              double lambda, double eps) {
  std::vector<cplx> r = op.forward(s);
  if (r.size() != y.size()) throw InvalidArgument("objective_value: measurement length mismatch");
  for (std::size_t m = 0; m < r.size(); ++m) r[m] = y[m] - r[m];
  const double fidelity = squared_norm(r);
  if (lambda == 0.0) return fidelity;
  return fidelity + lambda * tv_penalty(grad3d(op.config().grid, s), eps);
}

inline double objective_value(const ImagingConfig& cfg, const MeasurementVector& y, const ReflectivityVolume& s,
                              double lambda, double eps) {
  if (!(s.grid == cfg.grid)) throw InvalidArgument("objective_value: volume grid does not match the config");
  return objective_value(ObservationOperator(cfg, detail::uncached()), y.values, s.values, lambda, eps);
}

namespace detail {

struct CgOutcome {
  std::size_t iterations = 0;
  bool finite = true;
};

/// Conjugate gradients on a Hermitian positive (semi)definite operator, warm-started at x.
template <class ApplyH>
CgOutcome conjugate_gradient(ApplyH&& apply_h, std::span<const cplx> b, std::span<cplx> x, std::size_t max_iters,
                             double rel_tol) {
  const std::size_t n = b.size();
  std::vector<cplx> hx(n), r(n), p(n), hp(n);
  apply_h(std::span<const cplx>(x.data(), n), std::span<cplx>(hx));
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - hx[i];
  p = r;
  double rs = squared_norm(r);
  const double threshold = rel_tol * norm2(b);
  CgOutcome out;
  double max_curvature = 0.0;
  if (!std::isfinite(rs)) {
    out.finite = false;
    return out;
  }
  for (std::size_t it = 0; it < max_iters; ++it) {
    if (rs == 0.0 || std::sqrt(rs) <= threshold) break;
    apply_h(std::span<const cplx>(p), std::span<cplx>(hp));
    const double php = vdot(p, hp).real();
    if (!std::isfinite(php)) {
      out.finite = false;
      return out;
    }
    if (php <= 0.0) break;  // direction in the null space: x is already optimal along it
    // round-off drift into the (near) null space of a singular H
    const double curvature = php / squared_norm(p);
    max_curvature = std::max(max_curvature, curvature);
    if (curvature < 1e-10 * max_curvature) break;
    const double alpha = rs / php;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * hp[i];
    }
    const double rs_new = squared_norm(r);
    ++out.iterations;
    if (!std::isfinite(rs_new)) {
      out.finite = false;
      return out;
    }
    const double beta = rs_new / rs;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rs = rs_new;
  }
  return out;
}

}  // namespace detail

inline TvResult tv_solve(const ObservationOperator& op, const MeasurementVector& y, const TvParams& params) {
  params.validate();
  if (y.values.size() != op.rows()) throw InvalidArgument("tv_solve: measurement length does not match the config");
  const VoxelGrid& grid = op.config().grid;
  const std::size_t n_vox = op.cols();

  const std::vector<cplx> rhs = op.adjoint(y.values);
  std::vector<cplx> s = rhs;

  double eps = 0.0;
  if (params.eps) {
    eps = *params.eps;
  } else {
    const GradientField g0 = grad3d(grid, s);
    double peak = 0.0;
    for (const auto* comp : {&g0.x, &g0.y, &g0.z})
      for (const cplx& v : *comp) peak = std::max(peak, std::norm(v));
    eps = peak > 0.0 ? 1e-6 * peak : 1.0;
  }

  TvResult result;
  result.eps = eps;
  result.objective_trace.push_back(objective_value(op, y.values, s, params.lambda, eps));
  if (!std::isfinite(result.objective_trace.back()))
    throw NumericalFailure("TV objective is not finite at the initial iterate", result.objective_trace);

  std::vector<double> wx(n_vox), wy(n_vox), wz(n_vox);
  std::vector<cplx> as(op.rows());
  for (std::size_t outer = 0; outer < params.outer_iters; ++outer) {
    if (params.lambda > 0.0) {
      const GradientField g = grad3d(grid, s);
      for (std::size_t i = 0; i < n_vox; ++i) {
        wx[i] = 0.5 / std::sqrt(std::norm(g.x[i]) + eps);
        wy[i] = 0.5 / std::sqrt(std::norm(g.y[i]) + eps);
        wz[i] = 0.5 / std::sqrt(std::norm(g.z[i]) + eps);
      }
    }
    auto apply_h = [&](std::span<const cplx> v, std::span<cplx> out) {
      op.forward(v, as);
      op.adjoint(as, out);
      if (params.lambda == 0.0) return;
      GradientField g = grad3d(grid, v);
      for (std::size_t i = 0; i < n_vox; ++i) {
        g.x[i] *= wx[i];
        g.y[i] *= wy[i];
        g.z[i] *= wz[i];
      }
      const std::vector<cplx> d = div3d(grid, g);
      for (std::size_t i = 0; i < n_vox; ++i) out[i] += params.lambda * d[i];
    };
    const detail::CgOutcome cg = detail::conjugate_gradient(apply_h, rhs, s, params.cg_iters, params.cg_tol);
    result.cg_iterations += cg.iterations;
    result.outer_iterations = outer + 1;
    if (!cg.finite || !all_finite(s))
      throw NumericalFailure("conjugate gradients produced a non-finite residual in outer step " +
                                 std::to_string(outer),
                             result.objective_trace);

    const double prev = result.objective_trace.back();
    const double cur = objective_value(op, y.values, s, params.lambda, eps);
    result.objective_trace.push_back(cur);
    if (!std::isfinite(cur))
      throw NumericalFailure("TV objective became non-finite in outer step " + std::to_string(outer),
                             result.objective_trace);
    if (prev <= 0.0 || (prev - cur) < params.objective_tol * std::abs(prev)) break;
  }
  result.volume = {grid, std::move(s)};
  return result;
}

inline TvResult tv_solve(const ImagingConfig& cfg, const MeasurementVector& y, const TvParams& params) {
  return tv_solve(ObservationOperator(cfg), y, params);
}

}  // namespace nfmimo
