#pragma once

// Non-iterative reconstructions: frequency-domain backprojection and the normalized adjoint image
// fed to the learned refinement stage.

#include <algorithm>
#include <cmath>
#include <vector>

#include "nfmimo/error.hpp"
#include "nfmimo/forward_model.hpp"

namespace nfmimo {

/// Options for the pure-phase (backprojection) kernel: no spreading loss, p(k) = 1.
inline OperatorOptions backprojection_options(std::size_t phasor_cache_bytes = 0) {
  OperatorOptions o;
  o.amplitude_weighting = false;
  o.apply_pulse = false;
  o.phasor_cache_bytes = phasor_cache_bytes;
  return o;
}

/// s_n = (1/M) sum_m y_m exp(+j k_m (d_t + d_r)), using an operator built with backprojection_options().
inline ReflectivityVolume backprojection(const ObservationOperator& phase_only, const MeasurementVector& y) {
  const auto& o = phase_only.options();
  if (o.amplitude_weighting || o.apply_pulse)
    throw InvalidArgument("backprojection requires a pure-phase operator (see backprojection_options)");
  ReflectivityVolume out{phase_only.config().grid, phase_only.adjoint(y.values)};
  const double inv_m = 1.0 / static_cast<double>(phase_only.rows());
  for (cplx& v : out.values) v *= inv_m;
  return out;
}

inline ReflectivityVolume backprojection(const ImagingConfig& cfg, const MeasurementVector& y) {
  return backprojection(ObservationOperator(cfg, backprojection_options()), y);
}

/// |A^H y| scaled to [0, 1] by its own maximum. `scale` is that maximum, so
/// A^H y magnitudes are recoverable as image * scale.
struct AdjointImage {
  RealVolume image;
  double scale = 0.0;
};

/// Scales a magnitude volume by its maximum. Throws UndefinedQuantity for an all-zero volume.
inline AdjointImage normalize_by_max(RealVolume magnitude) {
  const double peak = magnitude.values.empty() ? 0.0 : *std::max_element(magnitude.values.begin(), magnitude.values.end());
  if (!(peak > 0.0) || !std::isfinite(peak)) throw UndefinedQuantity("cannot normalize an all-zero volume");
  for (double& v : magnitude.values) v /= peak;
  return {std::move(magnitude), peak};
}

inline AdjointImage adjoint_image(const ObservationOperator& op, const MeasurementVector& y) {
  const ReflectivityVolume s{op.config().grid, op.adjoint(y.values)};
  return normalize_by_max(s.magnitude());
}

inline AdjointImage adjoint_image(const ImagingConfig& cfg, const MeasurementVector& y) {
  return normalize_by_max(apply_adjoint(cfg, y).magnitude());
}

}  // namespace nfmimo
