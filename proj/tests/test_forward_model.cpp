#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace nfmimo;
using namespace nfmimo::testing;

namespace {

ImagingConfig single_entry_config(Point3 tx, Point3 rx, Point3 vox, double f_hz) {
  ImagingConfig c;
  c.array.tx = {tx};
  c.array.rx = {rx};
  c.freqs = {f_hz, f_hz * 2, 2};
  c.grid = {1, 1, 1, 0.01, 0.01, 0.01, vox};
  c.validate();
  return c;
}

}  // namespace

// Values from tests/oracles/matrix_entry.py (mpmath, 50 digits).
TEST(ForwardModel, MatrixEntryAgainstHighPrecision) {
  struct Case {
    Point3 tx, rx, vox;
    double f;
    double re, im;
  };
  const Case cases[] = {
      {{0.15, 0, 0}, {0, 0.15, 0}, {0, 0, 0.5}, 4e9, 0.26426990432532794727, 0.12426355392360530862},
      {{-0.15, 0, 0}, {0, -0.15, 0}, {0.0125, -0.025, 0.45}, 16e9, -0.35538946646048892482, 0.0095412207267932417343},
      {{0.0, 0, 0}, {0, 0.1, 0}, {-0.1, 0.1, 0.35}, 10e9, -0.059263332671252260332, 0.57608802221959088461},
  };
  for (const Case& c : cases) {
    const ImagingConfig cfg = single_entry_config(c.tx, c.rx, c.vox, c.f);
    const cplx v = matrix_entry(cfg, 0, 0);
    const double mag = std::hypot(c.re, c.im);
    EXPECT_NEAR(v.real(), c.re, 1e-12 * mag);
    EXPECT_NEAR(v.imag(), c.im, 1e-12 * mag);
  }
}

TEST(ForwardModel, EntryUsesBothPathLengths) {
  const ImagingConfig cfg = reference_config();
  const std::size_t m = cfg.measurement_index(3, 7, 5);
  const std::size_t n = cfg.grid.flatten(4, 20, 33);
  const Point3 v = voxel_center(cfg.grid, n);
  const double dt = distance(cfg.array.tx[3], v), dr = distance(cfg.array.rx[7], v);
  const double k = cfg.freqs.wavenumber(5);
  const cplx expect = std::exp(cplx(0, -k * (dt + dr))) / (4 * std::numbers::pi * dt * dr);
  EXPECT_NEAR(std::abs(matrix_entry(cfg, m, n) - expect), 0.0, 1e-13 * std::abs(expect));
}

TEST(ForwardModel, DegenerateGeometryThrows) {
  EXPECT_THROW(propagation_term(10.0, 1.0, 0.0, 0.3), DegenerateGeometry);
  ImagingConfig cfg = single_entry_config({0, 0, 0}, {0, 0.1, 0}, {0, 0, 0.0}, 4e9);
  EXPECT_THROW(matrix_entry(cfg, 0, 0), DegenerateGeometry);
  EXPECT_THROW(ObservationOperator(cfg, detail::uncached()).forward(cvec{1.0}), DegenerateGeometry);
}

TEST(ForwardModel, DenseMatchesIndependentReference) {
  const ImagingConfig cfg = tiny_config();
  const SystemMatrix a = build_matrix(cfg);
  const cvec ref = dense_reference(cfg);
  const std::size_t N = cfg.num_voxels();
  double worst = 0.0;
  for (std::size_t m = 0; m < cfg.num_measurements(); ++m)
    for (std::size_t n = 0; n < N; ++n)
      worst = std::max(worst, std::abs(a(m, n) - ref[m * N + n]) / std::abs(ref[m * N + n]));
  EXPECT_LT(worst, 1e-12);
}

TEST(ForwardModel, MatrixFreeMatchesDense) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ImagingConfig cfg = tiny_config();
    cfg.freqs.n_steps = 3 + seed;
    cfg.grid.nz = 5 + seed;
    const SystemMatrix a = build_matrix(cfg);
    const cvec s = random_complex(cfg.num_voxels(), seed);
    const cvec y = random_complex(cfg.num_measurements(), seed + 100);
    for (bool cached : {true, false}) {
      OperatorOptions o;
      if (!cached) o = detail::uncached();
      const ObservationOperator op(cfg, o);
      EXPECT_EQ(op.phasors_cached(), cached);
      EXPECT_LT(rel_err(op.forward(s), a.multiply(s)), 1e-12);
      EXPECT_LT(rel_err(op.adjoint(y), a.multiply_adjoint(y)), 1e-12);
    }
  }
}

TEST(ForwardModel, CachedAndUncachedAgreeBitwise) {
  const ImagingConfig cfg = tiny_config();
  const cvec s = random_complex(cfg.num_voxels(), 9);
  const cvec y = random_complex(cfg.num_measurements(), 10);
  const ObservationOperator a(cfg), b(cfg, detail::uncached());
  EXPECT_EQ(a.forward(s), b.forward(s));
  EXPECT_EQ(a.adjoint(y), b.adjoint(y));
}

TEST(ForwardModel, ColumnMatchesDense) {
  const ImagingConfig cfg = tiny_config();
  const SystemMatrix a = build_matrix(cfg);
  const ObservationOperator op(cfg);
  for (std::size_t n : {0u, 17u, 342u}) {
    const cvec col = op.column(n);
    for (std::size_t m = 0; m < cfg.num_measurements(); ++m) EXPECT_NEAR(std::abs(col[m] - a(m, n)), 0.0, 1e-14);
  }
}

TEST(ForwardModel, AdjointDotProduct) {
  const ImagingConfig cfg = tiny_config();
  const ObservationOperator op(cfg);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const cvec s = random_complex(cfg.num_voxels(), 2 * seed);
    const cvec y = random_complex(cfg.num_measurements(), 2 * seed + 1);
    const cplx lhs = vdot(op.forward(s), y);
    const cplx rhs = vdot(s, op.adjoint(y));
    const double scale = norm2(op.forward(s)) * norm2(y);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * scale);
  }
}

TEST(ForwardModel, Linearity) {
  const ImagingConfig cfg = tiny_config();
  const ObservationOperator op(cfg);
  const cvec s1 = random_complex(cfg.num_voxels(), 1), s2 = random_complex(cfg.num_voxels(), 2);
  const cplx a(0.3, -1.2);
  cvec comb(s1.size());
  for (std::size_t i = 0; i < s1.size(); ++i) comb[i] = a * s1[i] + s2[i];
  const cvec y1 = op.forward(s1), y2 = op.forward(s2);
  cvec expect(y1.size());
  for (std::size_t i = 0; i < y1.size(); ++i) expect[i] = a * y1[i] + y2[i];
  EXPECT_LT(rel_err(op.forward(comb), expect), 1e-13);
}

TEST(ForwardModel, ThreadCountDoesNotChangeResults) {
  const ImagingConfig cfg = tiny_config();
  const ObservationOperator op(cfg);
  const cvec s = random_complex(cfg.num_voxels(), 4);
  const cvec y = random_complex(cfg.num_measurements(), 5);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const cvec f1 = op.forward(s), a1 = op.adjoint(y);
  omp_set_num_threads(4);
  const cvec f4 = op.forward(s), a4 = op.adjoint(y);
  omp_set_num_threads(saved);
  EXPECT_EQ(f1, f4);
  EXPECT_EQ(a1, a4);
}

TEST(ForwardModel, PulseSpectrumScalesRows) {
  ImagingConfig cfg = tiny_config();
  const cvec s = random_complex(cfg.num_voxels(), 6);
  const cvec base = ObservationOperator(cfg).forward(s);
  for (std::size_t f = 0; f < cfg.freqs.n_steps; ++f) cfg.pulse_spectrum.push_back(std::polar(1.0 + f, 0.1 * f));
  const cvec shaped = ObservationOperator(cfg).forward(s);
  for (std::size_t m = 0; m < base.size(); ++m) {
    const cplx p = cfg.pulse(cfg.unflatten_measurement(m).freq);
    EXPECT_NEAR(std::abs(shaped[m] - p * base[m]), 0.0, 1e-12 * std::abs(p * base[m]) + 1e-15);
  }
}

TEST(ForwardModel, ShapeErrors) {
  const ImagingConfig cfg = tiny_config();
  const ObservationOperator op(cfg);
  EXPECT_THROW(op.forward(cvec(5)), InvalidArgument);
  EXPECT_THROW(op.adjoint(cvec(5)), InvalidArgument);
}

TEST(ForwardModel, CapacityError) {
  EXPECT_EQ(dense_matrix_bytes(reference_config()), 2340ull * 30625ull * 16ull);
  EXPECT_THROW(build_matrix(reference_config(), 1 << 20), CapacityError);
}

TEST(Noise, SigmaFormula) {
  EXPECT_NEAR(noise_sigma_from_snr(100.0, 100, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(noise_sigma_from_snr(100.0, 100, 20.0), 0.1, 1e-15);
  EXPECT_NEAR(noise_sigma_from_snr(2340.0 * 4, 2340, 30.0), std::sqrt(4e-3), 1e-15);
}

TEST(Noise, CalibratedAndSeeded) {
  const std::size_t M = 200000;
  MeasurementVector clean{cvec(M, cplx(1.0, 1.0))};
  const MeasurementVector y = add_noise(clean, {30.0, 7});
  double e = 0.0;
  for (std::size_t i = 0; i < M; ++i) e += std::norm(y.values[i] - clean.values[i]);
  const double snr = 10.0 * std::log10(2.0 * M / e);
  EXPECT_NEAR(snr, 30.0, 0.05);
  EXPECT_EQ(add_noise(clean, {30.0, 7}).values, y.values);
  EXPECT_NE(add_noise(clean, {30.0, 8}).values, y.values);
}

TEST(Noise, ComplexCircular) {
  const cvec w = complex_gaussian_noise(200000, 2.0, 11);
  double re2 = 0, im2 = 0, reim = 0;
  for (const cplx& v : w) {
    re2 += v.real() * v.real();
    im2 += v.imag() * v.imag();
    reim += v.real() * v.imag();
  }
  const double n = static_cast<double>(w.size());
  EXPECT_NEAR(re2 / n, 2.0, 0.03);
  EXPECT_NEAR(im2 / n, 2.0, 0.03);
  EXPECT_NEAR(reim / n, 0.0, 0.03);
}

TEST(Noise, InfiniteSnrIsClean) {
  MeasurementVector clean{cvec{1.0, cplx(0, 2)}};
  EXPECT_EQ(add_noise(clean, {}).values, clean.values);
  EXPECT_THROW(add_noise(MeasurementVector{cvec(3)}, {10.0, 1}), UndefinedQuantity);
}
