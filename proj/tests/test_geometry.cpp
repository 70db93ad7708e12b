#include <gtest/gtest.h>

#include "nfmimo/geometry.hpp"

using namespace nfmimo;

TEST(Geometry, MillsCrossLayout) {
  const AntennaArray a = mills_cross(0.3, 12, 13);
  ASSERT_EQ(a.num_tx(), 12u);
  ASSERT_EQ(a.num_rx(), 13u);
  EXPECT_DOUBLE_EQ(a.tx.front().x, -0.15);
  EXPECT_DOUBLE_EQ(a.tx.back().x, 0.15);
  EXPECT_DOUBLE_EQ(a.rx.front().y, -0.15);
  EXPECT_DOUBLE_EQ(a.rx.back().y, 0.15);
  EXPECT_DOUBLE_EQ(a.rx[6].y, 0.0);
  for (const Point3& p : a.tx) {
    EXPECT_EQ(p.y, 0.0);
    EXPECT_EQ(p.z, 0.0);
  }
  for (const Point3& p : a.rx) {
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.z, 0.0);
  }
  for (std::size_t i = 1; i < a.tx.size(); ++i) EXPECT_NEAR(a.tx[i].x - a.tx[i - 1].x, 0.3 / 11, 1e-15);
}

TEST(Geometry, ReferenceSizes) {
  EXPECT_EQ(reference_config(7).num_measurements(), 1092u);
  EXPECT_EQ(reference_config(15).num_measurements(), 2340u);
  EXPECT_EQ(reference_config(31).num_measurements(), 4836u);
  EXPECT_EQ(reference_config().num_voxels(), 30625u);
}

TEST(Geometry, FrequencyEndpoints) {
  const FrequencyGrid f{4e9, 16e9, 15};
  EXPECT_EQ(f.frequency(0), 4e9);
  EXPECT_EQ(f.frequency(14), 16e9);
  EXPECT_NEAR(f.step_hz(), 12e9 / 14, 1e-3);
  EXPECT_NEAR(f.wavenumber(0), 2 * 3.141592653589793 * 4e9 / 299792458.0, 1e-12);
}

TEST(Geometry, VoxelIndexRoundTrip) {
  const VoxelGrid g = reference_config().grid;
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{49}, std::size_t{12345}, g.size() - 1}) {
    EXPECT_EQ(g.flatten(g.unflatten(n)), n);
  }
  EXPECT_EQ(g.flatten(0, 0, 1), 1u);
  EXPECT_EQ(g.flatten(0, 1, 0), 49u);
  EXPECT_EQ(g.flatten(1, 0, 0), 25u * 49u);
  EXPECT_THROW(g.unflatten(g.size()), InvalidArgument);
}

TEST(Geometry, VoxelCenters) {
  const VoxelGrid g = reference_config().grid;
  const Point3 c = g.center_of({12, 12, 24});
  EXPECT_DOUBLE_EQ(c.x, 0.0);
  EXPECT_DOUBLE_EQ(c.y, 0.0);
  EXPECT_DOUBLE_EQ(c.z, 0.5);
  const Point3 lo = g.center_of({0, 0, 0});
  EXPECT_DOUBLE_EQ(lo.x, -0.15);
  EXPECT_DOUBLE_EQ(lo.z, 0.5 - 24 * 0.00625);
}

TEST(Geometry, MeasurementIndexRoundTrip) {
  const ImagingConfig cfg = reference_config();
  for (std::size_t m : {std::size_t{0}, std::size_t{14}, std::size_t{15}, std::size_t{1000}, cfg.num_measurements() - 1}) {
    EXPECT_EQ(cfg.measurement_index(cfg.unflatten_measurement(m)), m);
  }
  EXPECT_EQ(cfg.measurement_index(1, 0, 0), 13u * 15u);
  EXPECT_EQ(cfg.measurement_index(0, 1, 0), 15u);
}

TEST(Geometry, Validation) {
  AntennaArray dup;
  dup.tx = {{0, 0, 0}, {0, 0, 0}};
  dup.rx = {{0, 0.1, 0}};
  EXPECT_THROW(dup.validate(), InvalidArgument);

  AntennaArray off;
  off.tx = {{0, 0, 0.01}};
  off.rx = {{0, 0.1, 0}};
  EXPECT_THROW(off.validate(), InvalidArgument);

  AntennaArray empty;
  empty.rx = {{0, 0.1, 0}};
  EXPECT_THROW(empty.validate(), InvalidArgument);

  EXPECT_THROW((FrequencyGrid{16e9, 4e9, 15}.validate()), InvalidArgument);
  EXPECT_THROW((FrequencyGrid{4e9, 16e9, 0}.validate()), InvalidArgument);
  EXPECT_THROW((VoxelGrid{0, 1, 1, 1, 1, 1, {}}.validate()), InvalidArgument);
  EXPECT_THROW((VoxelGrid{1, 1, 1, 1, -1, 1, {}}.validate()), InvalidArgument);

  ImagingConfig cfg = reference_config();
  cfg.pulse_spectrum = {1.0, 1.0};
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}
