#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "support.hpp"

using namespace nfmimo;
using namespace nfmimo::testing;

TEST(Synthesizer, FifteenImpulseSites) {
  const VoxelGrid g = reference_config().grid;
  for (std::uint64_t i = 0; i < 10; ++i) {
    SceneSpec spec;
    spec.seed = scene_seed(5, i);
    const SceneRecord r = generate_scene(g, spec);
    EXPECT_EQ(r.impulse_sites.size(), 15u);
    for (const VoxelIndex& v : r.impulse_sites) {
      EXPECT_LT(v.ix, g.nx);
      EXPECT_LT(v.iy, g.ny);
      EXPECT_LT(v.iz, g.nz);
    }
  }
}

TEST(Synthesizer, MagnitudeRange) {
  const VoxelGrid g = reference_config().grid;
  for (std::uint64_t i = 0; i < 10; ++i) {
    SceneSpec spec;
    spec.seed = 1000 + i;
    spec.random_phase = i % 2 == 0;
    const RealVolume m = generate_scene(g, spec).truth.magnitude();
    const auto [lo, hi] = std::minmax_element(m.values.begin(), m.values.end());
    EXPECT_GE(*lo, 0.0);
    EXPECT_LE(*hi, 1.0 + 1e-12);
    EXPECT_GE(*hi, 0.9);
  }
}

TEST(Synthesizer, BackgroundIsZero) {
  const VoxelGrid g = reference_config().grid;
  SceneSpec spec;
  spec.seed = 3;
  const RealVolume m = generate_scene(g, spec).truth.magnitude();
  EXPECT_EQ(m.values[g.flatten(0, 0, 0)], 0.0);
  EXPECT_EQ(m.values[g.flatten(24, 24, 48)], 0.0);
}

TEST(Synthesizer, SigmoidMapping) {
  EXPECT_EQ(shifted_sigmoid(0.0, 10.0), 0.0);
  EXPECT_NEAR(shifted_sigmoid(1.0, 10.0), 1.0, 1e-15);
  EXPECT_NEAR(shifted_sigmoid(0.5, 10.0), 0.5, 1e-15);
  double prev = -1;
  for (int i = 0; i <= 100; ++i) {
    const double v = shifted_sigmoid(i / 100.0, 10.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Synthesizer, BlurPreservesMassAwayFromEdges) {
  const VoxelGrid g{21, 21, 21, 1, 1, 1, {}};
  std::vector<double> v(g.size(), 0.0);
  v[g.flatten(10, 10, 10)] = 1.0;
  const std::vector<double> b = gaussian_blur3d(g, v, 1.3);
  double sum = 0.0;
  for (double x : b) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(b[g.flatten(11, 10, 10)], b[g.flatten(9, 10, 10)], 1e-15);
  EXPECT_NEAR(b[g.flatten(10, 11, 10)], b[g.flatten(10, 10, 11)], 1e-15);
}

TEST(Synthesizer, PhaseDoesNotChangeMagnitude) {
  const VoxelGrid g = reference_config().grid;
  SceneSpec a;
  a.seed = 77;
  SceneSpec b = a;
  b.random_phase = true;
  const RealVolume ma = generate_scene(g, a).truth.magnitude();
  const RealVolume mb = generate_scene(g, b).truth.magnitude();
  for (std::size_t n = 0; n < ma.values.size(); ++n) EXPECT_NEAR(ma.values[n], mb.values[n], 1e-15);
}

TEST(Synthesizer, BitIdenticalAcrossThreadCounts) {
  const VoxelGrid g = reference_config().grid;
  const auto one = generate_scenes(g, 6, 42, true, 1);
  const auto four = generate_scenes(g, 6, 42, true, 4);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].seed, four[i].seed);
    EXPECT_EQ(one[i].truth.values, four[i].truth.values);
  }
  SceneSpec spec;
  spec.seed = scene_seed(42, 3);
  spec.random_phase = true;
  EXPECT_EQ(generate_scene(g, spec).truth.values, one[3].truth.values);
  EXPECT_NE(one[0].truth.values, one[1].truth.values);
}

TEST(Synthesizer, PhaseUniformityKs) {
  const VoxelGrid g = reference_config().grid;
  SceneSpec spec;
  spec.seed = 11;
  spec.random_phase = true;
  const SceneRecord r = generate_scene(g, spec);
  std::vector<double> phases;
  for (const cplx& v : r.truth.values)
    if (std::abs(v) > 0.0) phases.push_back(std::arg(v));
  ASSERT_GT(phases.size(), 1000u);
  EXPECT_LT(ks_uniform(phases, -std::numbers::pi, std::numbers::pi), ks_critical_1pct(phases.size()));
}

TEST(Synthesizer, SpecValidation) {
  const VoxelGrid g = reference_config().grid;
  SceneSpec spec;
  spec.center_z_max = 2.0;
  EXPECT_THROW(generate_scene(g, spec), InvalidArgument);
  spec = {};
  spec.point_std = 0.0;
  EXPECT_THROW(generate_scene(g, spec), InvalidArgument);
}

TEST(Synthesizer, EllipsoidIsFilled) {
  const VoxelGrid g = reference_config().grid;
  const SceneRecord r = ellipsoid_scene(g, {0.05, 0.05, 0.1}, g.center);
  const RealVolume m = r.truth.magnitude();
  EXPECT_EQ(m.values[g.flatten(12, 12, 24)], 1.0);
  EXPECT_EQ(m.values[g.flatten(14, 12, 24)], 1.0);
  EXPECT_EQ(m.values[g.flatten(0, 0, 0)], 0.0);
  EXPECT_EQ(m.values[g.flatten(12, 12, 24 + 17)], 0.0);
  for (double v : m.values) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(Synthesizer, PointTargets) {
  const VoxelGrid g = reference_config().grid;
  const SceneRecord r = point_target_scene(g, {{0.0, 0.0, 0.5}, {0.025, 0.0, 0.5}});
  ASSERT_EQ(r.impulse_sites.size(), 2u);
  EXPECT_EQ(r.truth.values[g.flatten(12, 12, 24)], cplx(1.0));
  EXPECT_EQ(r.truth.values[g.flatten(14, 12, 24)], cplx(1.0));
  EXPECT_THROW(point_target_scene(g, {{1.0, 0.0, 0.5}}), InvalidArgument);
}

TEST(Synthesizer, DatasetOnDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "nfmimo_test_dataset";
  std::filesystem::remove_all(dir);
  const VoxelGrid g = reference_config().grid;
  const DatasetManifest m = generate_dataset(g, 3, 9, true, dir, 2);
  const DatasetManifest back = DatasetManifest::from_json(read_json_file(dir / "manifest.json"));
  ASSERT_EQ(back.scenes.size(), 3u);
  EXPECT_EQ(back.base_seed, 9u);
  EXPECT_EQ(back.grid, g);
  const auto scenes = generate_scenes(g, 3, 9, true);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.scenes[i].seed, m.scenes[i].seed);
    const Tensor t = read_tensor(dir / back.scenes[i].path);
    EXPECT_EQ(t.to_complex(), scenes[i].truth.values);
    EXPECT_EQ(t.meta.at("seed").get<std::uint64_t>(), scene_seed(9, i));
  }
  std::filesystem::remove_all(dir);
}
