#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "pcad/core/cloud_ops.hpp"
#include "pcad/features/fpfh.hpp"

using namespace pcad;

namespace {

PointCloud planar_grid(int side, double spacing) {
  PointCloud cloud;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      cloud.points.emplace_back(i * spacing, j * spacing, 0.0);
      cloud.normals.emplace_back(0, 0, 1);
    }
  return cloud;
}

void check_block_sums(const FeatureSet& fs, double tol = 1e-9) {
  for (std::size_t i = 0; i < fs.rows(); ++i) {
    if (!fs.degenerate.empty() && fs.degenerate[i]) continue;
    for (int b = 0; b < 3; ++b)
      CHECK(fs.matrix.row(i).segment(11 * b, 11).sum() == Catch::Approx(100.0).margin(tol));
  }
}

}  // namespace

TEST_CASE("raw features copy coordinates with identity point indices") {
  PointCloud cloud;
  cloud.points.emplace_back(1, 2, 3);
  const FeatureSet fs = raw_features(cloud);
  REQUIRE(fs.rows() == 1);
  CHECK(fs.matrix(0, 0) == 1.0);
  CHECK(fs.matrix(0, 1) == 2.0);
  CHECK(fs.matrix(0, 2) == 3.0);
  CHECK(fs.kind == FeatureKind::RawXyz);

  auto rng = testutil::make_rng(31);
  const PointCloud many = testutil::random_cloud(rng, 64, 2.0);
  const FeatureSet fm = raw_features(many);
  REQUIRE(fm.rows() == 64);
  for (std::size_t i = 0; i < 64; ++i) CHECK(fm.point_indices[i] == i);
}

TEST_CASE("raw features are position dependent by design") {
  auto rng = testutil::make_rng(32);
  const PointCloud cloud = testutil::random_cloud(rng, 20, 1.0);
  RigidTransform t;
  t.translation = Vec3(5, 0, 0);
  const FeatureSet before = raw_features(cloud);
  const FeatureSet after = raw_features(apply_transform(cloud, t));
  CHECK((after.matrix - before.matrix).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("coplanar co-normal points concentrate every fpfh block at its center bin") {
  const PointCloud grid = planar_grid(9, 1.0);
  const FeatureSet fs = fpfh(grid, 1.6);
  check_block_sums(fs);
  for (std::size_t i = 0; i < fs.rows(); ++i) {
    CHECK(fs.matrix(i, 5) == Catch::Approx(100.0));       // alpha = 0
    CHECK(fs.matrix(i, 11 + 5) == Catch::Approx(100.0));  // phi = 0
    CHECK(fs.matrix(i, 22 + 5) == Catch::Approx(100.0));  // theta = 0
  }
}

TEST_CASE("fpfh is invariant under rigid motion") {
  auto rng = testutil::make_rng(33);
  for (int rep = 0; rep < 3; ++rep) {
    const PointCloud cloud = testutil::sphere_cloud(rng, 400, 5.0);
    RigidTransform t;
    t.rotation = testutil::random_rotation(rng);
    t.translation = testutil::random_vec(rng, 8.0);
    const double radius = 1.2;
    const FeatureSet base = fpfh(cloud, radius);
    const FeatureSet moved = fpfh(apply_transform(cloud, t), radius);
    CHECK((moved.matrix - base.matrix).cwiseAbs().maxCoeff() <= 1e-6);
    check_block_sums(base);
  }
}

TEST_CASE("isolated points get a zero descriptor and a degeneracy flag") {
  PointCloud cloud = planar_grid(4, 1.0);
  cloud.points.emplace_back(100, 100, 100);
  cloud.normals.emplace_back(0, 0, 1);
  const FeatureSet fs = fpfh(cloud, 1.5);
  const std::size_t last = fs.rows() - 1;
  CHECK(fs.degenerate[last] == 1);
  CHECK(fs.matrix.row(last).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i + 1 < fs.rows(); ++i) CHECK(fs.degenerate[i] == 0);
}

TEST_CASE("fpfh rejects missing normals and bad radii") {
  auto rng = testutil::make_rng(34);
  PointCloud bare = testutil::random_cloud(rng, 10, 1.0);
  CHECK_THROWS_AS(fpfh(bare, 1.0), Error);
  const PointCloud cloud = testutil::sphere_cloud(rng, 10, 1.0);
  CHECK_THROWS_AS(fpfh(cloud, 0.0), Error);
}

TEST_CASE("fpfh rows permute with the input points") {
  auto rng = testutil::make_rng(35);
  PointCloud cloud = testutil::sphere_cloud(rng, 120, 3.0);
  const double radius = 1.0;
  const FeatureSet base = fpfh(cloud, radius);

  std::vector<std::size_t> perm(cloud.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  PointCloud shuffled;
  for (const std::size_t i : perm) {
    shuffled.points.push_back(cloud.points[i]);
    shuffled.normals.push_back(cloud.normals[i]);
  }
  const FeatureSet moved = fpfh(shuffled, radius);
  for (std::size_t r = 0; r < perm.size(); ++r)
    CHECK((moved.matrix.row(r) - base.matrix.row(perm[r])).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("contextual features interpolate between fpfh and the cloud mean") {
  auto rng = testutil::make_rng(36);
  const PointCloud cloud = testutil::sphere_cloud(rng, 200, 4.0);
  const FeatureSet base = fpfh(cloud, 1.5);

  const FeatureSet wide = contextual_features(cloud, base, 1000.0);
  const Eigen::RowVectorXd mean = base.matrix.colwise().mean();
  for (std::size_t i = 0; i < wide.rows(); ++i)
    CHECK((wide.matrix.row(i) - mean).cwiseAbs().maxCoeff() <= 1e-9);

  const FeatureSet narrow = contextual_features(cloud, base, 1e-6);
  CHECK((narrow.matrix - base.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("contextual features inherit rigid invariance") {
  auto rng = testutil::make_rng(37);
  const PointCloud cloud = testutil::sphere_cloud(rng, 300, 5.0);
  RigidTransform t;
  t.rotation = testutil::random_rotation(rng);
  t.translation = testutil::random_vec(rng, 3.0);
  const PointCloud moved_cloud = apply_transform(cloud, t);
  const FeatureSet base = contextual_features(cloud, fpfh(cloud, 1.2), 3.0);
  const FeatureSet moved = contextual_features(moved_cloud, fpfh(moved_cloud, 1.2), 3.0);
  CHECK((moved.matrix - base.matrix).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("concat scales and stacks blocks") {
  PointCloud cloud;
  cloud.points.emplace_back(1, 0, 0);
  cloud.points.emplace_back(0, 1, 0);
  FeatureSet a = raw_features(cloud);
  FeatureSet b = raw_features(cloud);

  const FeatureSet both = concat_features(a, b, 1.0, 1.0);
  CHECK(both.dim() == 6);
  CHECK(both.matrix(0, 0) == 1.0);
  CHECK(both.matrix(0, 3) == 1.0);
  CHECK(both.kind == FeatureKind::Concat);
  CHECK(both.params.block_dims == std::vector<int>{3, 3});

  const FeatureSet zeroed = concat_features(a, b, 1.0, 0.0);
  CHECK(zeroed.matrix.rightCols(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(zeroed.matrix.leftCols(3) == a.matrix);

  b.point_indices[0] = 7;
  CHECK_THROWS_AS(concat_features(a, b, 1.0, 1.0), Error);
}

TEST_CASE("fpfh plus raw concatenation yields 36 dims") {
  auto rng = testutil::make_rng(38);
  const PointCloud cloud = testutil::sphere_cloud(rng, 100, 3.0);
  const FeatureSet both = concat_features(fpfh(cloud, 1.2), raw_features(cloud));
  CHECK(both.dim() == 36);
}
