#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "pcad/core/cloud_ops.hpp"
#include "pcad/registration/icp.hpp"
#include "pcad/registration/pipeline.hpp"
#include "pcad/registration/ransac.hpp"
#include "pcad/registration/rigid.hpp"
#include "pcad/synth/scan.hpp"
#include "pcad/synth/shapes.hpp"

using namespace pcad;

namespace {

FeatureSet synthetic_features(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  FeatureSet fs;
  fs.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  fs.point_indices.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fs.point_indices[i] = i;
    for (std::size_t j = 0; j < dim; ++j)
      fs.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          testutil::uniform(rng, -1, 1);
  }
  return fs;
}

PointCloud boxy_cloud(std::uint64_t seed, std::size_t count) {
  ShapeSpec spec;
  spec.family = ShapeFamily::Superellipsoid;
  spec.half_extents = Vec3(14, 10, 7);
  spec.exponent = 4.0;
  spec.count = count;
  spec.seed = seed;
  return make_prototype(spec);
}

}  // namespace

TEST_CASE("identical feature sets pair identically") {
  auto rng = testutil::make_rng(41);
  const FeatureSet fs = synthetic_features(rng, 50, 8);
  const auto pairs = match_correspondences(fs, fs, false);
  REQUIRE(pairs.size() == 50);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(pairs[i].first == i);
    CHECK(pairs[i].second == i);
  }
}

TEST_CASE("mutual filtering returns a subset of the one-way matches") {
  auto rng = testutil::make_rng(42);
  const FeatureSet a = synthetic_features(rng, 80, 5);
  const FeatureSet b = synthetic_features(rng, 60, 5);
  const auto one_way = match_correspondences(a, b, false);
  const auto mutual = match_correspondences(a, b, true);
  CHECK(mutual.size() <= one_way.size());
  for (const auto& m : mutual)
    CHECK(std::find(one_way.begin(), one_way.end(), m) != one_way.end());
}

TEST_CASE("matches agree with a brute-force argmin per row") {
  auto rng = testutil::make_rng(43);
  const FeatureSet a = synthetic_features(rng, 40, 6);
  const FeatureSet b = synthetic_features(rng, 30, 6);
  const auto pairs = match_correspondences(a, b, false);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double best = 1e300;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double d = (a.matrix.row(i) - b.matrix.row(j)).norm();
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    CHECK(pairs[i].second == best_j);
  }
  FeatureSet wrong_dim = synthetic_features(rng, 10, 5);
  CHECK_THROWS_AS(match_correspondences(a, wrong_dim, false), Error);
}

TEST_CASE("estimate_rigid recovers exact and noisy transforms") {
  auto rng = testutil::make_rng(44);
  std::vector<Vec3> src;
  for (int i = 0; i < 50; ++i) src.push_back(testutil::random_vec(rng, 5.0));

  const RigidTransform identity = estimate_rigid(src, src);
  CHECK(rotation_angle_between(identity.rotation, Mat3::Identity()) < 1e-12);
  CHECK(identity.translation.norm() < 1e-12);

  RigidTransform truth;
  truth.rotation = testutil::random_rotation(rng);
  truth.translation = testutil::random_vec(rng, 3.0);
  std::vector<Vec3> dst;
  for (const Vec3& p : src) dst.push_back(truth.apply(p));
  const RigidTransform fit = estimate_rigid(src, dst);
  CHECK(rotation_angle_between(fit.rotation, truth.rotation) < 1e-9);
  CHECK((fit.translation - truth.translation).norm() < 1e-9);
}

TEST_CASE("estimate_rigid under gaussian noise: residual scale and accuracy") {
  auto rng = testutil::make_rng(45);
  const double sigma = 0.01;
  const std::size_t n = 50;
  std::normal_distribution<double> gauss(0.0, sigma);

  double mean_rmse = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    std::vector<Vec3> src;
    for (std::size_t i = 0; i < n; ++i) src.push_back(testutil::random_vec(rng, 4.0));
    RigidTransform truth;
    truth.rotation = testutil::random_rotation(rng);
    truth.translation = testutil::random_vec(rng, 2.0);
    std::vector<Vec3> dst;
    for (const Vec3& p : src)
      dst.push_back(truth.apply(p) + Vec3(gauss(rng), gauss(rng), gauss(rng)));
    const RigidTransform fit = estimate_rigid(src, dst);
    CHECK(rotation_angle_between(fit.rotation, truth.rotation) < 0.02);
    CHECK((fit.translation - truth.translation).norm() < 0.02);
    CHECK(std::abs(fit.rotation.determinant() - 1.0) < 1e-9);

    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq += (fit.apply(src[i]) - dst[i]).squaredNorm();
    mean_rmse += std::sqrt(sq / n);
  }
  mean_rmse /= 100.0;
  // 6 fitted dof leave sigma * sqrt(3 - 6/N) of residual per point.
  const double expected = sigma * std::sqrt(3.0 - 6.0 / static_cast<double>(n));
  CHECK(mean_rmse == Catch::Approx(expected).epsilon(0.15));
}

TEST_CASE("estimate_rigid rejects degenerate configurations") {
  std::vector<Vec3> line = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  CHECK_THROWS_AS(estimate_rigid(line, line), RegistrationError);
  std::vector<Vec3> two = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(estimate_rigid(two, two), Error);
}

TEST_CASE("ransac recovers a noise-free rigid transform") {
  auto rng = testutil::make_rng(46);
  PointCloud src = testutil::sphere_cloud(rng, 300, 10.0);
  src.normals.clear();
  RigidTransform truth;
  truth.rotation = testutil::random_rotation(rng);
  truth.translation = testutil::random_vec(rng, 15.0);
  const PointCloud dst = apply_transform(src, truth);
  const FeatureSet feat = synthetic_features(rng, src.size(), 16);

  RansacParams params;
  params.inlier_threshold = 0.5;
  params.seed = 7;
  const RegistrationResult res = ransac_register(src, dst, feat, feat, params);
  CHECK(res.fitness >= 0.99);
  CHECK(rotation_angle_between(res.transform.rotation, truth.rotation) < 1e-3);
  CHECK((res.transform.translation - truth.translation).norm() < 1e-3);

  const RegistrationResult res2 = ransac_register(src, dst, feat, feat, params);
  CHECK(res2.transform.rotation == res.transform.rotation);
  CHECK(res2.transform.translation == res.transform.translation);
  CHECK(res2.iterations_used == res.iterations_used);
}

TEST_CASE("unrelated clouds report low fitness without crashing") {
  auto rng = testutil::make_rng(47);
  ShapeSpec torus;
  torus.family = ShapeFamily::Torus;
  torus.ring_radius = 12;
  torus.tube_radius = 4;
  torus.count = 600;
  torus.seed = 3;
  const PointCloud a = testutil::sphere_cloud(rng, 600, 10.0);
  const PointCloud b = make_prototype(torus);
  const FeatureSet fa = fpfh(a, 2.0);
  const FeatureSet fb = fpfh(b, 2.0);
  RansacParams params;
  params.inlier_threshold = 0.3;
  params.max_iterations = 2000;
  params.seed = 11;
  const RegistrationResult res = ransac_register(a, b, fa, fb, params);
  CHECK(res.fitness < 0.3);
}

TEST_CASE("icp converges from the truth and from a perturbed start") {
  auto rng = testutil::make_rng(48);
  const PointCloud src = boxy_cloud(5, 1500);
  RigidTransform truth;
  truth.rotation = testutil::random_rotation(rng);
  truth.translation = testutil::random_vec(rng, 5.0);
  const PointCloud dst = apply_transform(src, truth);

  std::vector<double> history;
  const RegistrationResult from_truth = icp_refine(src, dst, truth, 2.0, 20, &history);
  CHECK(history.size() <= 2);
  CHECK(from_truth.inlier_rmse < 1e-9);

  RigidTransform start = truth;
  start.rotation = Eigen::AngleAxisd(5.0 * 3.14159265 / 180.0, Vec3(0, 0, 1)).toRotationMatrix() *
                   truth.rotation;
  const RegistrationResult refined = icp_refine(src, dst, start, 3.0, 60, &history);
  CHECK(rotation_angle_between(refined.transform.rotation, truth.rotation) < 1e-4);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] + 1e-12);

  RigidTransform far_off;
  far_off.translation = Vec3(1000, 0, 0);
  CHECK_THROWS_AS(icp_refine(src, dst, far_off, 0.5, 10), RegistrationError);
}

TEST_CASE("full pipeline aligns a one-side crop within 3 degrees and 1 percent") {
  const PointCloud proto = boxy_cloud(17, 12000);
  Rng rng(99);
  const RigidTransform pose = random_pose(rng, 0.5 * bounding_box(proto).diagonal());
  const PointCloud scan =
      simulate_single_side_scan(proto, Vec3(0, 0, 1), 0.011, pose, 80.0, 5);

  RegistrationPipelineParams params;
  params.ransac.seed = 123;
  const AlignmentResult result = register_to_prototype(scan, proto, params);
  REQUIRE(result.registered);

  // The recovered transform must invert the pose.
  const RigidTransform composed = result.reg.transform.compose(pose);
  CHECK(rotation_angle_between(composed.rotation, Mat3::Identity()) < 3.0 * 3.14159265 / 180.0);
  CHECK(composed.translation.norm() < 0.01 * bounding_box(proto).diagonal());
}

TEST_CASE("already aligned input yields a near-identity transform") {
  const PointCloud proto = boxy_cloud(23, 9000);
  Rng rng(2);
  const PointCloud scan =
      simulate_single_side_scan(proto, Vec3(0, 1, 0), 0.011, RigidTransform{}, 80.0, 6);
  RegistrationPipelineParams params;
  params.ransac.seed = 5;
  const AlignmentResult result = register_to_prototype(scan, proto, params);
  REQUIRE(result.registered);
  CHECK(rotation_angle_between(result.reg.transform.rotation, Mat3::Identity()) <
        2.0 * 3.14159265 / 180.0);
  CHECK(result.reg.transform.translation.norm() < 0.01 * bounding_box(proto).diagonal());
}

TEST_CASE("pre-rotating the scan leaves the composed transform unchanged") {
  const PointCloud proto = boxy_cloud(31, 9000);
  const PointCloud scan =
      simulate_single_side_scan(proto, Vec3(1, 0, 0), 0.0, RigidTransform{}, 80.0, 7);

  Rng rng(4);
  RigidTransform q;
  q.rotation = random_rotation(rng);
  q.translation = Vec3(3, -2, 5);
  const PointCloud rotated_scan = apply_transform(scan, q);

  RegistrationPipelineParams params;
  params.ransac.seed = 31;
  const AlignmentResult direct = register_to_prototype(scan, proto, params);
  const AlignmentResult moved = register_to_prototype(rotated_scan, proto, params);
  REQUIRE(direct.registered);
  REQUIRE(moved.registered);
  const RigidTransform composed = moved.reg.transform.compose(q);
  CHECK(rotation_angle_between(composed.rotation, direct.reg.transform.rotation) <
        1.0 * 3.14159265 / 180.0);
  CHECK((composed.translation - direct.reg.transform.translation).norm() <
        0.01 * bounding_box(proto).diagonal());
}

TEST_CASE("best-of-prototypes keeps the highest fitness") {
  const PointCloud proto = boxy_cloud(37, 8000);
  ShapeSpec other_spec;
  other_spec.family = ShapeFamily::Sphere;
  other_spec.radius = 12.0;
  other_spec.count = 8000;
  other_spec.seed = 38;
  const PointCloud other = make_prototype(other_spec);

  Rng rng(6);
  const RigidTransform pose = random_pose(rng, 10.0);
  const PointCloud scan = simulate_single_side_scan(proto, Vec3(0, 0, -1), 0.011, pose, 80.0, 8);

  RegistrationPipelineParams params;
  params.ransac.seed = 77;
  const AlignmentResult best = register_to_best_prototype(scan, {other, proto}, params);
  CHECK(best.prototype_index == 1);
  CHECK(best.registered);
}
