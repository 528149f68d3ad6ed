// Feature-correspondence RANSAC for the global pose.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"
#include "pcad/features/feature_set.hpp"
#include "pcad/registration/rigid.hpp"
#include "pcad/spatial/index.hpp"

namespace pcad {

struct RegistrationResult {
  RigidTransform transform;
  /// Fraction of source points with a destination neighbor within the
  /// inlier threshold, after alignment.
  double fitness = 0.0;
  double inlier_rmse = 0.0;
  std::size_t iterations_used = 0;
};

struct RansacParams {
  int n_sample_correspondences = 4;
  int max_iterations = 100000;
  double inlier_threshold = 0.0;  // mm; must be set by the caller (pipeline uses 1.5x voxel)
  bool mutual_filter = true;
  double edge_length_check_ratio = 0.9;
  double confidence = 0.999;
  std::uint64_t seed = 0;
};

/// Nearest destination row for each source row in feature space. With
/// `mutual`, keeps only pairs that are each other's nearest.
inline std::vector<std::pair<std::size_t, std::size_t>> match_correspondences(
    const FeatureSet& feat_src, const FeatureSet& feat_dst, bool mutual) {
  if (feat_src.dim() != feat_dst.dim())
    throw Error("match_correspondences: feature dimension mismatch");
  const SpatialIndex dst_index = SpatialIndex::build(feat_dst.matrix);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(feat_src.rows());
  std::vector<double> q(feat_src.dim());
  for (std::size_t i = 0; i < feat_src.rows(); ++i) {
    for (std::size_t j = 0; j < feat_src.dim(); ++j)
      q[j] = feat_src.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    pairs.emplace_back(i, dst_index.knn(q.data(), 1)[0].index);
  }
  if (!mutual) return pairs;

  const SpatialIndex src_index = SpatialIndex::build(feat_src.matrix);
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  kept.reserve(pairs.size());
  std::vector<double> qd(feat_dst.dim());
  for (const auto& [i, j] : pairs) {
    for (std::size_t c = 0; c < feat_dst.dim(); ++c)
      qd[c] = feat_dst.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
    if (src_index.knn(qd.data(), 1)[0].index == i) kept.emplace_back(i, j);
  }
  return kept;
}

/// Repeatedly samples n correspondences, prunes geometrically inconsistent
/// samples by edge-length ratio, fits a rigid transform, and keeps the
/// hypothesis with the most correspondence inliers (ties: lower rmse).
/// Deterministic for a fixed seed. When no hypothesis produces an inlier,
/// returns a failure result with fitness 0.
inline RegistrationResult ransac_register(const PointCloud& src_cloud, const PointCloud& dst_cloud,
                                          const FeatureSet& feat_src, const FeatureSet& feat_dst,
                                          const RansacParams& params) {
  if (!(params.inlier_threshold > 0.0))
    throw Error("ransac_register: inlier_threshold must be positive");
  if (params.n_sample_correspondences < 3)
    throw Error("ransac_register: need at least 3 sample correspondences");

  const auto matches = match_correspondences(feat_src, feat_dst, params.mutual_filter);
  const std::size_t n_sample = static_cast<std::size_t>(params.n_sample_correspondences);
  if (matches.size() < n_sample)
    throw RegistrationError("ransac_register: fewer matched correspondences than sample size");

  std::vector<Vec3> src_pts(matches.size()), dst_pts(matches.size());
  for (std::size_t m = 0; m < matches.size(); ++m) {
    src_pts[m] = src_cloud.points[feat_src.point_indices[matches[m].first]];
    dst_pts[m] = dst_cloud.points[feat_dst.point_indices[matches[m].second]];
  }

  Rng rng(params.seed);
  const double thr2 = params.inlier_threshold * params.inlier_threshold;
  RigidTransform best_transform;
  std::size_t best_inliers = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::vector<std::size_t> sample(n_sample);
  std::vector<Vec3> ss(n_sample), ds(n_sample);

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    iterations = static_cast<std::size_t>(iter) + 1;
    // Sample distinct correspondence ids.
    for (std::size_t k = 0; k < n_sample; ++k) {
      bool fresh = true;
      do {
        sample[k] = static_cast<std::size_t>(rng.next_below(matches.size()));
        fresh = true;
        for (std::size_t l = 0; l < k; ++l)
          if (sample[l] == sample[k]) fresh = false;
      } while (!fresh);
    }
    // Edge-length consistency.
    bool consistent = true;
    for (std::size_t a = 0; a < n_sample && consistent; ++a) {
      for (std::size_t b = a + 1; b < n_sample && consistent; ++b) {
        const double es = (src_pts[sample[a]] - src_pts[sample[b]]).norm();
        const double ed = (dst_pts[sample[a]] - dst_pts[sample[b]]).norm();
        const double lo = std::min(es, ed), hi = std::max(es, ed);
        if (hi <= 0.0 || lo / hi < params.edge_length_check_ratio) consistent = false;
      }
    }
    if (!consistent) continue;

    for (std::size_t k = 0; k < n_sample; ++k) {
      ss[k] = src_pts[sample[k]];
      ds[k] = dst_pts[sample[k]];
    }
    RigidTransform t;
    try {
      t = estimate_rigid(ss, ds);
    } catch (const RegistrationError&) {
      continue;
    }

    std::size_t inliers = 0;
    double sq_sum = 0.0;
    for (std::size_t m = 0; m < matches.size(); ++m) {
      const double d2 = (t.apply(src_pts[m]) - dst_pts[m]).squaredNorm();
      if (d2 <= thr2) {
        ++inliers;
        sq_sum += d2;
      }
    }
    if (inliers == 0) continue;
    const double rmse = std::sqrt(sq_sum / static_cast<double>(inliers));
    if (inliers > best_inliers || (inliers == best_inliers && rmse < best_rmse)) {
      best_inliers = inliers;
      best_rmse = rmse;
      best_transform = t;
    }

    // Early exit once the confidence bound is met.
    const double w = static_cast<double>(best_inliers) / static_cast<double>(matches.size());
    const double p_good = std::pow(w, static_cast<double>(n_sample));
    if (p_good >= 1.0) break;
    if (p_good > 0.0) {
      const double needed = std::log(1.0 - params.confidence) / std::log(1.0 - p_good);
      if (static_cast<double>(iterations) >= needed) break;
    }
  }

  RegistrationResult result;
  result.iterations_used = iterations;
  if (best_inliers == 0) return result;  // fitness 0, identity transform

  result.transform = best_transform;
  // Cloud-level fitness: fraction of source points with a destination
  // neighbor within the threshold after alignment.
  const SpatialIndex dst_index = SpatialIndex::build(dst_cloud.points);
  std::size_t cloud_inliers = 0;
  double sq_sum = 0.0;
  for (const Vec3& p : src_cloud.points) {
    const auto nn = dst_index.knn(best_transform.apply(p), 1);
    if (nn[0].distance <= params.inlier_threshold) {
      ++cloud_inliers;
      sq_sum += nn[0].distance * nn[0].distance;
    }
  }
  result.fitness = static_cast<double>(cloud_inliers) / static_cast<double>(src_cloud.size());
  result.inlier_rmse = cloud_inliers > 0 ? std::sqrt(sq_sum / static_cast<double>(cloud_inliers)) : 0.0;
  return result;
}

}  // namespace pcad
