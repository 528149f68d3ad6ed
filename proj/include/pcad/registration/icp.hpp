// Point-to-point ICP refinement.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pcad/registration/ransac.hpp"
#include "pcad/registration/rigid.hpp"
#include "pcad/spatial/index.hpp"

namespace pcad {

/// Iterated closest point with a point-to-point objective: correspond each
/// source point to its nearest destination point within max_corr_dist,
/// refit, stop when the rmse improvement drops below 1e-6 or max_iters is
/// reached. Returns the best transform seen. Throws RegistrationError when
/// t0 yields no correspondences at all.
inline RegistrationResult icp_refine(const PointCloud& src, const PointCloud& dst,
                                     const RigidTransform& t0, double max_corr_dist,
                                     int max_iters, std::vector<double>* rmse_history = nullptr) {
  if (!(max_corr_dist > 0.0)) throw Error("icp_refine: max_corr_dist must be positive");
  if (!t0.is_valid()) throw Error("icp_refine: invalid initial transform");

  const SpatialIndex dst_index = SpatialIndex::build(dst.points);
  RigidTransform current = t0;
  RigidTransform best = t0;
  double best_rmse = std::numeric_limits<double>::infinity();
  double prev_rmse = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  if (rmse_history) rmse_history->clear();

  std::vector<Vec3> corr_src, corr_dst;
  for (int iter = 0; iter < max_iters; ++iter) {
    corr_src.clear();
    corr_dst.clear();
    for (const Vec3& p : src.points) {
      const auto nn = dst_index.knn(current.apply(p), 1);
      if (nn[0].distance <= max_corr_dist) {
        corr_src.push_back(p);
        corr_dst.push_back(dst.points[nn[0].index]);
      }
    }
    if (corr_src.size() < 3) {
      if (iter == 0)
        throw RegistrationError("icp_refine: no correspondences within max_corr_dist at t0");
      break;
    }
    RigidTransform fitted;
    try {
      fitted = estimate_rigid(corr_src, corr_dst);
    } catch (const RegistrationError&) {
      break;
    }
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < corr_src.size(); ++i)
      sq_sum += (fitted.apply(corr_src[i]) - corr_dst[i]).squaredNorm();
    const double rmse = std::sqrt(sq_sum / static_cast<double>(corr_src.size()));
    ++iterations;
    if (rmse_history) rmse_history->push_back(rmse);
    current = fitted;
    if (rmse < best_rmse) {
      best_rmse = rmse;
      best = fitted;
    }
    if (prev_rmse - rmse < 1e-6) break;
    prev_rmse = rmse;
  }

  RegistrationResult result;
  result.transform = best;
  result.iterations_used = iterations;
  std::size_t inliers = 0;
  double sq_sum = 0.0;
  for (const Vec3& p : src.points) {
    const auto nn = dst_index.knn(best.apply(p), 1);
    if (nn[0].distance <= max_corr_dist) {
      ++inliers;
      sq_sum += nn[0].distance * nn[0].distance;
    }
  }
  result.fitness = static_cast<double>(inliers) / static_cast<double>(src.size());
  result.inlier_rmse = inliers > 0 ? std::sqrt(sq_sum / static_cast<double>(inliers)) : 0.0;
  return result;
}

}  // namespace pcad
