// Closed-form least-squares rigid fit (cross-covariance SVD with the
// determinant fix), used by both RANSAC and ICP.
#pragma once

#include <Eigen/SVD>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

/// Minimizes sum ||R*s_i + t - d_i||^2. Throws RegistrationError for
/// degenerate configurations (rank < 2 cross-covariance, e.g. collinear
/// points). The returned rotation is orthonormal with det +1.
inline RigidTransform estimate_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size()) throw Error("estimate_rigid: size mismatch");
  if (src.size() < 3) throw Error("estimate_rigid: need at least 3 correspondences");

  Vec3 src_mean = Vec3::Zero(), dst_mean = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= static_cast<double>(src.size());
  dst_mean /= static_cast<double>(dst.size());

  Mat3 cross = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i)
    cross += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();

  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  if (sigma(1) <= 1e-12 * std::max(sigma(0), 1e-300))
    throw RegistrationError("estimate_rigid: degenerate correspondence configuration");

  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  RigidTransform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = dst_mean - t.rotation * src_mean;
  return t;
}

}  // namespace pcad
