// One-side scan simulation: normal-based visibility culling, sensor noise,
// and a random placement pose.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "pcad/common.hpp"
#include "pcad/core/cloud_ops.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

/// Uniform random rotation (quaternion of four gaussians).
inline Mat3 random_rotation(Rng& rng) {
  Eigen::Vector4d q(rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(),
                    rng.next_gaussian());
  q.normalize();
  return Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
}

/// Uniform rotation plus a translation drawn uniformly from a ball.
inline RigidTransform random_pose(Rng& rng, double translation_radius) {
  RigidTransform t;
  t.rotation = random_rotation(rng);
  const double z = 2.0 * rng.next_double() - 1.0;
  const double phi = 6.283185307179586 * rng.next_double();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
  t.translation = translation_radius * std::cbrt(rng.next_double()) * dir;
  return t;
}

/// Keeps the points whose normal faces the viewer
/// (n . view_dir < -cos(threshold_deg)), adds isotropic Gaussian noise,
/// then applies the pose. Labels are carried through; normals are rotated.
/// Throws when the visible set is empty.
inline PointCloud simulate_single_side_scan(const PointCloud& cloud, const Vec3& view_dir,
                                            double noise_sigma_mm, const RigidTransform& pose,
                                            double threshold_deg = 80.0,
                                            std::uint64_t noise_seed = 0) {
  if (std::abs(view_dir.norm() - 1.0) > 1e-6)
    throw Error("simulate_single_side_scan: view_dir must be unit length");
  if (!cloud.has_normals()) throw Error("simulate_single_side_scan: cloud has no normals");
  if (noise_sigma_mm < 0.0) throw Error("simulate_single_side_scan: negative noise sigma");

  const double cos_threshold = std::cos(threshold_deg * 3.141592653589793 / 180.0);
  PointCloud visible;
  const bool with_labels = cloud.has_labels();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.normals[i].dot(view_dir) < -cos_threshold) {
      visible.points.push_back(cloud.points[i]);
      visible.normals.push_back(cloud.normals[i]);
      if (with_labels) visible.labels.push_back(cloud.labels[i]);
    }
  }
  if (visible.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(%g, %g, %g)", view_dir.x(), view_dir.y(), view_dir.z());
    throw Error(std::string("simulate_single_side_scan: no point visible from direction ") + buf);
  }

  if (noise_sigma_mm > 0.0) {
    Rng rng(noise_seed);
    for (Vec3& p : visible.points) {
      p.x() += noise_sigma_mm * rng.next_gaussian();
      p.y() += noise_sigma_mm * rng.next_gaussian();
      p.z() += noise_sigma_mm * rng.next_gaussian();
    }
  }
  return apply_transform(visible, pose);
}

}  // namespace pcad
