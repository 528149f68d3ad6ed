// Core geometric types: points, clouds, rigid transforms, boxes.
// Coordinates are double precision, millimetres.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <vector>

#include "pcad/common.hpp"

namespace pcad {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Point set with optional per-point unit normals and optional binary
/// anomaly labels (0 = normal, 1 = anomalous). Normals and labels, when
/// present, align index-for-index with points.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty() && normals.size() == points.size(); }
  bool has_labels() const { return !labels.empty() && labels.size() == points.size(); }
};

/// Throws Error if the cloud violates its invariants (finite coordinates,
/// unit normals within 1e-6, aligned binary labels).
inline void validate(const PointCloud& cloud) {
  for (const Vec3& p : cloud.points) {
    if (!p.allFinite()) throw Error("point cloud contains non-finite coordinate");
  }
  if (!cloud.normals.empty()) {
    if (cloud.normals.size() != cloud.points.size())
      throw Error("normals length does not match point count");
    for (const Vec3& n : cloud.normals) {
      if (std::abs(n.norm() - 1.0) > 1e-6) throw Error("normal is not unit length");
    }
  }
  if (!cloud.labels.empty()) {
    if (cloud.labels.size() != cloud.points.size())
      throw Error("labels length does not match point count");
    for (const std::uint8_t l : cloud.labels) {
      if (l > 1) throw Error("label is not binary");
    }
  }
}

/// Rotation + translation. Rotation must be orthonormal with det +1.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(rotation.transpose() * translation);
    return inv;
  }

  /// this ∘ other: applies `other` first, then `this`.
  RigidTransform compose(const RigidTransform& other) const {
    RigidTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  bool is_valid(double tol = 1e-6) const {
    const Mat3 should_be_identity = rotation.transpose() * rotation;
    return (should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol && translation.allFinite();
  }
};

/// Angle of the relative rotation between two rotations, radians.
inline double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a * b.transpose();
  double c = (rel.trace() - 1.0) / 2.0;
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

/// Axis-aligned bounding box, min <= max componentwise.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  double diagonal() const { return (max - min).norm(); }
  Vec3 center() const { return 0.5 * (min + max); }
};

}  // namespace pcad
