// Cloud-level operations: transforms, bounding boxes, downsampling,
// subsampling, normal estimation.
#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"
#include "pcad/spatial/index.hpp"

namespace pcad {

/// Maps points p -> R*p + t and normals n -> R*n. Labels and order preserved.
inline PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
  out.normals.reserve(cloud.normals.size());
  for (const Vec3& n : cloud.normals) out.normals.push_back(t.rotation * n);
  out.labels = cloud.labels;
  return out;
}

inline Aabb bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("bounding_box: empty cloud");
  Aabb box;
  box.min = box.max = cloud.points[0];
  for (const Vec3& p : cloud.points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

struct VoxelDownsampleResult {
  PointCloud cloud;
  /// input index -> index of its voxel representative in `cloud`.
  std::vector<std::size_t> index_map;
};

/// One output point per occupied voxel, at the centroid of its members.
/// Output normals are the normalized mean of member normals when present;
/// a member label of 1 marks the whole voxel. Voxels appear in first-seen
/// input order, so the result is deterministic.
inline VoxelDownsampleResult voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw Error("voxel_downsample: voxel size must be positive");
  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      std::uint64_t h = 1469598103934665603ULL;
      for (const std::int64_t v : k) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ULL;
      }
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::size_t, KeyHash> voxel_of;
  voxel_of.reserve(cloud.size());

  const bool with_normals = cloud.has_normals();
  const bool with_labels = cloud.has_labels();
  std::vector<Vec3> sums;
  std::vector<Vec3> normal_sums;
  std::vector<std::size_t> counts;
  std::vector<std::uint8_t> labels;
  VoxelDownsampleResult out;
  out.index_map.resize(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const std::array<std::int64_t, 3> key = {
        static_cast<std::int64_t>(std::floor(p.x() / voxel)),
        static_cast<std::int64_t>(std::floor(p.y() / voxel)),
        static_cast<std::int64_t>(std::floor(p.z() / voxel))};
    auto [it, inserted] = voxel_of.try_emplace(key, sums.size());
    if (inserted) {
      sums.push_back(Vec3::Zero());
      if (with_normals) normal_sums.push_back(Vec3::Zero());
      counts.push_back(0);
      if (with_labels) labels.push_back(0);
    }
    const std::size_t v = it->second;
    sums[v] += p;
    if (with_normals) normal_sums[v] += cloud.normals[i];
    if (with_labels) labels[v] = std::max(labels[v], cloud.labels[i]);
    counts[v] += 1;
    out.index_map[i] = v;
  }

  out.cloud.points.resize(sums.size());
  for (std::size_t v = 0; v < sums.size(); ++v)
    out.cloud.points[v] = sums[v] / static_cast<double>(counts[v]);
  if (with_normals) {
    out.cloud.normals.resize(sums.size());
    for (std::size_t v = 0; v < sums.size(); ++v) {
      const double norm = normal_sums[v].norm();
      out.cloud.normals[v] = norm > 1e-12 ? Vec3(normal_sums[v] / norm) : Vec3(0, 0, 1);
    }
  }
  if (with_labels) out.cloud.labels = std::move(labels);
  return out;
}

struct SubsampleResult {
  PointCloud cloud;
  std::vector<std::size_t> kept_indices;  // strictly increasing
};

/// Keeps ceil(N/ratio) points chosen uniformly without replacement.
/// Deterministic for a fixed seed.
inline SubsampleResult random_subsample(const PointCloud& cloud, std::uint64_t ratio,
                                        std::uint64_t seed) {
  if (ratio < 1) throw Error("random_subsample: ratio must be >= 1");
  const std::size_t n = cloud.size();
  const std::size_t keep = n == 0 ? 0 : (n + ratio - 1) / ratio;

  // Partial Fisher-Yates over the index array.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  SubsampleResult out;
  out.kept_indices.assign(idx.begin(), idx.begin() + keep);
  std::sort(out.kept_indices.begin(), out.kept_indices.end());

  const bool with_normals = cloud.has_normals();
  const bool with_labels = cloud.has_labels();
  out.cloud.points.reserve(keep);
  for (const std::size_t i : out.kept_indices) {
    out.cloud.points.push_back(cloud.points[i]);
    if (with_normals) out.cloud.normals.push_back(cloud.normals[i]);
    if (with_labels) out.cloud.labels.push_back(cloud.labels[i]);
  }
  return out;
}

/// Per-point normal from the covariance of the k-nearest neighborhood
/// (self included), oriented so that (orientation_ref - p) . n >= 0.
/// Rank-deficient neighborhoods (all points coincident) fall back to
/// (0,0,1) and set the corresponding degeneracy flag.
inline PointCloud estimate_normals(const PointCloud& cloud, std::size_t k,
                                   const Vec3& orientation_ref,
                                   std::vector<std::uint8_t>* degenerate = nullptr) {
  if (k < 3) throw Error("estimate_normals: k must be >= 3");
  if (cloud.size() < k) throw Error("estimate_normals: cloud smaller than k");
  const SpatialIndex index = SpatialIndex::build(cloud.points);
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Vec3(0, 0, 1));
  if (degenerate) degenerate->assign(cloud.size(), 0);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nbrs = index.knn(cloud.points[i], k);
    Vec3 mean = Vec3::Zero();
    for (const Neighbor& nb : nbrs) mean += cloud.points[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const Neighbor& nb : nbrs) {
      const Vec3 d = cloud.points[nb.index] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    if (eig.eigenvalues()(2) <= 1e-18) {  // all neighbors coincident
      if (degenerate) (*degenerate)[i] = 1;
      continue;
    }
    Vec3 n = eig.eigenvectors().col(0);  // smallest eigenvalue first
    n.normalize();
    if ((orientation_ref - cloud.points[i]).dot(n) < 0.0) n = -n;
    out.normals[i] = n;
  }
  return out;
}

/// Mean distance from each point to its nearest other point.
inline double mean_nn_spacing(const PointCloud& cloud) {
  if (cloud.size() < 2) throw Error("mean_nn_spacing: need at least 2 points");
  const SpatialIndex index = SpatialIndex::build(cloud.points);
  double sum = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    sum += index.knn(cloud.points[i], 2)[1].distance;
  return sum / static_cast<double>(cloud.size());
}

}  // namespace pcad
