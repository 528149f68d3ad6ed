// Fast Point Feature Histograms (33-dim) and the pooled contextual
// descriptor built on top of them.
//
// Pass 1 computes a Simplified PFH per point: for every neighbor within the
// radius, the Darboux-frame angles
//   alpha = v . n_t
//   phi   = u . (p_t - p_s) / ||p_t - p_s||
//   theta = atan2(w . n_t, u . n_t)
// with u = n_s, v = (p_t - p_s) x u normalized, w = u x v, and the source
// point chosen as the one whose normal makes the smaller angle with the
// displacement. Each angle is binned into 11 bins over its range and each
// 11-bin block normalized to sum 100.
//
// Pass 2 blends each point's SPFH with its neighbors', inverse-distance
// weighted, and renormalizes per block:
//   FPFH(p) = SPFH(p) + (1/k) * sum_i SPFH(p_i) / ||p - p_i||
#pragma once

#include <cmath>
#include <vector>

#include "pcad/features/feature_set.hpp"
#include "pcad/spatial/index.hpp"

namespace pcad {

namespace detail {

constexpr int kFpfhBins = 11;
constexpr int kFpfhDim = 3 * kFpfhBins;
constexpr double kPi = 3.141592653589793238462643383279502884;

inline int fpfh_bin(double value, double lo, double hi) {
  int bin = static_cast<int>((value - lo) / (hi - lo) * kFpfhBins);
  if (bin < 0) bin = 0;
  if (bin >= kFpfhBins) bin = kFpfhBins - 1;
  return bin;
}

inline void normalize_blocks_to_100(Eigen::VectorXd& h) {
  for (int b = 0; b < 3; ++b) {
    const double sum = h.segment(b * kFpfhBins, kFpfhBins).sum();
    if (sum > 0.0) h.segment(b * kFpfhBins, kFpfhBins) *= 100.0 / sum;
  }
}

}  // namespace detail

/// Standard two-pass FPFH. Requires unit normals; a point with no neighbor
/// inside the radius gets a zero descriptor and a degeneracy flag.
inline FeatureSet fpfh(const PointCloud& cloud, double radius) {
  using namespace detail;
  if (!(radius > 0.0)) throw Error("fpfh: radius must be positive");
  if (!cloud.has_normals()) throw Error("fpfh: cloud has no normals");
  validate(cloud);

  const std::size_t n = cloud.size();
  const SpatialIndex index = SpatialIndex::build(cloud.points);

  std::vector<std::vector<Neighbor>> hoods(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto nbrs = index.radius_search(cloud.points[i], radius);
    std::vector<Neighbor> others;
    others.reserve(nbrs.size());
    for (const Neighbor& nb : nbrs) {
      if (nb.index != i) others.push_back(nb);
    }
    hoods[i] = std::move(others);
  }

  // Pass 1: SPFH per point.
  Eigen::MatrixXd spfh = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), kFpfhDim);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(kFpfhDim);
    for (const Neighbor& nb : hoods[i]) {
      const std::size_t j = nb.index;
      Vec3 ps = cloud.points[i], pt = cloud.points[j];
      Vec3 ns = cloud.normals[i], nt = cloud.normals[j];
      Vec3 d = pt - ps;
      const double dist = d.norm();
      if (dist < 1e-15) continue;
      const Vec3 dn = d / dist;
      // Source is the endpoint whose normal is closer to the displacement.
      if (nt.dot(-dn) > ns.dot(dn)) {
        std::swap(ps, pt);
        std::swap(ns, nt);
        d = -d;
      }
      const Vec3 u = ns;
      Vec3 v = d.cross(u);
      const double vnorm = v.norm();
      if (vnorm < 1e-12 * dist) continue;  // displacement parallel to normal
      v /= vnorm;
      const Vec3 w = u.cross(v);
      const double alpha = v.dot(nt);
      const double phi = u.dot(d) / dist;
      const double theta = std::atan2(w.dot(nt), u.dot(nt));
      hist[fpfh_bin(alpha, -1.0, 1.0)] += 1.0;
      hist[kFpfhBins + fpfh_bin(phi, -1.0, 1.0)] += 1.0;
      hist[2 * kFpfhBins + fpfh_bin(theta, -kPi, kPi)] += 1.0;
    }
    normalize_blocks_to_100(hist);
    spfh.row(static_cast<Eigen::Index>(i)) = hist.transpose();
  }

  // Pass 2: inverse-distance weighted neighbor blend, renormalized.
  FeatureSet fs;
  fs.kind = FeatureKind::Fpfh;
  fs.params.fpfh_radius = radius;
  fs.matrix.resize(static_cast<Eigen::Index>(n), kFpfhDim);
  fs.point_indices.resize(n);
  fs.degenerate.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    fs.point_indices[i] = i;
    if (hoods[i].empty()) {
      fs.matrix.row(static_cast<Eigen::Index>(i)).setZero();
      fs.degenerate[i] = 1;
      continue;
    }
    Eigen::VectorXd h = spfh.row(static_cast<Eigen::Index>(i)).transpose();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(kFpfhDim);
    for (const Neighbor& nb : hoods[i])
      acc += spfh.row(static_cast<Eigen::Index>(nb.index)).transpose() / nb.distance;
    h += acc / static_cast<double>(hoods[i].size());
    normalize_blocks_to_100(h);
    fs.matrix.row(static_cast<Eigen::Index>(i)) = h.transpose();
  }
  return fs;
}

/// Mean of FPFH rows over the pooling-radius neighborhood of each point
/// (self always included): a coarse context descriptor that plays the
/// global-feature role in the dual-bank pipeline.
inline FeatureSet contextual_features(const PointCloud& cloud, const FeatureSet& fpfh_set,
                                      double pooling_radius) {
  if (fpfh_set.kind != FeatureKind::Fpfh)
    throw Error("contextual_features: input must be an fpfh set");
  if (fpfh_set.rows() != cloud.size())
    throw Error("contextual_features: fpfh set is not aligned with the cloud");
  if (!(pooling_radius > 0.0)) throw Error("contextual_features: pooling radius must be positive");

  const std::size_t n = cloud.size();
  const SpatialIndex index = SpatialIndex::build(cloud.points);
  FeatureSet fs;
  fs.kind = FeatureKind::Contextual;
  fs.params = fpfh_set.params;
  fs.params.pooling_radius = pooling_radius;
  fs.point_indices = fpfh_set.point_indices;
  fs.matrix.resize(fpfh_set.matrix.rows(), fpfh_set.matrix.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = index.radius_search(cloud.points[i], pooling_radius);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(fpfh_set.matrix.cols());
    for (const Neighbor& nb : nbrs) mean += fpfh_set.matrix.row(static_cast<Eigen::Index>(nb.index));
    mean /= static_cast<double>(nbrs.size());
    fs.matrix.row(static_cast<Eigen::Index>(i)) = mean.transpose();
  }
  return fs;
}

}  // namespace pcad
