// Per-point descriptor sets bound to point indices of a source cloud.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

enum class FeatureKind : std::uint8_t { RawXyz = 0, Fpfh = 1, Contextual = 2, Concat = 3 };

inline std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::RawXyz: return "raw_xyz";
    case FeatureKind::Fpfh: return "fpfh";
    case FeatureKind::Contextual: return "contextual";
    case FeatureKind::Concat: return "concat";
  }
  return "?";
}

/// Extraction parameters, carried along so results are self-describing.
struct FeatureParams {
  double fpfh_radius = 0.0;
  double pooling_radius = 0.0;
  int normal_k = 0;
  std::vector<int> block_dims;       // concat only
  std::vector<double> block_scales;  // concat only
};

struct FeatureSet {
  Eigen::MatrixXd matrix;                   // N_feat x D
  std::vector<std::size_t> point_indices;   // into the source cloud
  FeatureKind kind = FeatureKind::RawXyz;
  FeatureParams params;
  std::vector<std::uint8_t> degenerate;     // per-row flag, may be empty

  std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix.cols()); }
};

/// Row i = coordinates of point i.
inline FeatureSet raw_features(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("raw_features: empty cloud");
  FeatureSet fs;
  fs.kind = FeatureKind::RawXyz;
  fs.matrix.resize(static_cast<Eigen::Index>(cloud.size()), 3);
  fs.point_indices.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    fs.matrix.row(static_cast<Eigen::Index>(i)) = cloud.points[i].transpose();
    fs.point_indices[i] = i;
  }
  return fs;
}

/// Rowwise concatenation [a*scale_a | b*scale_b]. Point indices must match.
inline FeatureSet concat_features(const FeatureSet& a, const FeatureSet& b, double scale_a = 1.0,
                                  double scale_b = 1.0) {
  if (a.point_indices != b.point_indices)
    throw Error("concat_features: point index mismatch between blocks");
  FeatureSet fs;
  fs.kind = FeatureKind::Concat;
  fs.point_indices = a.point_indices;
  fs.matrix.resize(a.matrix.rows(), a.matrix.cols() + b.matrix.cols());
  fs.matrix.leftCols(a.matrix.cols()) = a.matrix * scale_a;
  fs.matrix.rightCols(b.matrix.cols()) = b.matrix * scale_b;
  fs.params = a.params;
  fs.params.block_dims = {static_cast<int>(a.matrix.cols()), static_cast<int>(b.matrix.cols())};
  fs.params.block_scales = {scale_a, scale_b};
  return fs;
}

}  // namespace pcad
