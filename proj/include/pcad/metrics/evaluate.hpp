// Score propagation to full resolution and per-category evaluation.
#pragma once

#include <cstdint>
#include <vector>

#include "pcad/core/point_cloud.hpp"
#include "pcad/metrics/ranking.hpp"
#include "pcad/spatial/index.hpp"

namespace pcad {

/// Inverse-distance-weighted k-NN interpolation of sampled scores onto the
/// full-resolution cloud. A point coinciding with a sampled point
/// (distance < 1e-12) takes that score exactly.
inline std::vector<double> propagate_scores(const std::vector<Vec3>& sampled_points,
                                            const std::vector<double>& sampled_scores,
                                            const PointCloud& full_cloud, std::size_t k = 3) {
  if (sampled_points.empty()) throw Error("propagate_scores: empty sampled set");
  if (sampled_points.size() != sampled_scores.size())
    throw Error("propagate_scores: points/scores length mismatch");
  if (k < 1) throw Error("propagate_scores: k must be >= 1");
  const std::size_t kk = std::min(k, sampled_points.size());
  const SpatialIndex index = SpatialIndex::build(sampled_points);

  std::vector<double> out(full_cloud.size());
  for (std::size_t i = 0; i < full_cloud.size(); ++i) {
    const auto nbrs = index.knn(full_cloud.points[i], kk);
    if (nbrs[0].distance < 1e-12) {
      out[i] = sampled_scores[nbrs[0].index];
      continue;
    }
    double wsum = 0.0, acc = 0.0;
    for (const Neighbor& nb : nbrs) {
      const double w = 1.0 / nb.distance;
      wsum += w;
      acc += w * sampled_scores[nb.index];
    }
    out[i] = acc / wsum;
  }
  return out;
}

struct CategoryMetrics {
  double o_auroc = 0.0;
  double o_aupr = 0.0;
  double p_auroc = 0.0;
  double p_aupr = 0.0;
};

/// Object-level metrics over per-sample scores/labels; point-level metrics
/// over per-point scores pooled across all the category's test samples
/// (normal samples contribute all-negative points). With
/// `per_sample_average`, point metrics are instead averaged over the
/// samples that contain both classes.
inline CategoryMetrics evaluate_category(const std::vector<double>& object_scores,
                                         const std::vector<std::uint8_t>& object_labels,
                                         const std::vector<std::vector<double>>& point_scores,
                                         const std::vector<std::vector<std::uint8_t>>& point_labels,
                                         bool per_sample_average = false) {
  if (point_scores.size() != point_labels.size())
    throw MetricError("evaluate_category: per-sample score/label list mismatch");
  CategoryMetrics m;
  m.o_auroc = auroc(object_scores, object_labels);
  m.o_aupr = aupr(object_scores, object_labels);

  if (per_sample_average) {
    double sum_auroc = 0.0, sum_aupr = 0.0;
    std::size_t used = 0;
    for (std::size_t s = 0; s < point_scores.size(); ++s) {
      std::size_t pos = 0;
      for (const std::uint8_t l : point_labels[s]) pos += l;
      if (pos == 0 || pos == point_labels[s].size()) continue;
      sum_auroc += auroc(point_scores[s], point_labels[s]);
      sum_aupr += aupr(point_scores[s], point_labels[s]);
      ++used;
    }
    if (used == 0) throw MetricError("evaluate_category: no sample with both classes");
    m.p_auroc = sum_auroc / static_cast<double>(used);
    m.p_aupr = sum_aupr / static_cast<double>(used);
    return m;
  }

  std::vector<double> pooled_scores;
  std::vector<std::uint8_t> pooled_labels;
  for (std::size_t s = 0; s < point_scores.size(); ++s) {
    if (point_scores[s].size() != point_labels[s].size())
      throw MetricError("evaluate_category: sample score/label length mismatch");
    pooled_scores.insert(pooled_scores.end(), point_scores[s].begin(), point_scores[s].end());
    pooled_labels.insert(pooled_labels.end(), point_labels[s].begin(), point_labels[s].end());
  }
  m.p_auroc = auroc(pooled_scores, pooled_labels);
  m.p_aupr = aupr(pooled_scores, pooled_labels);
  return m;
}

}  // namespace pcad
