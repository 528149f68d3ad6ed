// Test-side utilities and independent oracles. Nothing here may call into
// the implementation paths under test.
#pragma once

#include <Eigen/Geometry>
#include <cmath>
#include <random>
#include <vector>

#include "pcad/core/point_cloud.hpp"

namespace testutil {

using pcad::Mat3;
using pcad::PointCloud;
using pcad::Vec3;

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  return Vec3(uniform(rng, -scale, scale), uniform(rng, -scale, scale),
              uniform(rng, -scale, scale));
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  const Vec3 axis = random_vec(rng).normalized();
  const double angle = uniform(rng, 0.0, 3.14159265358979);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double scale = 10.0) {
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cloud.points.push_back(random_vec(rng, scale));
  return cloud;
}

/// Uniform sphere-surface cloud with analytic outward normals.
inline PointCloud sphere_cloud(std::mt19937_64& rng, std::size_t n, double radius) {
  PointCloud cloud;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    cloud.points.push_back(radius * dir);
    cloud.normals.push_back(dir);
  }
  return cloud;
}

struct BruteNeighbor {
  std::size_t index;
  double distance;
};

/// Brute-force k nearest rows, ascending by (distance, index).
inline std::vector<BruteNeighbor> brute_knn(const std::vector<std::vector<double>>& rows,
                                            const std::vector<double>& q, std::size_t k) {
  std::vector<BruteNeighbor> all;
  all.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double d = rows[i][j] - q[j];
      s += d * d;
    }
    all.push_back({i, std::sqrt(s)});
  }
  std::sort(all.begin(), all.end(), [](const BruteNeighbor& a, const BruteNeighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  all.resize(k);
  return all;
}

inline std::vector<BruteNeighbor> brute_radius(const std::vector<std::vector<double>>& rows,
                                               const std::vector<double>& q, double r) {
  std::vector<BruteNeighbor> hits;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double d = rows[i][j] - q[j];
      s += d * d;
    }
    const double dist = std::sqrt(s);
    if (dist <= r) hits.push_back({i, dist});
  }
  std::sort(hits.begin(), hits.end(), [](const BruteNeighbor& a, const BruteNeighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  return hits;
}

/// Pairwise-count AUROC oracle: P(s_pos > s_neg) + 0.5 P(equal).
inline double auroc_oracle(const std::vector<double>& scores,
                           const std::vector<std::uint8_t>& labels) {
  double wins = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++n_pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  for (const auto l : labels) n_neg += l ? 0 : 1;
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Threshold-sweep average-precision oracle: recounts precision and recall
/// from scratch at every distinct score value.
inline double aupr_oracle(const std::vector<double>& scores,
                          const std::vector<std::uint8_t>& labels) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::size_t total_pos = 0;
  for (const auto l : labels) total_pos += l;

  double ap = 0.0;
  double prev_recall = 0.0;
  for (const double thr : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= thr) {
        if (labels[i])
          ++tp;
        else
          ++fp;
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

}  // namespace testutil
