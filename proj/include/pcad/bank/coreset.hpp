// Greedy k-center (farthest-point-first) coreset selection.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "pcad/common.hpp"

namespace pcad {

/// Selects m row indices: the first is seed-chosen, each subsequent one
/// maximizes the distance to the already-selected set (ties toward the
/// lower index). With projection_dim > 0, distances are computed in a
/// seeded Gaussian random projection; the returned indices always refer to
/// the original rows. Deterministic for a fixed seed.
inline std::vector<std::size_t> greedy_coreset(const Eigen::MatrixXd& features, std::size_t m,
                                               std::uint64_t seed, int projection_dim = 0) {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw Error("greedy_coreset: empty feature matrix");
  if (m < 1 || m > n) throw Error("greedy_coreset: target size out of range [1, N]");

  Rng rng(seed);
  Eigen::MatrixXd work;
  if (projection_dim > 0 && projection_dim < features.cols()) {
    Eigen::MatrixXd proj(features.cols(), projection_dim);
    for (Eigen::Index i = 0; i < proj.rows(); ++i)
      for (Eigen::Index j = 0; j < proj.cols(); ++j)
        proj(i, j) = rng.next_gaussian() / std::sqrt(static_cast<double>(projection_dim));
    work = features * proj;
  } else {
    work = features;
  }

  std::vector<std::size_t> selected;
  selected.reserve(m);
  const std::size_t first = static_cast<std::size_t>(rng.next_below(n));
  selected.push_back(first);

  std::vector<double> min_d2(n);
  for (std::size_t i = 0; i < n; ++i)
    min_d2[i] = (work.row(static_cast<Eigen::Index>(i)) - work.row(static_cast<Eigen::Index>(first)))
                    .squaredNorm();

  while (selected.size() < m) {
    std::size_t far = 0;
    double far_d2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_d2[i] > far_d2) {
        far_d2 = min_d2[i];
        far = i;
      }
    }
    selected.push_back(far);
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 =
          (work.row(static_cast<Eigen::Index>(i)) - work.row(static_cast<Eigen::Index>(far)))
              .squaredNorm();
      if (d2 < min_d2[i]) min_d2[i] = d2;
    }
  }
  return selected;
}

/// Max distance of any row to its nearest selected row (the k-center
/// objective the greedy rule approximates within factor 2).
inline double coreset_coverage_radius(const Eigen::MatrixXd& features,
                                      const std::vector<std::size_t>& selected) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const std::size_t s : selected) {
      const double d = (features.row(i) - features.row(static_cast<Eigen::Index>(s))).norm();
      if (d < best) best = d;
    }
    if (best > worst) worst = best;
  }
  return worst;
}

}  // namespace pcad
