// End-to-end alignment of a one-side test scan against a full prototype:
// voxel downsample -> normals -> FPFH -> RANSAC -> ICP, then the final
// transform is applied to the full-resolution test cloud.
#pragma once

#include <cstdint>
#include <vector>

#include "pcad/core/cloud_ops.hpp"
#include "pcad/features/fpfh.hpp"
#include "pcad/registration/icp.hpp"
#include "pcad/registration/ransac.hpp"

namespace pcad {

struct RegistrationPipelineParams {
  double voxel_size = 0.0;          // 0 = auto: prototype bbox diagonal / 60
  int normal_k = 16;
  double fpfh_radius_factor = 5.0;  // x mean nn spacing of the downsampled prototype
  RansacParams ransac;              // inlier_threshold 0 = auto: 1.5x voxel
  bool icp_enabled = true;
  double icp_corr_factor = 3.0;     // x voxel
  int icp_max_iters = 50;
  double fitness_floor = 0.2;
};

struct AlignmentResult {
  PointCloud aligned;        // untransformed input when registration failed
  RegistrationResult reg;
  bool registered = false;   // false when fitness fell below the floor
  double voxel_size = 0.0;
  std::size_t prototype_index = 0;  // filled by register_to_best_prototype
};

inline AlignmentResult register_to_prototype(const PointCloud& test_cloud,
                                             const PointCloud& prototype_cloud,
                                             const RegistrationPipelineParams& params) {
  AlignmentResult out;
  const double diag = bounding_box(prototype_cloud).diagonal();
  const double voxel = params.voxel_size > 0.0 ? params.voxel_size : diag / 60.0;
  out.voxel_size = voxel;

  PointCloud down_test = voxel_downsample(test_cloud, voxel).cloud;
  PointCloud down_proto = voxel_downsample(prototype_cloud, voxel).cloud;
  down_test.labels.clear();

  // Scanner-provided normals (voxel-averaged) keep one orientation
  // convention across the partial scan and the full prototype; estimation
  // with a bbox-center reference is the fallback for bare clouds.
  const std::size_t k = static_cast<std::size_t>(params.normal_k);
  if (!down_test.has_normals())
    down_test = estimate_normals(down_test, k, bounding_box(down_test).center());
  if (!down_proto.has_normals())
    down_proto = estimate_normals(down_proto, k, bounding_box(down_proto).center());

  const double radius = params.fpfh_radius_factor * mean_nn_spacing(down_proto);
  const FeatureSet feat_test = fpfh(down_test, radius);
  const FeatureSet feat_proto = fpfh(down_proto, radius);

  RansacParams rp = params.ransac;
  if (!(rp.inlier_threshold > 0.0)) rp.inlier_threshold = 1.5 * voxel;
  RegistrationResult reg = ransac_register(down_test, down_proto, feat_test, feat_proto, rp);

  if (params.icp_enabled && reg.fitness > 0.0) {
    const RegistrationResult refined =
        icp_refine(down_test, down_proto, reg.transform, params.icp_corr_factor * voxel,
                   params.icp_max_iters);
    reg.transform = refined.transform;
    reg.fitness = refined.fitness;
    reg.inlier_rmse = refined.inlier_rmse;
    reg.iterations_used += refined.iterations_used;
  }

  out.reg = reg;
  out.registered = reg.fitness >= params.fitness_floor;
  out.aligned = out.registered ? apply_transform(test_cloud, reg.transform) : test_cloud;
  return out;
}

/// Registers against each prototype and keeps the highest fitness
/// (ties: first prototype).
inline AlignmentResult register_to_best_prototype(const PointCloud& test_cloud,
                                                  const std::vector<PointCloud>& prototypes,
                                                  const RegistrationPipelineParams& params) {
  if (prototypes.empty()) throw Error("register_to_best_prototype: no prototypes");
  AlignmentResult best;
  bool first = true;
  for (std::size_t i = 0; i < prototypes.size(); ++i) {
    AlignmentResult r = register_to_prototype(test_cloud, prototypes[i], params);
    r.prototype_index = i;
    if (first || r.reg.fitness > best.reg.fitness) {
      best = std::move(r);
      first = false;
    }
  }
  return best;
}

}  // namespace pcad
