// Method recipes. Every method scores a subsampled test cloud against a
// memory bank built from the category's prototypes, then propagates the
// sampled scores to full resolution:
//
//   btf_raw            raw xyz features, plain NN distance, no registration
//   btf_fpfh           FPFH features, plain NN distance
//   patchcore_fpfh     FPFH features, coreset bank, re-weighted scores
//   patchcore_fpfh_raw FPFH+xyz concatenation, coreset bank, re-weighted
//   reg3d_ad           registration to the best prototype, dual banks
//                      (raw xyz local + pooled-FPFH global), averaged
#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "pcad/bank/memory_bank.hpp"
#include "pcad/bench/config.hpp"
#include "pcad/core/cloud_ops.hpp"
#include "pcad/features/fpfh.hpp"
#include "pcad/io/dataset.hpp"
#include "pcad/io/labels.hpp"
#include "pcad/io/ply.hpp"
#include "pcad/metrics/evaluate.hpp"
#include "pcad/registration/pipeline.hpp"

namespace pcad {

struct CategoryData {
  std::string name;
  std::vector<std::string> prototype_names;
  std::vector<PointCloud> prototypes;
  std::vector<std::string> test_names;
  std::vector<PointCloud> test_clouds;
  std::vector<std::vector<std::uint8_t>> test_labels;  // full resolution
  std::vector<bool> abnormal;
};

inline CategoryData load_category(const CategoryEntry& entry) {
  CategoryData data;
  data.name = entry.name;
  for (const auto& p : entry.train_paths) {
    data.prototype_names.push_back(p.stem().string());
    data.prototypes.push_back(read_ply(p));
  }
  for (std::size_t i = 0; i < entry.test_paths.size(); ++i) {
    PointCloud cloud = read_ply(entry.test_paths[i]);
    data.test_names.push_back(entry.test_paths[i].stem().string());
    data.abnormal.push_back(entry.is_abnormal(i));
    if (entry.is_abnormal(i)) {
      data.test_labels.push_back(read_labels_txt(entry.gt_paths[i], cloud.size(), &cloud));
    } else {
      data.test_labels.push_back(std::vector<std::uint8_t>(cloud.size(), 0));
    }
    cloud.labels.clear();  // methods never see ground truth
    data.test_clouds.push_back(std::move(cloud));
  }
  return data;
}

struct SampleResult {
  std::string name;
  double object_score = 0.0;
  std::vector<double> full_scores;  // one per full-resolution point
  bool registration_failed = false;
  double wall_seconds = 0.0;
};

namespace detail {

struct TrainedFeatureExtractor {
  FeatureKind kind = FeatureKind::RawXyz;
  double fpfh_radius = 0.0;
  double pooling_radius = 0.0;
  int normal_k = 16;
  double raw_block_scale = 1.0;

  // Scanner-provided normals are kept as-is; estimation is the fallback.
  PointCloud with_normals(const PointCloud& cloud) const {
    if (cloud.has_normals()) return cloud;
    return estimate_normals(cloud, static_cast<std::size_t>(normal_k),
                            bounding_box(cloud).center());
  }

  FeatureSet extract(const PointCloud& cloud) const {
    switch (kind) {
      case FeatureKind::RawXyz:
        return raw_features(cloud);
      case FeatureKind::Fpfh:
        return fpfh(with_normals(cloud), fpfh_radius);
      case FeatureKind::Contextual: {
        const PointCloud c = with_normals(cloud);
        return contextual_features(c, fpfh(c, fpfh_radius), pooling_radius);
      }
      case FeatureKind::Concat:
        return concat_features(fpfh(with_normals(cloud), fpfh_radius), raw_features(cloud), 1.0,
                               raw_block_scale);
    }
    throw Error("extract: unreachable");
  }
};

/// Subsamples each prototype and freezes one scale-adaptive FPFH radius
/// across all of them.
inline std::vector<PointCloud> subsample_prototypes(const CategoryData& cat,
                                                    const MethodParams& params,
                                                    std::uint64_t seed) {
  std::vector<PointCloud> out;
  for (std::size_t p = 0; p < cat.prototypes.size(); ++p)
    out.push_back(random_subsample(cat.prototypes[p], params.train_ratio,
                                   derive_seed(seed, "train/" + cat.prototype_names[p]))
                      .cloud);
  return out;
}

inline double frozen_fpfh_radius(const std::vector<PointCloud>& subsampled, double factor) {
  double spacing = 0.0;
  for (const PointCloud& c : subsampled) spacing += mean_nn_spacing(c);
  return factor * spacing / static_cast<double>(subsampled.size());
}

inline MemoryBank bank_from_prototypes(const std::vector<PointCloud>& subsampled,
                                       const CategoryData& cat,
                                       const TrainedFeatureExtractor& extractor,
                                       std::size_t bank_size, std::uint64_t seed) {
  std::vector<FeatureSet> sets;
  sets.reserve(subsampled.size());
  for (const PointCloud& c : subsampled) sets.push_back(extractor.extract(c));
  MemoryBank bank = build_bank(sets, bank_size, seed);
  bank.sources = cat.prototype_names;
  bank.feature_params.fpfh_radius = extractor.fpfh_radius;
  bank.feature_params.pooling_radius = extractor.pooling_radius;
  bank.feature_params.normal_k = extractor.normal_k;
  return bank;
}

}  // namespace detail

/// Runs one method over one category. Deterministic per seed; per-sample
/// wall times recorded. A failed registration is flagged and the sample is
/// scored on the unregistered cloud.
inline std::vector<SampleResult> run_method(MethodId method, const CategoryData& cat,
                                            const MethodParams& params, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  detail::TrainedFeatureExtractor extractor;
  extractor.normal_k = params.normal_k;
  extractor.raw_block_scale = params.raw_block_scale;

  const std::vector<PointCloud> subsampled = detail::subsample_prototypes(cat, params, seed);

  ScoreParams score_params;
  score_params.b = params.score_b;

  // Per-method training: banks plus frozen extraction parameters.
  MemoryBank bank;         // single-channel methods
  MemoryBank local_bank;   // reg3d_ad
  MemoryBank global_bank;  // reg3d_ad
  switch (method) {
    case MethodId::BtfRaw:
      extractor.kind = FeatureKind::RawXyz;
      score_params.reweight = false;
      bank = detail::bank_from_prototypes(subsampled, cat, extractor, params.bank_size,
                                          derive_seed(seed, "bank"));
      break;
    case MethodId::BtfFpfh:
      extractor.kind = FeatureKind::Fpfh;
      extractor.fpfh_radius = detail::frozen_fpfh_radius(subsampled, params.fpfh_radius_factor);
      score_params.reweight = false;
      bank = detail::bank_from_prototypes(subsampled, cat, extractor, params.bank_size,
                                          derive_seed(seed, "bank"));
      break;
    case MethodId::PatchcoreFpfh:
      extractor.kind = FeatureKind::Fpfh;
      extractor.fpfh_radius = detail::frozen_fpfh_radius(subsampled, params.fpfh_radius_factor);
      score_params.reweight = true;
      bank = detail::bank_from_prototypes(subsampled, cat, extractor, params.bank_size,
                                          derive_seed(seed, "bank"));
      break;
    case MethodId::PatchcoreFpfhRaw:
      extractor.kind = FeatureKind::Concat;
      extractor.fpfh_radius = detail::frozen_fpfh_radius(subsampled, params.fpfh_radius_factor);
      score_params.reweight = true;
      bank = detail::bank_from_prototypes(subsampled, cat, extractor, params.bank_size,
                                          derive_seed(seed, "bank"));
      break;
    case MethodId::Reg3dAd: {
      extractor.kind = FeatureKind::RawXyz;
      score_params.reweight = true;
      local_bank = detail::bank_from_prototypes(subsampled, cat, extractor, params.bank_size,
                                                derive_seed(seed, "bank/local"));
      detail::TrainedFeatureExtractor global_extractor = extractor;
      global_extractor.kind = FeatureKind::Contextual;
      global_extractor.fpfh_radius =
          detail::frozen_fpfh_radius(subsampled, params.fpfh_radius_factor);
      global_extractor.pooling_radius =
          params.pooling_radius_factor * global_extractor.fpfh_radius;
      global_bank = detail::bank_from_prototypes(subsampled, cat, global_extractor,
                                                 params.bank_size, derive_seed(seed, "bank/global"));
      break;
    }
  }

  std::vector<SampleResult> results;
  results.reserve(cat.test_clouds.size());
  for (std::size_t t = 0; t < cat.test_clouds.size(); ++t) {
    const auto t0 = Clock::now();
    const std::uint64_t sample_seed = derive_seed(seed, "test/" + cat.test_names[t]);
    SampleResult res;
    res.name = cat.test_names[t];

    if (method == MethodId::Reg3dAd) {
      RegistrationPipelineParams reg = params.registration;
      reg.ransac.seed = derive_seed(sample_seed, "ransac");
      const AlignmentResult aligned =
          register_to_best_prototype(cat.test_clouds[t], cat.prototypes, reg);
      res.registration_failed = !aligned.registered;

      const SubsampleResult sub =
          random_subsample(aligned.aligned, params.test_ratio, derive_seed(sample_seed, "sub"));
      detail::TrainedFeatureExtractor local_ex = extractor;
      detail::TrainedFeatureExtractor global_ex = extractor;
      global_ex.kind = FeatureKind::Contextual;
      global_ex.fpfh_radius = global_bank.feature_params.fpfh_radius;
      global_ex.pooling_radius = global_bank.feature_params.pooling_radius;

      const std::vector<double> local_scores =
          point_scores(local_bank, local_ex.extract(sub.cloud), score_params);
      const std::vector<double> global_scores =
          point_scores(global_bank, global_ex.extract(sub.cloud), score_params);

      ScoreVector local_sv{sub.kept_indices, local_scores, object_score(local_scores)};
      ScoreVector global_sv{sub.kept_indices, global_scores, object_score(global_scores)};
      if (params.standardize_dual) {
        local_sv = standardize_scores(local_sv);
        global_sv = standardize_scores(global_sv);
      }
      const ScoreVector combined = combine_dual(local_sv, global_sv);

      const std::vector<double> full_local = propagate_scores(
          sub.cloud.points, local_sv.scores, aligned.aligned, params.propagate_k);
      const std::vector<double> full_global = propagate_scores(
          sub.cloud.points, global_sv.scores, aligned.aligned, params.propagate_k);
      res.full_scores.resize(full_local.size());
      for (std::size_t i = 0; i < full_local.size(); ++i)
        res.full_scores[i] = 0.5 * (full_local[i] + full_global[i]);
      res.object_score = combined.object;
    } else {
      const SubsampleResult sub = random_subsample(cat.test_clouds[t], params.test_ratio,
                                                   derive_seed(sample_seed, "sub"));
      const FeatureSet feats = extractor.extract(sub.cloud);
      const std::vector<double> scores = point_scores(bank, feats, score_params);
      res.object_score = object_score(scores);
      res.full_scores =
          propagate_scores(sub.cloud.points, scores, cat.test_clouds[t], params.propagate_k);
    }
    res.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace pcad
