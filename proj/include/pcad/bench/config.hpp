// Benchmark configuration: method registry and run parameters.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcad/common.hpp"
#include "pcad/registration/pipeline.hpp"

namespace pcad {

enum class MethodId : std::uint8_t {
  BtfRaw = 0,
  BtfFpfh = 1,
  PatchcoreFpfh = 2,
  PatchcoreFpfhRaw = 3,
  Reg3dAd = 4,
};

inline std::string to_string(MethodId m) {
  switch (m) {
    case MethodId::BtfRaw: return "btf_raw";
    case MethodId::BtfFpfh: return "btf_fpfh";
    case MethodId::PatchcoreFpfh: return "patchcore_fpfh";
    case MethodId::PatchcoreFpfhRaw: return "patchcore_fpfh_raw";
    case MethodId::Reg3dAd: return "reg3d_ad";
  }
  return "?";
}

inline MethodId method_from_string(const std::string& s) {
  if (s == "btf_raw") return MethodId::BtfRaw;
  if (s == "btf_fpfh") return MethodId::BtfFpfh;
  if (s == "patchcore_fpfh") return MethodId::PatchcoreFpfh;
  if (s == "patchcore_fpfh_raw") return MethodId::PatchcoreFpfhRaw;
  if (s == "reg3d_ad") return MethodId::Reg3dAd;
  throw Error("unknown method id: " + s);
}

inline const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> m = {MethodId::BtfRaw, MethodId::BtfFpfh,
                                          MethodId::PatchcoreFpfh, MethodId::PatchcoreFpfhRaw,
                                          MethodId::Reg3dAd};
  return m;
}

struct MethodParams {
  std::size_t bank_size = 10000;
  std::uint64_t train_ratio = 100;  // training subsample, N:1
  std::uint64_t test_ratio = 500;   // test subsample, N:1
  int score_b = 3;                  // re-weight neighborhood size
  int normal_k = 16;
  double fpfh_radius_factor = 5.0;      // x mean nn spacing of the subsampled cloud
  double pooling_radius_factor = 4.0;   // x fpfh radius
  double raw_block_scale = 1.0;         // extra weight on the raw block of fpfh+raw
  std::size_t propagate_k = 3;
  bool standardize_dual = false;
  RegistrationPipelineParams registration;
};

struct BenchConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path out_dir;
  std::vector<MethodId> methods = all_methods();
  std::uint64_t seed = 0;
  int parallelism = 1;
  MethodParams params;
  nlohmann::json method_overrides;  // optional per-method parameter objects
};

inline MethodParams merge_method_params(const MethodParams& base, const nlohmann::json& j) {
  MethodParams p = base;
  if (j.is_null()) return p;
  p.bank_size = j.value("bank_size", p.bank_size);
  p.train_ratio = j.value("train_ratio", p.train_ratio);
  p.test_ratio = j.value("test_ratio", p.test_ratio);
  p.score_b = j.value("b", p.score_b);
  p.normal_k = j.value("normal_k", p.normal_k);
  p.fpfh_radius_factor = j.value("fpfh_radius_factor", p.fpfh_radius_factor);
  p.pooling_radius_factor = j.value("pooling_radius_factor", p.pooling_radius_factor);
  p.raw_block_scale = j.value("raw_block_scale", p.raw_block_scale);
  p.propagate_k = j.value("propagate_k", p.propagate_k);
  p.standardize_dual = j.value("standardize_dual", p.standardize_dual);
  if (j.contains("registration")) {
    const auto& jr = j.at("registration");
    p.registration.voxel_size = jr.value("voxel_size", p.registration.voxel_size);
    p.registration.normal_k = jr.value("normal_k", p.registration.normal_k);
    p.registration.fpfh_radius_factor =
        jr.value("fpfh_radius_factor", p.registration.fpfh_radius_factor);
    p.registration.icp_enabled = jr.value("icp_enabled", p.registration.icp_enabled);
    p.registration.icp_corr_factor = jr.value("icp_corr_factor", p.registration.icp_corr_factor);
    p.registration.icp_max_iters = jr.value("icp_max_iters", p.registration.icp_max_iters);
    p.registration.fitness_floor = jr.value("fitness_floor", p.registration.fitness_floor);
    p.registration.ransac.max_iterations =
        jr.value("ransac_max_iterations", p.registration.ransac.max_iterations);
    p.registration.ransac.inlier_threshold =
        jr.value("ransac_inlier_threshold", p.registration.ransac.inlier_threshold);
    p.registration.ransac.mutual_filter =
        jr.value("ransac_mutual_filter", p.registration.ransac.mutual_filter);
    p.registration.ransac.edge_length_check_ratio =
        jr.value("ransac_edge_length_ratio", p.registration.ransac.edge_length_check_ratio);
    p.registration.ransac.confidence = jr.value("ransac_confidence", p.registration.ransac.confidence);
    p.registration.ransac.n_sample_correspondences =
        jr.value("ransac_n_samples", p.registration.ransac.n_sample_correspondences);
  }
  return p;
}

/// Parameters for a method = global "params" block overlaid with the
/// method's entry in "method_params", if any.
inline MethodParams params_for_method(const BenchConfig& cfg, MethodId method) {
  if (cfg.method_overrides.contains(to_string(method)))
    return merge_method_params(cfg.params, cfg.method_overrides.at(to_string(method)));
  return cfg.params;
}

inline BenchConfig load_bench_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_bench_config: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  BenchConfig cfg;
  if (j.contains("dataset_root")) cfg.dataset_root = j.at("dataset_root").get<std::string>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  cfg.seed = j.value("seed", 0ULL);
  cfg.parallelism = j.value("parallelism", 1);
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& jm : j.at("methods")) cfg.methods.push_back(method_from_string(jm));
  }
  if (j.contains("params")) cfg.params = merge_method_params(MethodParams{}, j.at("params"));
  if (j.contains("method_params")) cfg.method_overrides = j.at("method_params");
  return cfg;
}

inline nlohmann::json method_params_to_json(const MethodParams& p) {
  nlohmann::json j;
  j["bank_size"] = p.bank_size;
  j["train_ratio"] = p.train_ratio;
  j["test_ratio"] = p.test_ratio;
  j["b"] = p.score_b;
  j["normal_k"] = p.normal_k;
  j["fpfh_radius_factor"] = p.fpfh_radius_factor;
  j["pooling_radius_factor"] = p.pooling_radius_factor;
  j["raw_block_scale"] = p.raw_block_scale;
  j["propagate_k"] = p.propagate_k;
  j["standardize_dual"] = p.standardize_dual;
  j["registration"] = {
      {"voxel_size", p.registration.voxel_size},
      {"normal_k", p.registration.normal_k},
      {"fpfh_radius_factor", p.registration.fpfh_radius_factor},
      {"icp_enabled", p.registration.icp_enabled},
      {"icp_corr_factor", p.registration.icp_corr_factor},
      {"icp_max_iters", p.registration.icp_max_iters},
      {"fitness_floor", p.registration.fitness_floor},
      {"ransac_max_iterations", p.registration.ransac.max_iterations},
      {"ransac_inlier_threshold", p.registration.ransac.inlier_threshold},
      {"ransac_mutual_filter", p.registration.ransac.mutual_filter},
      {"ransac_edge_length_ratio", p.registration.ransac.edge_length_check_ratio},
      {"ransac_confidence", p.registration.ransac.confidence},
      {"ransac_n_samples", p.registration.ransac.n_sample_correspondences},
  };
  return j;
}

}  // namespace pcad
