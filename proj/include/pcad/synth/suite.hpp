// Synthetic benchmark suite generation: per category, 4 full prototypes,
// one-side normal scans, and defect-injected one-side scans with ground
// truth. Fully deterministic per master seed; regeneration is byte-exact.
#pragma once

#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcad/core/cloud_ops.hpp"
#include "pcad/io/dataset.hpp"
#include "pcad/io/ply.hpp"
#include "pcad/synth/defect.hpp"
#include "pcad/synth/scan.hpp"
#include "pcad/synth/shapes.hpp"

namespace pcad {

struct DefectDistribution {
  double redundancy_weight = 0.7;
  double incompleteness_weight = 0.3;
  double target_ratio_min = 0.02;   // achieved anomaly ratio band
  double target_ratio_max = 0.05;
  double magnitude_mm = 1.0;        // redundancy displacement at the center
  double rim_band_frac = 0.25;
};

struct SuiteCategoryConfig {
  std::string name;
  ShapeSpec shape;
  int n_normal = 10;
  int n_abnormal = 10;
  double noise_sigma_mm = 0.011;
  double scan_threshold_deg = 80.0;
  double pose_translation_frac = 0.5;  // x bbox diagonal
  double view_jitter_deg = 15.0;       // abnormal scans aim roughly at the defect
  DefectDistribution defect;
};

struct SuiteConfig {
  std::uint64_t master_seed = 0;
  std::vector<SuiteCategoryConfig> categories;
};

// --- JSON (de)serialization -------------------------------------------------

inline ShapeSpec shape_spec_from_json(const nlohmann::json& j) {
  ShapeSpec s;
  s.family = shape_family_from_string(j.at("family").get<std::string>());
  s.radius = j.value("radius", s.radius);
  s.ring_radius = j.value("ring_radius", s.ring_radius);
  s.tube_radius = j.value("tube_radius", s.tube_radius);
  if (j.contains("half_extents")) {
    const auto& he = j.at("half_extents");
    s.half_extents = Vec3(he.at(0).get<double>(), he.at(1).get<double>(), he.at(2).get<double>());
  }
  s.exponent = j.value("exponent", s.exponent);
  s.cap_height = j.value("cap_height", s.cap_height);
  s.second_radius = j.value("second_radius", s.second_radius);
  if (j.contains("second_center")) {
    const auto& sc = j.at("second_center");
    s.second_center = Vec3(sc.at(0).get<double>(), sc.at(1).get<double>(), sc.at(2).get<double>());
  }
  s.blend_sharpness = j.value("blend_sharpness", s.blend_sharpness);
  s.count = j.value("count", s.count);
  return s;
}

inline SuiteConfig suite_config_from_json(const nlohmann::json& j) {
  SuiteConfig cfg;
  cfg.master_seed = j.value("master_seed", 0ULL);
  for (const auto& jc : j.at("categories")) {
    SuiteCategoryConfig c;
    c.name = jc.at("name").get<std::string>();
    c.shape = shape_spec_from_json(jc.at("shape"));
    c.n_normal = jc.value("n_normal", c.n_normal);
    c.n_abnormal = jc.value("n_abnormal", c.n_abnormal);
    c.noise_sigma_mm = jc.value("noise_sigma_mm", c.noise_sigma_mm);
    c.scan_threshold_deg = jc.value("scan_threshold_deg", c.scan_threshold_deg);
    c.pose_translation_frac = jc.value("pose_translation_frac", c.pose_translation_frac);
    c.view_jitter_deg = jc.value("view_jitter_deg", c.view_jitter_deg);
    if (jc.contains("defect")) {
      const auto& jd = jc.at("defect");
      c.defect.redundancy_weight = jd.value("redundancy_weight", c.defect.redundancy_weight);
      c.defect.incompleteness_weight =
          jd.value("incompleteness_weight", c.defect.incompleteness_weight);
      c.defect.target_ratio_min = jd.value("target_ratio_min", c.defect.target_ratio_min);
      c.defect.target_ratio_max = jd.value("target_ratio_max", c.defect.target_ratio_max);
      c.defect.magnitude_mm = jd.value("magnitude_mm", c.defect.magnitude_mm);
      c.defect.rim_band_frac = jd.value("rim_band_frac", c.defect.rim_band_frac);
    }
    cfg.categories.push_back(std::move(c));
  }
  return cfg;
}

inline SuiteConfig load_suite_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_suite_config: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return suite_config_from_json(j);
}

// --- generation --------------------------------------------------------------

namespace detail {

inline std::string zero_pad(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", v);
  return buf;
}

inline Vec3 jittered_view(const Vec3& base, double jitter_deg, Rng& rng) {
  Vec3 axis;
  do {
    axis = base.cross(uniform_direction(rng));
  } while (axis.norm() < 1e-9);
  axis.normalize();
  const double angle = jitter_deg * 3.141592653589793 / 180.0 * rng.next_double();
  return Eigen::AngleAxisd(angle, axis) * base;
}

/// Smallest defect radius whose anomaly ratio over the visible subset
/// reaches the target. Ratios are monotone in the radius, so bisection.
inline double search_defect_radius(const PointCloud& cloud, const std::vector<char>& visible,
                                   const Vec3& center, DefectKind kind, double rim_band_frac,
                                   double target_ratio, double radius_hi) {
  std::vector<double> dist(cloud.size());
  std::size_t n_visible = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    dist[i] = (cloud.points[i] - center).norm();
    n_visible += visible[i] ? 1 : 0;
  }
  auto ratio_at = [&](double r) {
    std::size_t anomalous = 0, survivors = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!visible[i]) continue;
      if (kind == DefectKind::Incompleteness) {
        if (dist[i] <= r) continue;
        ++survivors;
        if (dist[i] <= r * (1.0 + rim_band_frac)) ++anomalous;
      } else {
        if (dist[i] < r) ++anomalous;
      }
    }
    const std::size_t denom = kind == DefectKind::Incompleteness ? survivors : n_visible;
    return denom == 0 ? 1.0 : static_cast<double>(anomalous) / static_cast<double>(denom);
  };
  double lo = 0.0, hi = radius_hi;
  for (int it = 0; it < 48; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ratio_at(mid) < target_ratio)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace detail

/// Writes the full dataset layout under out_root and returns its index.
/// A suite_manifest.json with per-sample seeds, defect kinds, achieved
/// anomaly ratios, and visible fractions is written alongside.
inline DatasetIndex generate_suite(const SuiteConfig& config,
                                   const std::filesystem::path& out_root) {
  namespace fs = std::filesystem;
  fs::create_directories(out_root);
  nlohmann::json manifest;
  manifest["master_seed"] = config.master_seed;

  for (const SuiteCategoryConfig& cat : config.categories) {
    const std::uint64_t cat_seed = derive_seed(config.master_seed, "category/" + cat.name);
    const fs::path cat_dir = out_root / cat.name;
    fs::create_directories(cat_dir / "train");
    fs::create_directories(cat_dir / "test");
    fs::create_directories(cat_dir / "gt");
    nlohmann::json jcat;
    jcat["name"] = cat.name;
    jcat["shape"] = to_string(cat.shape.family);
    jcat["noise_sigma_mm"] = cat.noise_sigma_mm;

    // Prototypes: the same shape re-sampled with distinct seeds.
    double diag = 0.0;
    for (int p = 0; p < 4; ++p) {
      ShapeSpec spec = cat.shape;
      spec.seed = derive_seed(cat_seed, "prototype/" + std::to_string(p));
      const PointCloud proto = make_prototype(spec);
      if (p == 0) diag = bounding_box(proto).diagonal();
      write_ply(proto, cat_dir / "train" / ("prototype_" + std::to_string(p) + ".ply"),
                PlyMode::Binary);
      jcat["prototypes"].push_back("prototype_" + std::to_string(p));
    }
    const double translation_radius = cat.pose_translation_frac * diag;

    // Normal one-side scans.
    for (int i = 0; i < cat.n_normal; ++i) {
      const std::string stem = "good_" + detail::zero_pad(i);
      const std::uint64_t s = derive_seed(cat_seed, "sample/" + stem);
      Rng rng(s);
      ShapeSpec spec = cat.shape;
      spec.seed = derive_seed(s, "surface");
      const PointCloud full = make_prototype(spec);
      PointCloud scan;
      Vec3 view;
      for (int attempt = 0;; ++attempt) {
        view = detail::uniform_direction(rng);
        try {
          scan = simulate_single_side_scan(full, view, cat.noise_sigma_mm,
                                           random_pose(rng, translation_radius),
                                           cat.scan_threshold_deg, derive_seed(s, "noise"));
          break;
        } catch (const Error&) {
          if (attempt > 16) throw;
        }
      }
      write_ply(scan, cat_dir / "test" / (stem + ".ply"), PlyMode::Binary);
      nlohmann::json js;
      js["name"] = stem;
      js["kind"] = "normal";
      js["seed"] = s;
      js["points"] = scan.size();
      js["visible_fraction"] = static_cast<double>(scan.size()) / static_cast<double>(full.size());
      jcat["samples"].push_back(js);
    }

    // Abnormal one-side scans: the view aims roughly at the defect so the
    // anomaly is on the scanned side.
    for (int i = 0; i < cat.n_abnormal; ++i) {
      const std::uint64_t s = derive_seed(cat_seed, "abnormal/" + std::to_string(i));
      Rng rng(s);
      ShapeSpec spec = cat.shape;
      spec.seed = derive_seed(s, "surface");
      const PointCloud full = make_prototype(spec);

      const double wr = cat.defect.redundancy_weight /
                        (cat.defect.redundancy_weight + cat.defect.incompleteness_weight);
      const DefectKind kind =
          rng.next_double() < wr ? DefectKind::Redundancy : DefectKind::Incompleteness;
      const std::string stem =
          (kind == DefectKind::Redundancy ? "bulge_" : "cut_") + detail::zero_pad(i);

      const std::size_t center_idx = static_cast<std::size_t>(rng.next_below(full.size()));
      const Vec3 center = full.points[center_idx];
      const Vec3 view = detail::jittered_view(-full.normals[center_idx], cat.view_jitter_deg, rng);

      const double cos_threshold = std::cos(cat.scan_threshold_deg * 3.141592653589793 / 180.0);
      std::vector<char> visible(full.size());
      for (std::size_t v = 0; v < full.size(); ++v)
        visible[v] = full.normals[v].dot(view) < -cos_threshold ? 1 : 0;

      const double target = cat.defect.target_ratio_min +
                            (cat.defect.target_ratio_max - cat.defect.target_ratio_min) *
                                rng.next_double();
      DefectSpec dspec;
      dspec.kind = kind;
      dspec.center = center;
      dspec.magnitude = cat.defect.magnitude_mm;
      dspec.rim_band_frac = cat.defect.rim_band_frac;
      dspec.radius = detail::search_defect_radius(full, visible, center, kind,
                                                  cat.defect.rim_band_frac, target, 0.5 * diag);
      const DefectResult defect = inject_defect(full, dspec, derive_seed(s, "defect"));

      const PointCloud scan = simulate_single_side_scan(
          defect.cloud, view, cat.noise_sigma_mm, random_pose(rng, translation_radius),
          cat.scan_threshold_deg, derive_seed(s, "noise"));
      std::size_t anomalous = 0;
      for (const std::uint8_t l : scan.labels) anomalous += l;
      if (anomalous == 0)
        throw Error("generate_suite: defect invisible in sample " + cat.name + "/" + stem);

      write_ply(scan, cat_dir / "test" / (stem + ".ply"), PlyMode::Binary);
      std::ofstream gt(cat_dir / "gt" / (stem + ".txt"));
      if (!gt) throw IoError("generate_suite: cannot write gt for " + stem);
      char buf[128];
      for (std::size_t r = 0; r < scan.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d\n", scan.points[r].x(),
                      scan.points[r].y(), scan.points[r].z(), int(scan.labels[r]));
        gt << buf;
      }

      nlohmann::json js;
      js["name"] = stem;
      js["kind"] = to_string(kind);
      js["seed"] = s;
      js["points"] = scan.size();
      js["defect_radius_mm"] = dspec.radius;
      js["target_ratio"] = target;
      js["achieved_ratio"] =
          static_cast<double>(anomalous) / static_cast<double>(scan.size());
      js["visible_fraction"] =
          static_cast<double>(scan.size()) /
          static_cast<double>(kind == DefectKind::Incompleteness ? defect.cloud.size()
                                                                 : full.size());
      jcat["samples"].push_back(js);
    }
    manifest["categories"].push_back(jcat);
  }

  std::ofstream mf(out_root / "suite_manifest.json");
  if (!mf) throw IoError("generate_suite: cannot write suite manifest");
  mf << manifest.dump(2) << "\n";
  return load_dataset(out_root);
}

}  // namespace pcad
