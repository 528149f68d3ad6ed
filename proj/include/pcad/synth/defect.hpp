// Defect injection with exact labels. Two anomaly classes:
//   incompleteness - a spherical region of points is removed and the
//     surviving rim band around the cut is labeled anomalous (no points are
//     added);
//   redundancy - points in the region are displaced outward along their
//     normals by magnitude * smooth falloff (a bulge) and the displaced
//     points are labeled anomalous.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

enum class DefectKind : std::uint8_t { Incompleteness, Redundancy };

inline std::string to_string(DefectKind k) {
  return k == DefectKind::Incompleteness ? "incompleteness" : "redundancy";
}

struct DefectSpec {
  DefectKind kind = DefectKind::Redundancy;
  double radius = 3.0;          // mm
  double magnitude = 1.0;       // mm, redundancy displacement at the center
  double rim_band_frac = 0.25;  // incompleteness label band, fraction of radius
  /// Explicit region center; when absent a surface point is drawn with the
  /// seed passed to inject_defect.
  std::optional<Vec3> center;
};

struct DefectResult {
  PointCloud cloud;  // labels filled: 1 = anomalous
  double achieved_ratio = 0.0;
  Vec3 center = Vec3::Zero();
};

namespace detail {

/// 1 on the inner plateau (x <= 0.6), smoothstep down to 0 at the region
/// boundary; C1 everywhere.
inline double bulge_falloff(double x) {
  constexpr double plateau = 0.6;
  if (x <= plateau) return 1.0;
  if (x >= 1.0) return 0.0;
  const double t = (1.0 - x) / (1.0 - plateau);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace detail

inline DefectResult inject_defect(const PointCloud& cloud, const DefectSpec& spec,
                                  std::uint64_t seed) {
  if (cloud.empty()) throw Error("inject_defect: empty cloud");
  if (!(spec.radius > 0.0)) throw Error("inject_defect: radius must be positive");
  if (spec.kind == DefectKind::Redundancy && spec.magnitude < 0.0)
    throw Error("inject_defect: negative magnitude");
  if (spec.kind == DefectKind::Redundancy && !cloud.has_normals())
    throw Error("inject_defect: redundancy requires normals");

  DefectResult out;
  if (spec.center) {
    out.center = *spec.center;
  } else {
    Rng rng(seed);
    out.center = cloud.points[rng.next_below(cloud.size())];
  }

  bool touched = false;
  if (spec.kind == DefectKind::Incompleteness) {
    const double rim_outer = spec.radius * (1.0 + spec.rim_band_frac);
    std::size_t anomalous = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double d = (cloud.points[i] - out.center).norm();
      if (d <= spec.radius) {
        touched = true;
        continue;  // removed
      }
      out.cloud.points.push_back(cloud.points[i]);
      if (cloud.has_normals()) out.cloud.normals.push_back(cloud.normals[i]);
      const bool rim = d <= rim_outer;
      out.cloud.labels.push_back(rim ? 1 : 0);
      anomalous += rim ? 1 : 0;
    }
    if (out.cloud.empty()) throw Error("inject_defect: defect removed the entire cloud");
    out.achieved_ratio = static_cast<double>(anomalous) / static_cast<double>(out.cloud.size());
  } else {
    out.cloud = cloud;
    out.cloud.labels.assign(cloud.size(), 0);
    std::size_t anomalous = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double d = (cloud.points[i] - out.center).norm();
      if (d > spec.radius) continue;
      touched = true;
      const double shift = spec.magnitude * detail::bulge_falloff(d / spec.radius);
      if (shift > 0.0) {
        out.cloud.points[i] += shift * cloud.normals[i];
        out.cloud.labels[i] = 1;
        ++anomalous;
      }
    }
    out.achieved_ratio = static_cast<double>(anomalous) / static_cast<double>(out.cloud.size());
  }
  if (!touched) throw Error("inject_defect: defect region misses the surface");
  return out;
}

}  // namespace pcad
