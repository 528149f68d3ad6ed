// Parametric prototype shapes: uniform-density surface sampling of implicit
// surfaces with analytic outward normals. Sizes default to the 20-40 mm
// range of small manufactured parts.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

enum class ShapeFamily : std::uint8_t { Sphere, Torus, Superellipsoid, Capsule, BlendedUnion };

inline std::string to_string(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::Sphere: return "sphere";
    case ShapeFamily::Torus: return "torus";
    case ShapeFamily::Superellipsoid: return "superellipsoid";
    case ShapeFamily::Capsule: return "capsule";
    case ShapeFamily::BlendedUnion: return "blended_union";
  }
  return "?";
}

inline ShapeFamily shape_family_from_string(const std::string& s) {
  if (s == "sphere") return ShapeFamily::Sphere;
  if (s == "torus") return ShapeFamily::Torus;
  if (s == "superellipsoid") return ShapeFamily::Superellipsoid;
  if (s == "capsule") return ShapeFamily::Capsule;
  if (s == "blended_union") return ShapeFamily::BlendedUnion;
  throw Error("unknown shape family: " + s);
}

struct ShapeSpec {
  ShapeFamily family = ShapeFamily::Sphere;
  double radius = 15.0;          // sphere / capsule / blended-union first sphere, mm
  double ring_radius = 12.0;     // torus major radius
  double tube_radius = 5.0;      // torus minor radius
  Vec3 half_extents = Vec3(15.0, 12.0, 9.0);  // superellipsoid semi-axes
  double exponent = 4.0;         // superellipsoid exponent
  double cap_height = 18.0;      // capsule cylinder height
  double second_radius = 11.0;   // blended-union second sphere
  Vec3 second_center = Vec3(9.0, 0.0, 0.0);
  double blend_sharpness = 0.8;  // blended-union smooth-min parameter (1/mm)
  std::size_t count = 20000;
  std::uint64_t seed = 0;
};

namespace detail {

constexpr double kTau = 6.283185307179586476925286766559;

inline Vec3 uniform_direction(Rng& rng) {
  const double z = 2.0 * rng.next_double() - 1.0;
  const double phi = kTau * rng.next_double();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(s * std::cos(phi), s * std::sin(phi), z);
}

/// Deterministic direction scan (golden spiral), used to bound rejection
/// weights before sampling.
inline Vec3 spiral_direction(std::size_t i, std::size_t n) {
  const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  const double phi = 2.399963229728653 * static_cast<double>(i);  // golden angle
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(s * std::cos(phi), s * std::sin(phi), z);
}

/// Area-uniform sampling of a star-shaped surface given its radial function
/// and normal field: surface measure per solid angle is rho^2 / (n . dir).
template <typename RadialFn, typename NormalFn>
void sample_star_shaped(RadialFn&& radial, NormalFn&& normal_at, std::size_t count, Rng& rng,
                        PointCloud& out) {
  constexpr std::size_t kScan = 8192;
  double bound = 0.0;
  for (std::size_t i = 0; i < kScan; ++i) {
    const Vec3 dir = spiral_direction(i, kScan);
    const double rho = radial(dir);
    const Vec3 p = rho * dir;
    const double cosine = std::max(0.05, normal_at(p).dot(dir));
    bound = std::max(bound, rho * rho / cosine);
  }
  bound *= 1.2;

  while (out.points.size() < count) {
    const Vec3 dir = uniform_direction(rng);
    const double rho = radial(dir);
    const Vec3 p = rho * dir;
    const Vec3 n = normal_at(p);
    const double cosine = std::max(0.05, n.dot(dir));
    const double w = rho * rho / cosine;
    if (rng.next_double() * bound <= w) {
      out.points.push_back(p);
      out.normals.push_back(n);
    }
  }
}

}  // namespace detail

/// Full 360-degree surface sample of the shape, deterministic per seed.
inline PointCloud make_prototype(const ShapeSpec& spec) {
  using namespace detail;
  if (spec.count < 1) throw Error("make_prototype: count must be >= 1");
  Rng rng(spec.seed);
  PointCloud out;
  out.points.reserve(spec.count);
  out.normals.reserve(spec.count);

  switch (spec.family) {
    case ShapeFamily::Sphere: {
      for (std::size_t i = 0; i < spec.count; ++i) {
        const Vec3 dir = uniform_direction(rng);
        out.points.push_back(spec.radius * dir);
        out.normals.push_back(dir);
      }
      break;
    }
    case ShapeFamily::Torus: {
      const double big = spec.ring_radius, small = spec.tube_radius;
      if (!(big > small) || !(small > 0.0)) throw Error("make_prototype: bad torus radii");
      while (out.points.size() < spec.count) {
        const double u = kTau * rng.next_double();
        const double v = kTau * rng.next_double();
        // Area element is proportional to R + r*cos(v).
        if (rng.next_double() * (big + small) > big + small * std::cos(v)) continue;
        const double ring = big + small * std::cos(v);
        out.points.emplace_back(ring * std::cos(u), ring * std::sin(u), small * std::sin(v));
        out.normals.emplace_back(std::cos(v) * std::cos(u), std::cos(v) * std::sin(u), std::sin(v));
      }
      break;
    }
    case ShapeFamily::Superellipsoid: {
      const Vec3 s = spec.half_extents;
      const double m = spec.exponent;
      if (!(m >= 1.0)) throw Error("make_prototype: superellipsoid exponent must be >= 1");
      auto radial = [&](const Vec3& dir) {
        const double f = std::pow(std::abs(dir.x() / s.x()), m) +
                         std::pow(std::abs(dir.y() / s.y()), m) +
                         std::pow(std::abs(dir.z() / s.z()), m);
        return std::pow(f, -1.0 / m);
      };
      auto normal_at = [&](const Vec3& p) {
        Vec3 g;
        for (int a = 0; a < 3; ++a) {
          const double t = p[a] / s[a];
          g[a] = (m / s[a]) * std::pow(std::abs(t), m - 1.0) * (t >= 0.0 ? 1.0 : -1.0);
        }
        g.normalize();
        return g;
      };
      sample_star_shaped(radial, normal_at, spec.count, rng, out);
      break;
    }
    case ShapeFamily::Capsule: {
      const double r = spec.radius, h = spec.cap_height;
      if (!(r > 0.0) || !(h >= 0.0)) throw Error("make_prototype: bad capsule dimensions");
      const double area_cyl = kTau * r * h;
      const double area_caps = 2.0 * kTau * r * r;  // both hemispheres
      for (std::size_t i = 0; i < spec.count; ++i) {
        if (rng.next_double() * (area_cyl + area_caps) < area_cyl) {
          const double phi = kTau * rng.next_double();
          const double z = (rng.next_double() - 0.5) * h;
          out.points.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
          out.normals.emplace_back(std::cos(phi), std::sin(phi), 0.0);
        } else {
          Vec3 dir = uniform_direction(rng);
          const double cap = dir.z() >= 0.0 ? h / 2.0 : -h / 2.0;
          out.points.push_back(Vec3(0, 0, cap) + r * dir);
          out.normals.push_back(dir);
        }
      }
      break;
    }
    case ShapeFamily::BlendedUnion: {
      const Vec3 c1 = Vec3::Zero(), c2 = spec.second_center;
      const double r1 = spec.radius, r2 = spec.second_radius, k = spec.blend_sharpness;
      const Vec3 ref = 0.5 * (c1 + c2);
      if ((ref - c1).norm() >= r1 || (ref - c2).norm() >= r2)
        throw Error("make_prototype: blended-union spheres must overlap their midpoint");
      auto sdf = [&](const Vec3& p) {
        const double d1 = (p - c1).norm() - r1;
        const double d2 = (p - c2).norm() - r2;
        return -std::log(std::exp(-k * d1) + std::exp(-k * d2)) / k;
      };
      auto normal_at = [&](const Vec3& p) {
        const double d1 = (p - c1).norm() - r1;
        const double d2 = (p - c2).norm() - r2;
        const double w1 = std::exp(-k * d1), w2 = std::exp(-k * d2);
        Vec3 g = (w1 * (p - c1).normalized() + w2 * (p - c2).normalized()) / (w1 + w2);
        g.normalize();
        return g;
      };
      auto radial = [&](const Vec3& dir) {
        double lo = 0.0, hi = 1.5 * (r1 + r2 + (c2 - c1).norm());
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (sdf(ref + mid * dir) < 0.0)
            lo = mid;
          else
            hi = mid;
        }
        return 0.5 * (lo + hi);
      };
      // Sample around ref, then shift into the common frame.
      PointCloud local;
      auto radial_fn = radial;
      auto normal_fn = [&](const Vec3& p_rel) { return normal_at(ref + p_rel); };
      sample_star_shaped(
          [&](const Vec3& dir) { return radial_fn(dir); },
          [&](const Vec3& p_rel) { return normal_fn(p_rel); }, spec.count, rng, local);
      for (std::size_t i = 0; i < local.size(); ++i) {
        out.points.push_back(ref + local.points[i]);
        out.normals.push_back(local.normals[i]);
      }
      break;
    }
  }
  return out;
}

}  // namespace pcad
