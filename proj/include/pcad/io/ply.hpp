// PLY ingestion and emission (ascii and binary_little_endian 1.0).
//
// Supported vertex properties: x,y,z (float32/float64), optional nx,ny,nz,
// optional label (uchar). Unknown scalar vertex properties are skipped.
// Binary output is little-endian float64, so write -> read round-trips are
// bit-exact.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

struct PlyError : IoError {
  enum class Kind { MalformedHeader, UnsupportedLayout, TruncatedBody, BadValue };
  Kind kind;
  std::size_t byte_offset;
  PlyError(Kind k, std::size_t offset, const std::string& msg)
      : IoError(msg + " (byte offset " + std::to_string(offset) + ")"),
        kind(k),
        byte_offset(offset) {}
};

namespace detail {

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

inline std::size_t scalar_size(const std::string& type) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32" || type == "float" ||
      type == "float32")
    return 4;
  if (type == "double" || type == "float64" || type == "int64" || type == "uint64") return 8;
  return 0;
}

inline double parse_scalar_le(const char* bytes, const std::string& type) {
  auto load = [&](auto v) {
    std::memcpy(&v, bytes, sizeof(v));
    return static_cast<double>(v);
  };
  if (type == "float" || type == "float32") return load(float{});
  if (type == "double" || type == "float64") return load(double{});
  if (type == "char" || type == "int8") return load(std::int8_t{});
  if (type == "uchar" || type == "uint8") return load(std::uint8_t{});
  if (type == "short" || type == "int16") return load(std::int16_t{});
  if (type == "ushort" || type == "uint16") return load(std::uint16_t{});
  if (type == "int" || type == "int32") return load(std::int32_t{});
  if (type == "uint" || type == "uint32") return load(std::uint32_t{});
  if (type == "int64") return load(std::int64_t{});
  if (type == "uint64") return load(std::uint64_t{});
  return 0.0;
}

}  // namespace detail

inline PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_ply: cannot open " + path.string());
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  using detail::PlyElement;
  using detail::PlyProperty;
  using Kind = PlyError::Kind;

  // --- header ---
  std::size_t pos = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= contents.size()) return false;
    std::size_t eol = contents.find('\n', pos);
    if (eol == std::string::npos) eol = contents.size();
    line = contents.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = eol + 1;
    return true;
  };

  std::string line;
  if (!next_line(line) || line != "ply")
    throw PlyError(Kind::MalformedHeader, 0, "read_ply: missing 'ply' magic");
  bool binary = false;
  bool format_seen = false;
  std::vector<PlyElement> elements;
  bool header_done = false;
  while (next_line(line)) {
    const std::size_t line_start = pos - line.size() - 1;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt, version;
      ss >> fmt >> version;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        throw PlyError(Kind::UnsupportedLayout, line_start, "read_ply: unsupported format " + fmt);
      if (version != "1.0")
        throw PlyError(Kind::MalformedHeader, line_start, "read_ply: unsupported version");
      format_seen = true;
    } else if (word == "element") {
      PlyElement el;
      if (!(ss >> el.name >> el.count))
        throw PlyError(Kind::MalformedHeader, line_start, "read_ply: bad element line");
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty())
        throw PlyError(Kind::MalformedHeader, line_start, "read_ply: property before element");
      PlyProperty prop;
      std::string t;
      ss >> t;
      if (t == "list") {
        prop.is_list = true;
        std::string count_type, value_type;
        ss >> count_type >> value_type >> prop.name;
        prop.type = value_type;
      } else {
        prop.type = t;
        ss >> prop.name;
      }
      if (prop.name.empty())
        throw PlyError(Kind::MalformedHeader, line_start, "read_ply: bad property line");
      elements.back().properties.push_back(prop);
    } else if (word == "end_header") {
      header_done = true;
      break;
    } else {
      throw PlyError(Kind::MalformedHeader, line_start, "read_ply: unknown header keyword " + word);
    }
  }
  if (!header_done || !format_seen)
    throw PlyError(Kind::MalformedHeader, pos, "read_ply: header not terminated");

  const auto vertex_it =
      std::find_if(elements.begin(), elements.end(),
                   [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end())
    throw PlyError(Kind::UnsupportedLayout, pos, "read_ply: no vertex element");

  // Locate the columns we understand.
  const PlyElement& vertex = *vertex_it;
  int col_x = -1, col_y = -1, col_z = -1, col_nx = -1, col_ny = -1, col_nz = -1, col_label = -1;
  for (std::size_t c = 0; c < vertex.properties.size(); ++c) {
    const PlyProperty& prop = vertex.properties[c];
    if (prop.is_list)
      throw PlyError(Kind::UnsupportedLayout, pos, "read_ply: list property on vertex element");
    if (detail::scalar_size(prop.type) == 0)
      throw PlyError(Kind::UnsupportedLayout, pos,
                     "read_ply: unknown property type " + prop.type);
    if (prop.name == "x") col_x = static_cast<int>(c);
    if (prop.name == "y") col_y = static_cast<int>(c);
    if (prop.name == "z") col_z = static_cast<int>(c);
    if (prop.name == "nx") col_nx = static_cast<int>(c);
    if (prop.name == "ny") col_ny = static_cast<int>(c);
    if (prop.name == "nz") col_nz = static_cast<int>(c);
    if (prop.name == "label") col_label = static_cast<int>(c);
  }
  if (col_x < 0 || col_y < 0 || col_z < 0)
    throw PlyError(Kind::UnsupportedLayout, pos, "read_ply: vertex element lacks x/y/z");
  const bool with_normals = col_nx >= 0 && col_ny >= 0 && col_nz >= 0;
  const bool with_labels = col_label >= 0;

  PointCloud cloud;
  cloud.points.reserve(vertex.count);
  if (with_normals) cloud.normals.reserve(vertex.count);
  if (with_labels) cloud.labels.reserve(vertex.count);

  // --- body ---
  for (const PlyElement& el : elements) {
    const bool is_vertex = &el == &*vertex_it;
    if (binary) {
      std::size_t row_size = 0;
      for (const PlyProperty& prop : el.properties) {
        if (prop.is_list) {
          if (is_vertex || &el < &*vertex_it)
            throw PlyError(Kind::UnsupportedLayout, pos,
                           "read_ply: list property before vertex data in binary file");
          row_size = 0;  // element after vertex: stop, we have what we need
          break;
        }
        row_size += detail::scalar_size(prop.type);
      }
      if (row_size == 0 && !is_vertex) break;
      if (!is_vertex) {
        const std::size_t skip = row_size * el.count;
        if (pos + skip > contents.size())
          throw PlyError(Kind::TruncatedBody, contents.size(), "read_ply: truncated element " + el.name);
        pos += skip;
        continue;
      }
      for (std::size_t i = 0; i < el.count; ++i) {
        if (pos + row_size > contents.size())
          throw PlyError(Kind::TruncatedBody, pos,
                         "read_ply: truncated vertex body at row " + std::to_string(i));
        std::vector<double> values(el.properties.size());
        std::size_t off = pos;
        for (std::size_t c = 0; c < el.properties.size(); ++c) {
          values[c] = detail::parse_scalar_le(contents.data() + off, el.properties[c].type);
          off += detail::scalar_size(el.properties[c].type);
        }
        pos = off;
        cloud.points.emplace_back(values[col_x], values[col_y], values[col_z]);
        if (with_normals) cloud.normals.emplace_back(values[col_nx], values[col_ny], values[col_nz]);
        if (with_labels) {
          const double l = values[col_label];
          if (l != 0.0 && l != 1.0)
            throw PlyError(Kind::BadValue, pos, "read_ply: non-binary label value");
          cloud.labels.push_back(static_cast<std::uint8_t>(l));
        }
      }
    } else {
      for (std::size_t i = 0; i < el.count; ++i) {
        const std::size_t row_start = pos;
        if (!next_line(line))
          throw PlyError(Kind::TruncatedBody, row_start,
                         "read_ply: truncated " + el.name + " body at row " + std::to_string(i));
        if (!is_vertex) continue;
        std::istringstream ss(line);
        std::vector<double> values(el.properties.size());
        for (std::size_t c = 0; c < el.properties.size(); ++c) {
          if (!(ss >> values[c]))
            throw PlyError(Kind::TruncatedBody, row_start,
                           "read_ply: short vertex row " + std::to_string(i));
        }
        cloud.points.emplace_back(values[col_x], values[col_y], values[col_z]);
        if (with_normals) cloud.normals.emplace_back(values[col_nx], values[col_ny], values[col_nz]);
        if (with_labels) {
          const double l = values[col_label];
          if (l != 0.0 && l != 1.0)
            throw PlyError(Kind::BadValue, row_start, "read_ply: non-binary label value");
          cloud.labels.push_back(static_cast<std::uint8_t>(l));
        }
      }
    }
    if (is_vertex && binary) break;  // anything after the vertex block is ignored
  }

  for (const Vec3& p : cloud.points) {
    if (!p.allFinite()) throw PlyError(Kind::BadValue, pos, "read_ply: non-finite coordinate");
  }
  return cloud;
}

enum class PlyMode { Ascii, Binary };

inline void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
                      PlyMode mode = PlyMode::Binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_ply: cannot open " + path.string() + " for writing");
  const bool with_normals = cloud.has_normals();
  const bool with_labels = cloud.has_labels();

  out << "ply\n";
  out << (mode == PlyMode::Binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (with_normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
  if (with_labels) out << "property uchar label\n";
  out << "end_header\n";

  if (mode == PlyMode::Binary) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      double buf[6];
      int n = 0;
      buf[n++] = cloud.points[i].x();
      buf[n++] = cloud.points[i].y();
      buf[n++] = cloud.points[i].z();
      if (with_normals) {
        buf[n++] = cloud.normals[i].x();
        buf[n++] = cloud.normals[i].y();
        buf[n++] = cloud.normals[i].z();
      }
      out.write(reinterpret_cast<const char*>(buf), n * sizeof(double));
      if (with_labels) out.put(static_cast<char>(cloud.labels[i]));
    }
  } else {
    char buf[512];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      int n = std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", cloud.points[i].x(),
                            cloud.points[i].y(), cloud.points[i].z());
      if (with_normals)
        n += std::snprintf(buf + n, sizeof(buf) - n, " %.17g %.17g %.17g", cloud.normals[i].x(),
                           cloud.normals[i].y(), cloud.normals[i].z());
      if (with_labels) n += std::snprintf(buf + n, sizeof(buf) - n, " %d", int(cloud.labels[i]));
      out << buf << "\n";
    }
  }
  if (!out) throw IoError("write_ply: I/O failure writing " + path.string());
}

}  // namespace pcad
