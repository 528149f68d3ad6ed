// Ground-truth label text files: either one label per row, or
// "x y z label" rows whose coordinates are cross-checked against the cloud.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

/// Reads binary labels in row order. Lines starting with '#' and blank
/// lines are ignored; LF and CRLF both accepted. When the file is
/// 4-column and `cloud` is given, coordinates must match within 1e-4.
inline std::vector<std::uint8_t> read_labels_txt(const std::filesystem::path& path,
                                                 std::size_t expected_count,
                                                 const PointCloud* cloud = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("read_labels_txt: cannot open " + path.string());

  std::vector<std::uint8_t> labels;
  labels.reserve(expected_count);
  std::string line;
  int columns = 0;  // 0 = undetermined yet
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.empty()) {
      // blank or comment line
      std::istringstream check(line);
      std::string tok;
      if (check >> tok && tok[0] != '#')
        throw IoError("read_labels_txt: unparsable line " + std::to_string(line_no) + " in " +
                      path.string());
      continue;
    }
    if (vals.size() != 1 && vals.size() != 4)
      throw IoError("read_labels_txt: expected 1 or 4 columns at line " + std::to_string(line_no));
    if (columns == 0) columns = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != columns)
      throw IoError("read_labels_txt: inconsistent column count at line " + std::to_string(line_no));

    const double label = vals.back();
    if (label != 0.0 && label != 1.0)
      throw IoError("read_labels_txt: non-binary label at line " + std::to_string(line_no));
    if (columns == 4 && cloud) {
      const std::size_t i = labels.size();
      if (i < cloud->size()) {
        const Vec3 file_pt(vals[0], vals[1], vals[2]);
        if ((file_pt - cloud->points[i]).cwiseAbs().maxCoeff() > 1e-4)
          throw IoError("read_labels_txt: coordinates at line " + std::to_string(line_no) +
                        " do not match the paired cloud");
      }
    }
    labels.push_back(static_cast<std::uint8_t>(label));
  }
  if (labels.size() != expected_count)
    throw IoError("read_labels_txt: row count " + std::to_string(labels.size()) +
                  " does not match expected " + std::to_string(expected_count) + " in " +
                  path.string());
  return labels;
}

}  // namespace pcad
