// Dataset directory layout:
//
//   <root>/<category>/train/*.ply     1-4 full prototypes
//   <root>/<category>/test/*.ply      one-side test scans
//   <root>/<category>/gt/<stem>.txt   labels for each abnormal test scan
//
// Test samples whose filename stem starts with "good" are normal and carry
// no gt file (labels implicitly all-zero); every other test sample is
// abnormal and must have one.
#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pcad/common.hpp"

namespace pcad {

struct CategoryEntry {
  std::string name;
  std::vector<std::filesystem::path> train_paths;  // at most 4
  std::vector<std::filesystem::path> test_paths;
  /// Parallel to test_paths; empty path for normal samples.
  std::vector<std::filesystem::path> gt_paths;

  bool is_abnormal(std::size_t test_idx) const { return !gt_paths[test_idx].empty(); }
};

struct DatasetIndex {
  std::vector<CategoryEntry> categories;
};

inline bool is_normal_sample_name(const std::string& stem) {
  return stem.rfind("good", 0) == 0;
}

constexpr std::size_t kMaxPrototypes = 4;

inline DatasetIndex load_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::exists(root)) throw IoError("load_dataset: root does not exist: " + root.string());

  DatasetIndex index;
  std::vector<fs::path> category_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) category_dirs.push_back(entry.path());
  }
  std::sort(category_dirs.begin(), category_dirs.end());

  auto sorted_plys = [](const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".ply")
        out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  for (const fs::path& dir : category_dirs) {
    CategoryEntry cat;
    cat.name = dir.filename().string();
    cat.train_paths = sorted_plys(dir / "train");
    if (cat.train_paths.empty())
      throw IoError("load_dataset: category '" + cat.name + "' has no training prototypes");
    if (cat.train_paths.size() > kMaxPrototypes) {
      std::cerr << "load_dataset: category '" << cat.name << "' has " << cat.train_paths.size()
                << " prototypes; keeping the first " << kMaxPrototypes << "\n";
      cat.train_paths.resize(kMaxPrototypes);
    }
    cat.test_paths = sorted_plys(dir / "test");
    cat.gt_paths.reserve(cat.test_paths.size());
    for (const fs::path& test_path : cat.test_paths) {
      const std::string stem = test_path.stem().string();
      if (is_normal_sample_name(stem)) {
        cat.gt_paths.emplace_back();
        continue;
      }
      const fs::path gt = dir / "gt" / (stem + ".txt");
      if (!fs::exists(gt))
        throw IoError("load_dataset: abnormal test sample '" + cat.name + "/" + stem +
                      "' lacks a ground-truth file");
      cat.gt_paths.push_back(gt);
    }
    index.categories.push_back(std::move(cat));
  }
  return index;
}

}  // namespace pcad
