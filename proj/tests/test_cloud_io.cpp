#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "pcad/io/dataset.hpp"
#include "pcad/io/labels.hpp"
#include "pcad/io/ply.hpp"

using namespace pcad;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("pcad_io_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

}  // namespace

TEST_CASE("ascii ply with three vertices parses in file order") {
  const fs::path dir = temp_dir("ascii");
  write_text(dir / "tri.ply",
             "ply\nformat ascii 1.0\ncomment demo\nelement vertex 3\n"
             "property float x\nproperty float y\nproperty float z\nend_header\n"
             "0 0 0\n1 0 0\n2 1 0.5\n");
  const PointCloud cloud = read_ply(dir / "tri.ply");
  REQUIRE(cloud.size() == 3);
  CHECK(cloud.points[0] == Vec3(0, 0, 0));
  CHECK(cloud.points[1] == Vec3(1, 0, 0));
  CHECK(cloud.points[2] == Vec3(2, 1, 0.5));
  CHECK_FALSE(cloud.has_normals());
  CHECK_FALSE(cloud.has_labels());
}

TEST_CASE("binary round-trip is bit exact for coordinates, normals, labels") {
  auto rng = testutil::make_rng(21);
  PointCloud cloud = testutil::sphere_cloud(rng, 10000, 7.5);
  cloud.labels.assign(cloud.size(), 0);
  for (std::size_t i = 0; i < cloud.size(); i += 17) cloud.labels[i] = 1;

  const fs::path dir = temp_dir("bin");
  write_ply(cloud, dir / "c.ply", PlyMode::Binary);
  const PointCloud back = read_ply(dir / "c.ply");
  REQUIRE(back.size() == cloud.size());
  REQUIRE(back.has_normals());
  REQUIRE(back.has_labels());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(back.points[i] == cloud.points[i]);
    CHECK(back.normals[i] == cloud.normals[i]);
  }
  CHECK(back.labels == cloud.labels);
}

TEST_CASE("ascii round-trip is bit exact with 17 significant digits") {
  auto rng = testutil::make_rng(22);
  const PointCloud cloud = testutil::random_cloud(rng, 500, 123.456);
  const fs::path dir = temp_dir("ascii_rt");
  write_ply(cloud, dir / "c.ply", PlyMode::Ascii);
  const PointCloud back = read_ply(dir / "c.ply");
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(back.points[i] == cloud.points[i]);
}

TEST_CASE("header omits normals when absent and carries label property") {
  PointCloud cloud;
  cloud.points.emplace_back(1, 2, 3);
  cloud.labels = {1};
  const fs::path dir = temp_dir("hdr");
  write_ply(cloud, dir / "c.ply", PlyMode::Ascii);
  std::ifstream in(dir / "c.ply");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("nx") == std::string::npos);
  CHECK(text.find("property uchar label") != std::string::npos);
}

TEST_CASE("truncated body raises a distinct error with a byte offset") {
  const fs::path dir = temp_dir("trunc");
  write_text(dir / "t.ply",
             "ply\nformat ascii 1.0\nelement vertex 5\n"
             "property float x\nproperty float y\nproperty float z\nend_header\n"
             "0 0 0\n1 0 0\n2 0 0\n3 0 0\n");
  try {
    read_ply(dir / "t.ply");
    FAIL("expected PlyError");
  } catch (const PlyError& e) {
    CHECK(e.kind == PlyError::Kind::TruncatedBody);
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("malformed header and unsupported layouts are distinct errors") {
  const fs::path dir = temp_dir("badhdr");
  write_text(dir / "a.ply", "not a ply\n");
  CHECK_THROWS_AS(read_ply(dir / "a.ply"), PlyError);

  write_text(dir / "b.ply", "ply\nformat big_endian 1.0\nend_header\n");
  try {
    read_ply(dir / "b.ply");
    FAIL("expected PlyError");
  } catch (const PlyError& e) {
    CHECK(e.kind == PlyError::Kind::UnsupportedLayout);
  }

  write_text(dir / "c.ply",
             "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n"
             "property float y\nend_header\n0 0\n");
  try {
    read_ply(dir / "c.ply");
    FAIL("expected PlyError");
  } catch (const PlyError& e) {
    CHECK(e.kind == PlyError::Kind::UnsupportedLayout);  // lacks z
  }
}

TEST_CASE("binary float32 vertices and skipped extra properties read back") {
  const fs::path dir = temp_dir("f32");
  std::ofstream out(dir / "c.ply", std::ios::binary);
  out << "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
         "property float x\nproperty float y\nproperty float z\n"
         "property float confidence\nend_header\n";
  const float rows[2][4] = {{1.5f, 2.5f, 3.5f, 0.9f}, {-1.0f, 0.25f, 8.0f, 0.1f}};
  out.write(reinterpret_cast<const char*>(rows), sizeof(rows));
  out.close();
  const PointCloud cloud = read_ply(dir / "c.ply");
  REQUIRE(cloud.size() == 2);
  CHECK(cloud.points[0] == Vec3(1.5, 2.5, 3.5));
  CHECK(cloud.points[1] == Vec3(-1.0, 0.25, 8.0));
}

TEST_CASE("write to an unwritable path fails with an io error") {
  PointCloud cloud;
  cloud.points.emplace_back(0, 0, 0);
  CHECK_THROWS_AS(write_ply(cloud, "/nonexistent_dir_zz/x.ply", PlyMode::Binary), IoError);
}

TEST_CASE("label text accepts 4-column and single-column forms") {
  const fs::path dir = temp_dir("labels");
  write_text(dir / "four.txt", "0 0 0 0\n1 1 1 1\n2 2 2 0\n");
  CHECK(read_labels_txt(dir / "four.txt", 3) == std::vector<std::uint8_t>{0, 1, 0});

  write_text(dir / "one.txt", "0\n1\n");
  CHECK(read_labels_txt(dir / "one.txt", 2) == std::vector<std::uint8_t>{0, 1});

  write_text(dir / "comment.txt", "# header line\r\n0\r\n\r\n1\r\n");
  CHECK(read_labels_txt(dir / "comment.txt", 2) == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("label text errors: count mismatch, non-binary, coordinate drift") {
  const fs::path dir = temp_dir("labels_err");
  write_text(dir / "short.txt", "0\n1\n");
  CHECK_THROWS_AS(read_labels_txt(dir / "short.txt", 3), IoError);

  write_text(dir / "bad.txt", "0\n2\n");
  CHECK_THROWS_AS(read_labels_txt(dir / "bad.txt", 2), IoError);

  write_text(dir / "drift.txt", "0 0 0 0\n5 5 5 1\n");
  PointCloud cloud;
  cloud.points.emplace_back(0, 0, 0);
  cloud.points.emplace_back(5, 5, 5.5);
  CHECK_THROWS_AS(read_labels_txt(dir / "drift.txt", 2, &cloud), IoError);
  cloud.points[1] = Vec3(5, 5, 5.00005);
  CHECK(read_labels_txt(dir / "drift.txt", 2, &cloud) == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("dataset layout loads deterministically") {
  const fs::path root = temp_dir("dataset");
  PointCloud proto;
  proto.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};

  for (const std::string cat : {"beta", "alpha"}) {
    fs::create_directories(root / cat / "train");
    fs::create_directories(root / cat / "test");
    fs::create_directories(root / cat / "gt");
    write_ply(proto, root / cat / "train" / "prototype_0.ply", PlyMode::Binary);
    write_ply(proto, root / cat / "test" / "good_000.ply", PlyMode::Binary);
    write_ply(proto, root / cat / "test" / "cut_000.ply", PlyMode::Binary);
    write_text(root / cat / "gt" / "cut_000.txt", "0\n1\n0\n");
  }

  const DatasetIndex index = load_dataset(root);
  REQUIRE(index.categories.size() == 2);
  CHECK(index.categories[0].name == "alpha");  // lexicographic
  CHECK(index.categories[1].name == "beta");
  const CategoryEntry& cat = index.categories[0];
  REQUIRE(cat.test_paths.size() == 2);
  CHECK(cat.is_abnormal(0));  // cut_000 sorts first
  CHECK_FALSE(cat.is_abnormal(1));

  const DatasetIndex again = load_dataset(root);
  CHECK(again.categories[0].train_paths == index.categories[0].train_paths);
  CHECK(again.categories[1].test_paths == index.categories[1].test_paths);
}

TEST_CASE("dataset errors: abnormal sample without gt, empty category") {
  const fs::path root = temp_dir("dataset_err");
  PointCloud proto;
  proto.points = {Vec3(0, 0, 0)};
  fs::create_directories(root / "cat" / "train");
  fs::create_directories(root / "cat" / "test");
  write_ply(proto, root / "cat" / "train" / "p.ply", PlyMode::Binary);
  write_ply(proto, root / "cat" / "test" / "cut_000.ply", PlyMode::Binary);
  CHECK_THROWS_WITH(load_dataset(root), Catch::Matchers::ContainsSubstring("cut_000"));

  const fs::path root2 = temp_dir("dataset_err2");
  fs::create_directories(root2 / "cat" / "train");
  CHECK_THROWS_AS(load_dataset(root2), IoError);
}

TEST_CASE("empty root yields an empty index") {
  const fs::path root = temp_dir("dataset_empty");
  CHECK(load_dataset(root).categories.empty());
}

TEST_CASE("more than four prototypes are truncated to the first four") {
  const fs::path root = temp_dir("dataset_many");
  PointCloud proto;
  proto.points = {Vec3(0, 0, 0)};
  fs::create_directories(root / "cat" / "train");
  for (int i = 0; i < 6; ++i)
    write_ply(proto, root / "cat" / "train" / ("p" + std::to_string(i) + ".ply"), PlyMode::Binary);
  const DatasetIndex index = load_dataset(root);
  CHECK(index.categories[0].train_paths.size() == 4);
}
