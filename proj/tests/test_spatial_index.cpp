#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "pcad/spatial/index.hpp"

using namespace pcad;

TEST_CASE("single row answers every query") {
  const auto index = SpatialIndex::build({1.0, 2.0, 3.0}, 3);
  const double q[3] = {0.0, 0.0, 0.0};
  const auto nn = index.knn(q, 1);
  REQUIRE(nn.size() == 1);
  CHECK(nn[0].index == 0);
  CHECK(nn[0].distance == Catch::Approx(std::sqrt(14.0)));
}

TEST_CASE("self queries return zero distance") {
  auto rng = testutil::make_rng(11);
  std::vector<double> rows;
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 3; ++j) rows.push_back(testutil::uniform(rng, -5, 5));
  const auto index = SpatialIndex::build(rows, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    const auto nn = index.knn(rows.data() + 3 * i, 1);
    REQUIRE(nn[0].index == i);
    REQUIRE(nn[0].distance == 0.0);
  }
}

TEST_CASE("1-d example and k = N ordering") {
  const auto index = SpatialIndex::build({0.0, 10.0}, 1);
  const double q = 1.0;
  const auto nn = index.knn(&q, 1);
  CHECK(nn[0].index == 0);
  CHECK(nn[0].distance == 1.0);

  const auto all = index.knn(&q, 2);
  REQUIRE(all.size() == 2);
  CHECK(all[0].index == 0);
  CHECK(all[1].index == 1);
  CHECK(all[1].distance == 9.0);
}

TEST_CASE("equidistant tie breaks toward the lower row index") {
  const auto index = SpatialIndex::build({0.0, 2.0}, 1);
  const double q = 1.0;
  const auto nn = index.knn(&q, 1);
  CHECK(nn[0].index == 0);
}

TEST_CASE("radius boundary is inclusive") {
  const auto index = SpatialIndex::build({0.0, 0.0, 0.0, 5.0, 0.0, 0.0}, 3);
  const double q[3] = {0.0, 0.0, 0.0};
  const auto at_zero = index.radius_search(q, 0.0);
  REQUIRE(at_zero.size() == 1);
  CHECK(at_zero[0].index == 0);

  const auto tiny = index.radius_search(q, 4.9999);
  CHECK(tiny.size() == 1);
  const auto both = index.radius_search(q, 5.0);
  CHECK(both.size() == 2);
}

TEST_CASE("empty radius result below the minimum distance") {
  const auto index = SpatialIndex::build({3.0, 4.0}, 2);
  const double q[2] = {0.0, 0.0};
  CHECK(index.radius_search(q, 4.99).empty());
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(SpatialIndex::build({}, 3), Error);
  CHECK_THROWS_AS(SpatialIndex::build({1.0, std::nan("")}, 2), Error);
  const auto index = SpatialIndex::build({1.0, 2.0}, 1);
  const double q = 0.0;
  CHECK_THROWS_AS(index.knn(&q, 3), Error);
  CHECK_THROWS_AS(index.knn(&q, 0), Error);
  CHECK_THROWS_AS(index.radius_search(&q, -1.0), Error);
}

TEST_CASE("matches the brute-force oracle on random instances") {
  auto rng = testutil::make_rng(42);
  for (const std::size_t dim : {std::size_t(3), std::size_t(33)}) {
    for (int rep = 0; rep < 6; ++rep) {
      const std::size_t n = 50 + static_cast<std::size_t>(testutil::uniform(rng, 0, 950));
      std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
      std::vector<double> flat;
      flat.reserve(n * dim);
      for (auto& row : rows)
        for (auto& v : row) {
          v = testutil::uniform(rng, -10, 10);
          flat.push_back(v);
        }
      // Duplicate a few rows so distance ties actually occur.
      for (int d = 0; d < 3 && n > 4; ++d) {
        rows[d + 1] = rows[0];
        std::copy(rows[0].begin(), rows[0].end(), flat.begin() + (d + 1) * dim);
      }
      const auto index = SpatialIndex::build(flat, dim);

      for (int q = 0; q < 20; ++q) {
        std::vector<double> query(dim);
        for (auto& v : query) v = testutil::uniform(rng, -10, 10);
        const std::size_t k = 1 + static_cast<std::size_t>(testutil::uniform(rng, 0, 5));
        const auto got = index.knn(query.data(), k);
        const auto want = testutil::brute_knn(rows, query, k);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < k; ++i) {
          CHECK(got[i].index == want[i].index);
          CHECK(std::abs(got[i].distance - want[i].distance) <= 1e-12);
        }
        const double r = testutil::uniform(rng, 0, 8);
        const auto got_r = index.radius_search(query.data(), r);
        const auto want_r = testutil::brute_radius(rows, query, r);
        REQUIRE(got_r.size() == want_r.size());
        for (std::size_t i = 0; i < got_r.size(); ++i) {
          CHECK(got_r[i].index == want_r[i].index);
          CHECK(std::abs(got_r[i].distance - want_r[i].distance) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("results are a pure function of rows and query") {
  auto rng = testutil::make_rng(7);
  std::vector<double> flat;
  for (int i = 0; i < 300; ++i) flat.push_back(testutil::uniform(rng, -1, 1));
  const auto a = SpatialIndex::build(flat, 3);
  const auto b = SpatialIndex::build(flat, 3);
  const double q[3] = {0.1, -0.2, 0.3};
  const auto ra = a.knn(q, 7);
  const auto rb = b.knn(q, 7);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].index == rb[i].index);
    CHECK(ra[i].distance == rb[i].distance);
  }
}
