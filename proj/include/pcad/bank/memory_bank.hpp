// Coreset-reduced feature banks and nearest-neighbor anomaly scoring with
// the re-weighting factor
//
//   score = (1 - exp(d*) / sum_{m in N_b(m*)} exp(||q - m||)) * d*
//
// where d* is the distance from a test feature q to its nearest bank row
// m*, and N_b(m*) are the b nearest bank rows to m* (m* itself included).
// The exponentials are evaluated in shifted form, which leaves the ratio
// unchanged but cannot overflow.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcad/bank/coreset.hpp"
#include "pcad/features/feature_set.hpp"
#include "pcad/spatial/index.hpp"

namespace pcad {

struct MemoryBank {
  Eigen::MatrixXd rows;  // M x D, block-normalized
  FeatureKind kind = FeatureKind::RawXyz;
  std::vector<int> block_dims;
  std::vector<double> block_scales;
  FeatureParams feature_params;      // extraction parameters frozen at build
  std::vector<std::string> sources;  // prototype identifiers
  std::shared_ptr<const SpatialIndex> index;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }

  void rebuild_index() { index = std::make_shared<SpatialIndex>(SpatialIndex::build(rows)); }

  /// Applies the frozen per-block scales to raw feature rows.
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& raw) const {
    Eigen::MatrixXd out = raw;
    Eigen::Index col = 0;
    for (std::size_t blk = 0; blk < block_dims.size(); ++blk) {
      out.middleCols(col, block_dims[blk]) *= block_scales[blk];
      col += block_dims[blk];
    }
    return out;
  }

  /// Wraps pre-normalized rows directly (single block, scale 1).
  static MemoryBank from_rows(Eigen::MatrixXd rows, FeatureKind kind) {
    MemoryBank bank;
    bank.rows = std::move(rows);
    bank.kind = kind;
    bank.block_dims = {static_cast<int>(bank.rows.cols())};
    bank.block_scales = {1.0};
    bank.rebuild_index();
    return bank;
  }
};

/// Pools feature rows from all prototypes, computes per-block scales
/// (1 / mean row norm of the block over the pool), normalizes, and runs
/// greedy coreset selection down to target_size. The stored rows are a
/// subset of the normalized pool; coreset selects, never averages.
inline MemoryBank build_bank(const std::vector<FeatureSet>& prototype_sets,
                             std::size_t target_size, std::uint64_t seed,
                             int projection_dim = 0) {
  if (prototype_sets.empty()) throw Error("build_bank: no feature sets");
  if (target_size < 1) throw Error("build_bank: target size must be >= 1");
  const FeatureKind kind = prototype_sets[0].kind;
  const Eigen::Index dim = prototype_sets[0].matrix.cols();
  std::size_t total = 0;
  for (const FeatureSet& fs : prototype_sets) {
    if (fs.kind != kind || fs.matrix.cols() != dim)
      throw Error("build_bank: feature sets disagree on kind or dimension");
    total += fs.rows();
  }
  if (total == 0) throw Error("build_bank: empty feature pool");

  Eigen::MatrixXd pool(static_cast<Eigen::Index>(total), dim);
  Eigen::Index at = 0;
  for (const FeatureSet& fs : prototype_sets) {
    pool.middleRows(at, fs.matrix.rows()) = fs.matrix;
    at += fs.matrix.rows();
  }

  MemoryBank bank;
  bank.kind = kind;
  bank.feature_params = prototype_sets[0].params;
  if (kind == FeatureKind::Concat) {
    bank.block_dims = prototype_sets[0].params.block_dims;
    if (bank.block_dims.empty()) throw Error("build_bank: concat set lacks block dims");
  } else {
    bank.block_dims = {static_cast<int>(dim)};
  }

  Eigen::Index col = 0;
  for (const int bd : bank.block_dims) {
    const double mean_norm = pool.middleCols(col, bd).rowwise().norm().mean();
    bank.block_scales.push_back(mean_norm > 1e-300 ? 1.0 / mean_norm : 1.0);
    col += bd;
  }
  col = 0;
  for (std::size_t blk = 0; blk < bank.block_dims.size(); ++blk) {
    pool.middleCols(col, bank.block_dims[blk]) *= bank.block_scales[blk];
    col += bank.block_dims[blk];
  }

  const std::size_t m = std::min(target_size, total);
  const std::vector<std::size_t> picked = greedy_coreset(pool, m, seed, projection_dim);
  bank.rows.resize(static_cast<Eigen::Index>(m), dim);
  for (std::size_t i = 0; i < m; ++i)
    bank.rows.row(static_cast<Eigen::Index>(i)) = pool.row(static_cast<Eigen::Index>(picked[i]));
  bank.rebuild_index();
  return bank;
}

struct ScoreParams {
  int b = 3;                 // neighborhood size of the re-weight factor
  bool reweight = true;      // off = plain nearest-neighbor distance
  bool include_self = true;  // whether N_b(m*) contains m* itself
};

/// Per-row anomaly scores for `test_features` (raw, unnormalized; the
/// bank's frozen block scales are applied here).
inline std::vector<double> point_scores(const MemoryBank& bank, const FeatureSet& test_features,
                                        const ScoreParams& params = {}) {
  if (test_features.kind != bank.kind) throw Error("point_scores: feature kind mismatch");
  if (test_features.matrix.cols() != static_cast<Eigen::Index>(bank.dim()))
    throw Error("point_scores: feature dimension mismatch");
  if (params.b < 2) throw Error("point_scores: b must be >= 2");
  if (bank.size() < static_cast<std::size_t>(params.b))
    throw Error("point_scores: bank smaller than b");
  if (!bank.index) throw Error("point_scores: bank has no index");

  const Eigen::MatrixXd queries = bank.normalize(test_features.matrix);
  const std::size_t n = static_cast<std::size_t>(queries.rows());
  const std::size_t d = static_cast<std::size_t>(queries.cols());
  std::vector<double> scores(n);

  // b-neighborhoods of bank rows, computed once per distinct m*.
  std::unordered_map<std::size_t, std::vector<std::size_t>> hood_cache;
  std::vector<double> q(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) q[j] = queries(static_cast<Eigen::Index>(i), j);
    const Neighbor nearest = bank.index->knn(q.data(), 1)[0];
    const double d_star = nearest.distance;
    if (!params.reweight) {
      scores[i] = d_star;
      continue;
    }
    auto it = hood_cache.find(nearest.index);
    if (it == hood_cache.end()) {
      const std::size_t want = params.include_self ? static_cast<std::size_t>(params.b)
                                                   : static_cast<std::size_t>(params.b) + 1;
      const Eigen::RowVectorXd center = bank.rows.row(static_cast<Eigen::Index>(nearest.index));
      const auto nbrs = bank.index->knn(center.data(), std::min(want, bank.size()));
      std::vector<std::size_t> hood;
      for (const Neighbor& nb : nbrs) {
        if (!params.include_self && nb.index == nearest.index) continue;
        hood.push_back(nb.index);
        if (hood.size() == static_cast<std::size_t>(params.b)) break;
      }
      it = hood_cache.emplace(nearest.index, std::move(hood)).first;
    }
    const std::vector<std::size_t>& hood = it->second;

    double d_max = d_star;
    std::vector<double> dists(hood.size());
    for (std::size_t h = 0; h < hood.size(); ++h) {
      dists[h] = (queries.row(static_cast<Eigen::Index>(i)) -
                  bank.rows.row(static_cast<Eigen::Index>(hood[h])))
                     .norm();
      if (dists[h] > d_max) d_max = dists[h];
    }
    double denom = 0.0;
    for (const double dist : dists) denom += std::exp(dist - d_max);
    const double factor = 1.0 - std::exp(d_star - d_max) / denom;
    scores[i] = factor * d_star;
  }
  return scores;
}

inline double object_score(const std::vector<double>& per_point_scores) {
  if (per_point_scores.empty()) throw Error("object_score: empty score vector");
  double best = per_point_scores[0];
  for (const double s : per_point_scores) best = std::max(best, s);
  return best;
}

/// Per-point scores aligned to a cloud, plus the object-level score.
struct ScoreVector {
  std::vector<std::size_t> point_indices;
  std::vector<double> scores;
  double object = 0.0;
};

/// Z-scores a channel over its points; the object score is transformed with
/// the same affine map. A constant channel becomes all-zero.
inline ScoreVector standardize_scores(const ScoreVector& sv) {
  ScoreVector out = sv;
  if (sv.scores.empty()) throw Error("standardize_scores: empty channel");
  const double n = static_cast<double>(sv.scores.size());
  const double mean = std::accumulate(sv.scores.begin(), sv.scores.end(), 0.0) / n;
  double var = 0.0;
  for (const double s : sv.scores) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / n);
  if (sd < 1e-15) {
    std::fill(out.scores.begin(), out.scores.end(), 0.0);
    out.object = 0.0;
    return out;
  }
  for (double& s : out.scores) s = (s - mean) / sd;
  out.object = (sv.object - mean) / sd;
  return out;
}

/// s_t = (s_l + s_g) / 2 per point; object score is the mean of the two
/// channel object scores. With standardize, each channel is z-scored
/// (over its points) before averaging.
inline ScoreVector combine_dual(const ScoreVector& local, const ScoreVector& global,
                                bool standardize = false) {
  if (local.point_indices != global.point_indices)
    throw Error("combine_dual: channel point alignment mismatch");
  const ScoreVector l = standardize ? standardize_scores(local) : local;
  const ScoreVector g = standardize ? standardize_scores(global) : global;
  ScoreVector out;
  out.point_indices = l.point_indices;
  out.scores.resize(l.scores.size());
  for (std::size_t i = 0; i < l.scores.size(); ++i) out.scores[i] = 0.5 * (l.scores[i] + g.scores[i]);
  out.object = 0.5 * (l.object + g.object);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: self-describing binary container plus a debug text form.
// Layout (little-endian): magic "PCADBANK", u32 version, u8 kind, u64 D,
// u64 M, u32 block count, i32 dims, f64 scales, feature params, u32 source
// count with length-prefixed strings, then M*D f64 row-major row data.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("bank load: truncated file");
  return v;
}

}  // namespace detail

inline void save_bank(const MemoryBank& bank, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_bank: cannot open " + path.string());
  out.write("PCADBANK", 8);
  detail::put<std::uint32_t>(out, 1);
  detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(bank.kind));
  detail::put<std::uint64_t>(out, bank.dim());
  detail::put<std::uint64_t>(out, bank.size());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(bank.block_dims.size()));
  for (const int d : bank.block_dims) detail::put<std::int32_t>(out, d);
  for (const double s : bank.block_scales) detail::put<double>(out, s);
  detail::put<double>(out, bank.feature_params.fpfh_radius);
  detail::put<double>(out, bank.feature_params.pooling_radius);
  detail::put<std::int32_t>(out, bank.feature_params.normal_k);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(bank.sources.size()));
  for (const std::string& s : bank.sources) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  for (Eigen::Index i = 0; i < bank.rows.rows(); ++i)
    for (Eigen::Index j = 0; j < bank.rows.cols(); ++j) detail::put<double>(out, bank.rows(i, j));
  if (!out) throw IoError("save_bank: write failure on " + path.string());
}

inline MemoryBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_bank: cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "PCADBANK", 8) != 0)
    throw IoError("load_bank: bad magic in " + path.string());
  const auto version = detail::get<std::uint32_t>(in);
  if (version != 1) throw IoError("load_bank: unsupported version");
  MemoryBank bank;
  bank.kind = static_cast<FeatureKind>(detail::get<std::uint8_t>(in));
  const auto dim = detail::get<std::uint64_t>(in);
  const auto m = detail::get<std::uint64_t>(in);
  const auto n_blocks = detail::get<std::uint32_t>(in);
  bank.block_dims.resize(n_blocks);
  for (auto& d : bank.block_dims) d = detail::get<std::int32_t>(in);
  bank.block_scales.resize(n_blocks);
  for (auto& s : bank.block_scales) s = detail::get<double>(in);
  bank.feature_params.fpfh_radius = detail::get<double>(in);
  bank.feature_params.pooling_radius = detail::get<double>(in);
  bank.feature_params.normal_k = detail::get<std::int32_t>(in);
  const auto n_sources = detail::get<std::uint32_t>(in);
  bank.sources.resize(n_sources);
  for (auto& s : bank.sources) {
    const auto len = detail::get<std::uint32_t>(in);
    s.resize(len);
    in.read(s.data(), len);
    if (!in) throw IoError("load_bank: truncated source list");
  }
  bank.rows.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < bank.rows.rows(); ++i)
    for (Eigen::Index j = 0; j < bank.rows.cols(); ++j) bank.rows(i, j) = detail::get<double>(in);
  bank.rebuild_index();
  return bank;
}

/// Equivalent human-readable form, for inspection only.
inline void write_bank_text(const MemoryBank& bank, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_bank_text: cannot open " + path.string());
  out << "# memory bank\n";
  out << "kind " << to_string(bank.kind) << "\n";
  out << "rows " << bank.size() << "\n";
  out << "dim " << bank.dim() << "\n";
  out << "block_dims";
  for (const int d : bank.block_dims) out << " " << d;
  out << "\nblock_scales";
  char buf[64];
  for (const double s : bank.block_scales) {
    std::snprintf(buf, sizeof(buf), " %.17g", s);
    out << buf;
  }
  out << "\nsources";
  for (const std::string& s : bank.sources) out << " " << s;
  out << "\n";
  for (Eigen::Index i = 0; i < bank.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < bank.rows.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), j ? " %.17g" : "%.17g", bank.rows(i, j));
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace pcad
