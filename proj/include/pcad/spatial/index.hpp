// Exact nearest-neighbor and radius queries over N rows of dimension D.
//
// Low dimensions get a median-split kd-tree; high dimensions fall back to a
// linear scan (kd-trees stop pruning well past D ~ 16). Both paths share the
// same distance kernel and tie rule (equal distances break toward the lower
// row index), so results are a pure function of (rows, query).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pcad/common.hpp"
#include "pcad/core/point_cloud.hpp"

namespace pcad {

struct Neighbor {
  std::size_t index;
  double distance;
};

class SpatialIndex {
 public:
  /// Builds an immutable index over `n` rows of dimension `dim`, row-major.
  static SpatialIndex build(std::vector<double> rows, std::size_t dim) {
    if (dim == 0) throw Error("SpatialIndex: dimension must be >= 1");
    if (rows.empty() || rows.size() % dim != 0)
      throw Error("SpatialIndex: row data empty or not a multiple of dim");
    for (const double v : rows) {
      if (!std::isfinite(v)) throw Error("SpatialIndex: non-finite entry");
    }
    SpatialIndex idx;
    idx.data_ = std::move(rows);
    idx.dim_ = dim;
    idx.n_ = idx.data_.size() / dim;
    if (dim <= kMaxTreeDim) idx.build_tree();
    return idx;
  }

  static SpatialIndex build(const std::vector<Vec3>& points) {
    std::vector<double> rows;
    rows.reserve(points.size() * 3);
    for (const Vec3& p : points) {
      rows.push_back(p.x());
      rows.push_back(p.y());
      rows.push_back(p.z());
    }
    return build(std::move(rows), 3);
  }

  /// Rows of an N x D matrix.
  static SpatialIndex build(const Eigen::MatrixXd& m) {
    std::vector<double> rows(static_cast<std::size_t>(m.rows()) * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        rows[static_cast<std::size_t>(i) * m.cols() + j] = m(i, j);
    return build(std::move(rows), static_cast<std::size_t>(m.cols()));
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  const double* row(std::size_t i) const { return data_.data() + i * dim_; }

  /// The k exactly-nearest rows, ascending by (distance, row index).
  std::vector<Neighbor> knn(const double* q, std::size_t k) const {
    if (k < 1 || k > n_) throw Error("SpatialIndex::knn: k out of range [1, N]");
    Heap heap;
    heap.reserve(k);
    if (tree_.empty()) {
      for (std::size_t i = 0; i < n_; ++i) heap_push(heap, k, sq_dist(q, row(i)), i);
    } else {
      knn_recurse(0, q, k, heap);
    }
    std::sort(heap.begin(), heap.end(), entry_less);
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    for (const Entry& e : heap) out.push_back({e.index, std::sqrt(e.d2)});
    return out;
  }

  std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const { return knn(q.data(), k); }

  /// All rows with distance <= r (inclusive), ascending by (distance, index).
  std::vector<Neighbor> radius_search(const double* q, double r) const {
    if (r < 0.0) throw Error("SpatialIndex::radius_search: negative radius");
    std::vector<Entry> hits;
    // Pruning bound gets a hair of slack; membership is decided on the
    // returned quantity sqrt(d2) <= r.
    const double r2 = r * r * (1.0 + 1e-12) + 1e-300;
    if (tree_.empty()) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double d2 = sq_dist(q, row(i));
        if (std::sqrt(d2) <= r) hits.push_back({d2, i});
      }
    } else {
      radius_recurse(0, q, r, r2, hits);
    }
    std::sort(hits.begin(), hits.end(), entry_less);
    std::vector<Neighbor> out;
    out.reserve(hits.size());
    for (const Entry& e : hits) out.push_back({e.index, std::sqrt(e.d2)});
    return out;
  }

  std::vector<Neighbor> radius_search(const Vec3& q, double r) const {
    return radius_search(q.data(), r);
  }

 private:
  static constexpr std::size_t kMaxTreeDim = 8;
  static constexpr std::size_t kLeafSize = 16;

  struct Entry {
    double d2;
    std::size_t index;
  };
  using Heap = std::vector<Entry>;

  static bool entry_less(const Entry& a, const Entry& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
  }

  struct Node {
    double split = 0.0;
    std::uint32_t axis = 0;
    std::int32_t left = -1;   // child node ids, -1 for leaf
    std::int32_t right = -1;
    std::uint32_t begin = 0;  // range into perm_
    std::uint32_t end = 0;
  };

  double sq_dist(const double* a, const double* b) const {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double d = a[j] - b[j];
      s += d * d;
    }
    return s;
  }

  void build_tree() {
    perm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = static_cast<std::uint32_t>(i);
    tree_.reserve(2 * n_ / kLeafSize + 2);
    build_node(0, static_cast<std::uint32_t>(n_));
  }

  std::int32_t build_node(std::uint32_t begin, std::uint32_t end) {
    const std::int32_t id = static_cast<std::int32_t>(tree_.size());
    tree_.push_back({});
    tree_[id].begin = begin;
    tree_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    // Split on the axis with the widest extent over this range.
    std::uint32_t axis = 0;
    double best_spread = -1.0;
    for (std::uint32_t a = 0; a < dim_; ++a) {
      double lo = row(perm_[begin])[a], hi = lo;
      for (std::uint32_t i = begin + 1; i < end; ++i) {
        const double v = row(perm_[i])[a];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        axis = a;
      }
    }
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return row(a)[axis] < row(b)[axis]; });
    tree_[id].axis = axis;
    tree_[id].split = row(perm_[mid])[axis];
    const std::int32_t l = build_node(begin, mid);
    const std::int32_t r = build_node(mid, end);
    tree_[id].left = l;
    tree_[id].right = r;
    return id;
  }

  void heap_push(Heap& heap, std::size_t k, double d2, std::size_t index) const {
    const Entry e{d2, index};
    if (heap.size() < k) {
      heap.push_back(e);
      std::push_heap(heap.begin(), heap.end(), entry_less);
    } else if (entry_less(e, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), entry_less);
      heap.back() = e;
      std::push_heap(heap.begin(), heap.end(), entry_less);
    }
  }

  void knn_recurse(std::int32_t node_id, const double* q, std::size_t k, Heap& heap) const {
    const Node& node = tree_[node_id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = perm_[i];
        heap_push(heap, k, sq_dist(q, row(idx)), idx);
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    knn_recurse(near, q, k, heap);
    // An equal plane distance can still hide an equal-distance row with a
    // lower index, so only a strictly larger bound prunes.
    if (heap.size() < k || diff * diff <= heap.front().d2) knn_recurse(far, q, k, heap);
  }

  void radius_recurse(std::int32_t node_id, const double* q, double r, double r2,
                      std::vector<Entry>& hits) const {
    const Node& node = tree_[node_id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = perm_[i];
        const double d2 = sq_dist(q, row(idx));
        if (std::sqrt(d2) <= r) hits.push_back({d2, idx});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    radius_recurse(near, q, r, r2, hits);
    if (diff * diff <= r2) radius_recurse(far, q, r, r2, hits);
  }

  std::vector<double> data_;
  std::size_t dim_ = 0;
  std::size_t n_ = 0;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> tree_;
};

}  // namespace pcad
