// Threshold-free ranking metrics with exact tie handling.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "pcad/common.hpp"

namespace pcad {

namespace detail {

inline void check_metric_input(const std::vector<double>& scores,
                               const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  if (scores.empty()) throw MetricError("empty score vector");
  std::size_t pos = 0;
  for (const std::uint8_t l : labels) {
    if (l > 1) throw MetricError("labels must be binary");
    pos += l;
  }
  if (pos == 0 || pos == labels.size())
    throw MetricError("metric undefined: only one class present");
}

}  // namespace detail

/// AUROC as the Mann-Whitney statistic P(s_pos > s_neg) + 0.5 P(equal),
/// computed via average ranks so ties are exact.
inline double auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  detail::check_metric_input(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average rank
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Average precision over descending score thresholds, ties grouped at one
/// threshold: AP = sum_k (R_k - R_{k-1}) * P_k.
inline double aupr(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  detail::check_metric_input(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::size_t total_pos = 0;
  for (const std::uint8_t l : labels) total_pos += l;

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]])
        ++tp;
      else
        ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace pcad
