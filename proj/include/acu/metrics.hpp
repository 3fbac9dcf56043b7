// Copyright 2026 The Acurisk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "acu/rng.hpp"
#include "acu/util.hpp"

namespace acu {

namespace detail {

inline void check_scored(const std::vector<double>& scores,
                         const std::vector<int>& labels,
                         bool need_both_classes) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("metric: scores/labels length mismatch");
  if (scores.empty()) throw std::invalid_argument("metric: empty input");
  int pos = 0, neg = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("metric: labels must be 0/1");
    if (!std::isfinite(scores[i]))
      throw std::invalid_argument("metric: non-finite score");
    labels[i] == 1 ? ++pos : ++neg;
  }
  if (need_both_classes && (pos == 0 || neg == 0))
    throw std::invalid_argument("metric: needs both classes present");
}

}  // namespace detail

// Rank-based AUROC with midranks for ties: equals the probability a random
// positive outscores a random negative, ties counting one half.
inline double auroc(const std::vector<double>& scores,
                    const std::vector<int>& labels) {
  detail::check_scored(scores, labels, true);
  size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double rank_sum_pos = 0.0;
  double n_pos = 0.0, n_neg = 0.0;
  for (size_t k = 0; k < n; ++k) {
    if (labels[k] == 1) {
      rank_sum_pos += rank[k];
      n_pos += 1.0;
    } else {
      n_neg += 1.0;
    }
  }
  return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

// Average precision, processing equal scores as one block so ties cannot
// inflate the score.
inline double auprc(const std::vector<double>& scores,
                    const std::vector<int>& labels) {
  detail::check_scored(scores, labels, true);
  size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  double total_pos = 0.0;
  for (int l : labels) total_pos += l;
  double tp = 0.0, fp = 0.0, ap = 0.0, recall_prev = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (size_t k = i; k <= j; ++k)
      labels[order[k]] == 1 ? tp += 1.0 : fp += 1.0;
    double recall = tp / total_pos;
    double precision = tp / (tp + fp);
    ap += (recall - recall_prev) * precision;
    recall_prev = recall;
    i = j + 1;
  }
  return ap;
}

// Mean binary cross-entropy with probabilities clipped to [1e-12, 1-1e-12].
inline double cross_entropy(const std::vector<double>& probs,
                            const std::vector<int>& labels) {
  detail::check_scored(probs, labels, false);
  double loss = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    double p = clip(probs[i], 1e-12, 1.0 - 1e-12);
    loss += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(probs.size());
}

struct MetricWithCi {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int n_boot = 0;
  int skipped = 0;  // single-class resamples (when the metric needs both)
  std::uint64_t seed = 0;
};

namespace detail {

// Percentile with linear interpolation at q * (m - 1) over sorted values.
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty");
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = static_cast<size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// Nonparametric percentile bootstrap. Each resample draws its own RNG from
// derive_seed(seed, b), so resample b is reproducible independent of the
// others. Resamples that lose one class are skipped when the metric needs
// both; losing more than half of them is an error, not a wide interval.
inline MetricWithCi bootstrap_ci(
    const std::vector<double>& scores, const std::vector<int>& labels,
    const std::function<double(const std::vector<double>&,
                               const std::vector<int>&)>& metric,
    int n_boot, std::uint64_t seed, bool needs_both_classes = true) {
  if (n_boot < 1) throw std::invalid_argument("bootstrap: n_boot must be >= 1");
  detail::check_scored(scores, labels, needs_both_classes);
  MetricWithCi out;
  out.point = metric(scores, labels);
  out.n_boot = n_boot;
  out.seed = seed;

  size_t n = scores.size();
  std::vector<double> kept;
  kept.reserve(static_cast<size_t>(n_boot));
  std::vector<double> rs(n);
  std::vector<int> rl(n);
  for (int b = 0; b < n_boot; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    int pos = 0;
    for (size_t i = 0; i < n; ++i) {
      size_t pick = static_cast<size_t>(rng.below(static_cast<std::uint64_t>(n)));
      rs[i] = scores[pick];
      rl[i] = labels[pick];
      pos += rl[i];
    }
    if (needs_both_classes &&
        (pos == 0 || pos == static_cast<int>(n))) {
      ++out.skipped;
      continue;
    }
    kept.push_back(metric(rs, rl));
  }
  if (out.skipped * 2 > n_boot)
    throw std::runtime_error(
        "bootstrap: " + std::to_string(out.skipped) + " of " +
        std::to_string(n_boot) +
        " resamples were single-class; interval would be meaningless");
  std::sort(kept.begin(), kept.end());
  out.lo = detail::percentile_sorted(kept, 0.025);
  out.hi = detail::percentile_sorted(kept, 0.975);
  return out;
}

}  // namespace acu
