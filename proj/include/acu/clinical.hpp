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
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acu/stats.hpp"
#include "acu/util.hpp"

namespace acu {

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationBin {
  double mean_predicted = 0.0;
  double observed_rate = 0.0;
  int n = 0;
  double ci_lo = 0.0;  // Wilson 95%
  double ci_hi = 0.0;
};

struct CalibrationCurve {
  std::vector<CalibrationBin> bins;  // occupied bins only; counts sum to n
  std::vector<std::pair<double, double>> smoother;  // (p, smoothed rate)
};

namespace detail {

inline void check_probs_labels(const std::vector<double>& scores,
                               const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores/labels length mismatch");
  if (scores.empty()) throw std::invalid_argument("empty input");
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw std::invalid_argument("non-finite score");
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("labels must be 0/1");
  }
}

inline double interp_percentile(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = static_cast<size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// Quantile-binned reliability curve with Wilson intervals, plus a local
// constant smoother (tricube weights, bandwidth 0.1) on a 100-point grid.
// Scores sharing a quantile edge collapse into the lower bin, so constant
// scores occupy a single bin.
inline CalibrationCurve calibration(const std::vector<double>& scores,
                                    const std::vector<int>& labels,
                                    int n_bins,
                                    bool with_smoother = true) {
  detail::check_probs_labels(scores, labels);
  if (n_bins < 2) throw std::invalid_argument("calibration: n_bins must be >= 2");
  if (scores.size() < static_cast<size_t>(n_bins))
    throw std::invalid_argument("calibration: fewer samples than bins");

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;  // upper edge of bins 0..n_bins-2
  for (int k = 1; k < n_bins; ++k)
    edges.push_back(detail::interp_percentile(
        sorted, static_cast<double>(k) / static_cast<double>(n_bins)));

  std::vector<double> sum_pred(static_cast<size_t>(n_bins), 0.0);
  std::vector<int> count(static_cast<size_t>(n_bins), 0);
  std::vector<int> events(static_cast<size_t>(n_bins), 0);
  for (size_t i = 0; i < scores.size(); ++i) {
    size_t b = static_cast<size_t>(
        std::lower_bound(edges.begin(), edges.end(), scores[i]) -
        edges.begin());
    sum_pred[b] += scores[i];
    count[b] += 1;
    events[b] += labels[i];
  }

  CalibrationCurve out;
  for (int b = 0; b < n_bins; ++b) {
    size_t sb = static_cast<size_t>(b);
    if (count[sb] == 0) continue;
    CalibrationBin bin;
    bin.n = count[sb];
    bin.mean_predicted = sum_pred[sb] / static_cast<double>(count[sb]);
    bin.observed_rate =
        static_cast<double>(events[sb]) / static_cast<double>(count[sb]);
    auto [lo, hi] = wilson_interval(events[sb], count[sb]);
    bin.ci_lo = lo;
    bin.ci_hi = hi;
    out.bins.push_back(bin);
  }

  if (with_smoother) {
    const double bw = 0.1;
    for (int g = 0; g < 100; ++g) {
      double p = (static_cast<double>(g) + 0.5) / 100.0;
      double wsum = 0.0, ysum = 0.0;
      for (size_t i = 0; i < scores.size(); ++i) {
        double u = std::abs(scores[i] - p) / bw;
        if (u >= 1.0) continue;
        double t = 1.0 - u * u * u;
        double w = t * t * t;  // tricube
        wsum += w;
        ysum += w * static_cast<double>(labels[i]);
      }
      if (wsum > 0.0) out.smoother.emplace_back(p, ysum / wsum);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decision-curve analysis

struct DecisionCurve {
  std::vector<double> thresholds;
  std::vector<double> nb_model;
  std::vector<double> nb_all;
  std::vector<double> nb_none;  // identically zero, kept for the table
};

inline std::vector<double> default_dca_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 99; ++i) g.push_back(static_cast<double>(i) / 100.0);
  return g;
}

// Net benefit of treating at threshold t, classifying positive at
// score >= t: NB = TP/n - FP/n * t/(1-t), against treat-all and treat-none.
inline DecisionCurve decision_curve(const std::vector<double>& scores,
                                    const std::vector<int>& labels,
                                    std::vector<double> grid = {}) {
  detail::check_probs_labels(scores, labels);
  if (grid.empty()) grid = default_dca_grid();
  for (double t : grid)
    if (!(t > 0.0) || !(t < 1.0))
      throw std::invalid_argument("decision_curve: thresholds must lie in (0,1)");
  double n = static_cast<double>(scores.size());
  double prevalence = 0.0;
  for (int l : labels) prevalence += l;
  prevalence /= n;

  DecisionCurve out;
  for (double t : grid) {
    double tp = 0.0, fp = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) labels[i] == 1 ? tp += 1.0 : fp += 1.0;
    }
    double odds = t / (1.0 - t);
    out.thresholds.push_back(t);
    out.nb_model.push_back(tp / n - fp / n * odds);
    out.nb_all.push_back(prevalence - (1.0 - prevalence) * odds);
    out.nb_none.push_back(0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Risk tertiles

enum class RiskGroup { low = 0, medium = 1, high = 2 };

inline std::string to_string(RiskGroup g) {
  switch (g) {
    case RiskGroup::low: return "low";
    case RiskGroup::medium: return "medium";
    case RiskGroup::high: return "high";
  }
  return "low";
}

struct TertileResult {
  std::vector<RiskGroup> assignment;  // aligned with input order
  std::array<int, 3> counts = {0, 0, 0};
  double cut_low = 0.0;   // scores <= cut_low are low
  double cut_high = 0.0;  // scores <= cut_high (and > cut_low) are medium
  bool degenerate = false;  // all scores equal: everyone assigned low
};

// Tertile split with boundary ties assigned to the lower-risk group. Cuts
// sit at the order statistics closest to the 1/3 and 2/3 percentiles, so
// distinct scores give group sizes within one of each other.
inline TertileResult stratify_tertiles(const std::vector<double>& scores) {
  if (scores.size() < 3)
    throw std::invalid_argument("tertiles: need at least 3 scores");
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("tertiles: non-finite score");
  size_t n = scores.size();
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  size_t i1 = static_cast<size_t>(
      std::ceil(static_cast<double>(n) / 3.0)) - 1;
  size_t i2 = static_cast<size_t>(
      std::ceil(2.0 * static_cast<double>(n) / 3.0)) - 1;

  TertileResult out;
  out.cut_low = sorted[i1];
  out.cut_high = sorted[i2];
  out.degenerate = sorted.front() == sorted.back();
  out.assignment.reserve(n);
  for (double s : scores) {
    RiskGroup g = s <= out.cut_low    ? RiskGroup::low
                  : s <= out.cut_high ? RiskGroup::medium
                                      : RiskGroup::high;
    out.assignment.push_back(g);
    ++out.counts[static_cast<size_t>(g)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kaplan-Meier

struct KmPoint {
  double time = 0.0;
  int n_risk = 0;
  int n_event = 0;
  double survival = 1.0;
  double variance = 0.0;  // Greenwood
  double lo = 1.0;        // log-minus-log 95% band
  double hi = 1.0;
};

struct KmCurve {
  std::string label;
  std::vector<KmPoint> points;  // one per distinct event time, ascending

  // Step-function lookup; 1 before the first event time.
  double survival_at(double t) const {
    double s = 1.0;
    for (const auto& p : points) {
      if (p.time > t) break;
      s = p.survival;
    }
    return s;
  }
};

// Product-limit estimator with Greenwood variance and log(-log) confidence
// band. Events at a time are removed from the risk set before censorings at
// the same time.
inline KmCurve kaplan_meier(const std::vector<double>& times,
                            const std::vector<int>& events,
                            const std::string& label = "") {
  if (times.empty()) throw std::invalid_argument("kaplan_meier: empty input");
  if (times.size() != events.size())
    throw std::invalid_argument("kaplan_meier: times/events length mismatch");
  for (size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0))
      throw std::invalid_argument("kaplan_meier: negative time");
    if (events[i] != 0 && events[i] != 1)
      throw std::invalid_argument("kaplan_meier: event flags must be 0/1");
  }

  std::vector<size_t> order(times.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return times[a] < times[b]; });

  KmCurve curve;
  curve.label = label;
  const double z = 1.959963984540054;  // two-sided 95%
  double survival = 1.0;
  double greenwood_sum = 0.0;
  int at_risk = static_cast<int>(times.size());
  size_t i = 0;
  while (i < order.size()) {
    double t = times[order[i]];
    int d = 0, c = 0;
    size_t j = i;
    while (j < order.size() && times[order[j]] == t) {
      events[order[j]] == 1 ? ++d : ++c;
      ++j;
    }
    if (d > 0) {
      KmPoint pt;
      pt.time = t;
      pt.n_risk = at_risk;
      pt.n_event = d;
      survival *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      if (at_risk > d)
        greenwood_sum += static_cast<double>(d) /
                         (static_cast<double>(at_risk) *
                          static_cast<double>(at_risk - d));
      pt.survival = survival;
      pt.variance = survival * survival * greenwood_sum;
      if (survival <= 0.0) {
        pt.lo = pt.hi = 0.0;
      } else if (survival >= 1.0) {
        pt.lo = pt.hi = 1.0;
      } else {
        double log_s = std::log(survival);
        double se = std::sqrt(greenwood_sum) / std::abs(log_s);
        pt.lo = std::pow(survival, std::exp(z * se));
        pt.hi = std::pow(survival, std::exp(-z * se));
      }
      curve.points.push_back(pt);
    }
    at_risk -= d + c;
    i = j;
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Log-rank test

struct SurvivalData {
  std::vector<double> times;
  std::vector<int> events;
};

struct LogRankResult {
  double chi2 = 0.0;
  double p = 1.0;
  int df = 0;
};

namespace detail {

// Solve A x = b by Gaussian elimination with partial pivoting. Dimensions
// whose pivot vanishes must carry a vanishing residual (the covariance is
// rank-deficient only when the corresponding O-E is structurally zero).
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(b[pivot], b[col]);
    }
    if (std::abs(a[col][col]) < 1e-12) {
      if (std::abs(b[col]) < 1e-9) {
        a[col][col] = 1.0;
        b[col] = 0.0;
      } else {
        throw std::runtime_error("log_rank: singular covariance matrix");
      }
    }
    for (size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (size_t cc = col; cc < n; ++cc) a[r][cc] -= f * a[col][cc];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (size_t col = n; col-- > 0;) {
    double s = b[col];
    for (size_t cc = col + 1; cc < n; ++cc) s -= a[col][cc] * x[cc];
    x[col] = s / a[col][col];
  }
  return x;
}

}  // namespace detail

// Multi-group log-rank test: observed minus expected events under the pooled
// hazard, hypergeometric covariance over the first g-1 groups, chi-square
// with g-1 degrees of freedom.
inline LogRankResult log_rank(const std::vector<SurvivalData>& groups) {
  if (groups.size() < 2)
    throw std::invalid_argument("log_rank: need at least 2 groups");
  for (const auto& g : groups) {
    if (g.times.empty())
      throw std::invalid_argument("log_rank: group with zero at-risk mass");
    if (g.times.size() != g.events.size())
      throw std::invalid_argument("log_rank: times/events length mismatch");
  }
  size_t k = groups.size();

  std::vector<double> event_times;
  for (const auto& g : groups)
    for (size_t i = 0; i < g.times.size(); ++i)
      if (g.events[i] == 1) event_times.push_back(g.times[i]);
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()),
                    event_times.end());

  size_t m = k - 1;
  std::vector<double> diff(m, 0.0);  // observed - expected, groups 0..k-2
  std::vector<std::vector<double>> cov(m, std::vector<double>(m, 0.0));

  for (double t : event_times) {
    std::vector<double> at_risk(k, 0.0), died(k, 0.0);
    double total_risk = 0.0, total_died = 0.0;
    for (size_t j = 0; j < k; ++j) {
      for (size_t i = 0; i < groups[j].times.size(); ++i) {
        if (groups[j].times[i] >= t) at_risk[j] += 1.0;
        if (groups[j].times[i] == t && groups[j].events[i] == 1)
          died[j] += 1.0;
      }
      total_risk += at_risk[j];
      total_died += died[j];
    }
    if (total_risk <= 0.0) continue;
    for (size_t j = 0; j < m; ++j)
      diff[j] += died[j] - total_died * at_risk[j] / total_risk;
    if (total_risk > 1.0) {
      double f = total_died * (total_risk - total_died) /
                 (total_risk * total_risk * (total_risk - 1.0));
      for (size_t j = 0; j < m; ++j)
        for (size_t l = 0; l < m; ++l) {
          double kron = j == l ? 1.0 : 0.0;
          cov[j][l] += f * at_risk[j] * (kron * total_risk - at_risk[l]);
        }
    }
  }

  LogRankResult res;
  res.df = static_cast<int>(m);
  double max_diff = 0.0;
  for (double d : diff) max_diff = std::max(max_diff, std::abs(d));
  if (max_diff < 1e-12) {
    res.chi2 = 0.0;
    res.p = 1.0;
    return res;
  }
  std::vector<double> x = detail::solve_linear(cov, diff);
  double chi2 = 0.0;
  for (size_t j = 0; j < m; ++j) chi2 += diff[j] * x[j];
  res.chi2 = std::max(chi2, 0.0);
  res.p = chi_square_upper_tail(res.chi2, res.df);
  return res;
}

// Clinical convention: tiny p-values display with a floor.
inline std::string format_p_value(double p) {
  if (p < 0.001) return "<0.001";
  return fmt_fixed(p, 3);
}

// ---------------------------------------------------------------------------
// Subgroup fairness ECDFs

struct SubgroupEcdf {
  std::string group;
  std::vector<double> percentiles;  // distinct, ascending
  std::vector<double> ecdf;         // cumulative fraction at each percentile
};

// Percentile rank of each score within the whole population, midranks for
// ties, scaled to (0,1].
inline std::vector<double> population_percentiles(
    const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("percentiles: empty input");
  size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  std::vector<double> pct(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t r = i; r <= j; ++r)
      pct[order[r]] = mid / static_cast<double>(n);
    i = j + 1;
  }
  return pct;
}

// Per-group ECDF of population percentile ranks; a group drawn uniformly
// from the population tracks the diagonal.
inline std::vector<SubgroupEcdf> subgroup_ecdf(
    const std::vector<double>& scores, const std::vector<std::string>& tags) {
  if (scores.size() != tags.size())
    throw std::invalid_argument("subgroup_ecdf: scores/tags length mismatch");
  std::vector<double> pct = population_percentiles(scores);

  std::map<std::string, std::vector<double>> by_group;
  for (size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].empty())
      throw std::invalid_argument("subgroup_ecdf: empty group tag");
    by_group[tags[i]].push_back(pct[i]);
  }

  std::vector<SubgroupEcdf> out;
  for (auto& [name, vals] : by_group) {
    std::sort(vals.begin(), vals.end());
    SubgroupEcdf e;
    e.group = name;
    double msize = static_cast<double>(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) {
      bool last_of_run = i + 1 == vals.size() || vals[i + 1] != vals[i];
      if (last_of_run) {
        e.percentiles.push_back(vals[i]);
        e.ecdf.push_back(static_cast<double>(i + 1) / msize);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace acu
