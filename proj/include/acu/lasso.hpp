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
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "acu/design.hpp"
#include "acu/rng.hpp"
#include "acu/util.hpp"

namespace acu {

inline double soft_threshold(double z, double t) {
  if (t < 0) throw std::invalid_argument("soft_threshold: t must be >= 0");
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

enum class FitStatus { converged, max_iters, diverged };

inline std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iters: return "max_iters";
    default: return "diverged";
  }
}
inline FitStatus fit_status_from_string(const std::string& s) {
  if (s == "converged") return FitStatus::converged;
  if (s == "max_iters") return FitStatus::max_iters;
  if (s == "diverged") return FitStatus::diverged;
  throw std::invalid_argument("unknown fit status: '" + s + "'");
}

struct LassoCoef {
  std::string name;
  FeatureSource source = FeatureSource::language;
  double value_std = 0.0;  // coefficient on the standardised column
  double value = 0.0;      // original-scale coefficient
};

struct LassoModel {
  double intercept = 0.0;      // original scale
  double intercept_std = 0.0;  // standardised scale
  std::vector<LassoCoef> coefs;  // non-zeros only, in design column order
  double lambda = 0.0;
  std::optional<double> c_equiv;  // 1/(lambda*n); inverse-penalty convention
  int horizon = 0;
  FitStatus status = FitStatus::converged;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool design_has_shd = false;
  std::uint64_t schema_hash = 0;
  std::vector<double> objective_trace;  // filled when requested
};

struct LassoOptions {
  int max_iters = 10000;
  double tol = 1e-7;      // sup-norm coefficient change
  double kkt_tol = 1e-6;  // subgradient optimality residual
  bool record_objective = false;
  const std::vector<double>* warm_start = nullptr;  // standardised betas
  double warm_intercept = 0.0;
  bool has_warm_intercept = false;
};

namespace detail {

// Shared state for one (design, rows, y) problem on the standardised scale.
// Sparse trick: standardised score = (b0 - sum beta_j mu_j / sd_j)
//                                  + sum over stored (j,v) of (beta_j/sd_j)*v.
struct LassoProblem {
  const Design& design;
  const std::vector<int>& rows;
  const std::vector<int>& y;
  double n;

  LassoProblem(const Design& d, const std::vector<int>& r,
               const std::vector<int>& labels)
      : design(d), rows(r), y(labels), n(static_cast<double>(r.size())) {}

  void scores(const std::vector<double>& beta, double b0,
              std::vector<double>& out) const {
    size_t p = design.names.size();
    std::vector<double> scaled(p, 0.0);
    double offset = b0;
    for (size_t j = 0; j < p; ++j) {
      if (!design.active[j] || beta[j] == 0.0) continue;
      scaled[j] = beta[j] / design.stddev[j];
      offset -= beta[j] * design.mean[j] / design.stddev[j];
    }
    out.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      double s = offset;
      for (const auto& [j, v] :
           design.rows[static_cast<size_t>(rows[i])])
        s += scaled[static_cast<size_t>(j)] * v;
      out[i] = s;
    }
  }

  // Mean logistic NLL: log(1+e^s) - y*s, averaged.
  double smooth_loss(const std::vector<double>& s) const {
    double f = 0.0;
    for (size_t i = 0; i < s.size(); ++i)
      f += log1pexp(s[i]) - (y[rows[i]] ? s[i] : 0.0);
    return f / n;
  }

  // Gradient of the mean NLL w.r.t. standardised coefficients + intercept.
  void gradient(const std::vector<double>& s, std::vector<double>& g,
                double& g0) const {
    size_t p = design.names.size();
    std::vector<double> colsum(p, 0.0);
    double rsum = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
      double r = sigmoid(s[i]) - static_cast<double>(y[rows[i]]);
      rsum += r;
      for (const auto& [j, v] :
           design.rows[static_cast<size_t>(rows[i])])
        colsum[static_cast<size_t>(j)] += r * v;
    }
    g.assign(p, 0.0);
    for (size_t j = 0; j < p; ++j)
      if (design.active[j])
        g[j] = (colsum[j] - rsum * design.mean[j]) / (design.stddev[j] * n);
    g0 = rsum / n;
  }
};

inline double kkt_residual_of(const Design& design,
                              const std::vector<double>& g, double g0,
                              const std::vector<double>& beta,
                              double lambda) {
  double res = std::abs(g0);
  for (size_t j = 0; j < beta.size(); ++j) {
    if (!design.active[j]) continue;
    double r = beta[j] != 0.0
                   ? std::abs(g[j] + (beta[j] > 0 ? lambda : -lambda))
                   : std::max(0.0, std::abs(g[j]) - lambda);
    res = std::max(res, r);
  }
  return res;
}

}  // namespace detail

// Smallest penalty that zeroes every coefficient: the sup-norm of the NLL
// gradient at the null model (intercept at the base rate).
inline double lambda_max(const Design& design, const std::vector<int>& y,
                         const std::vector<int>& rows) {
  if (!design.has_stats())
    throw std::invalid_argument("lambda_max: compute_stats first");
  double ybar = 0.0;
  for (int i : rows) ybar += y.at(static_cast<size_t>(i));
  ybar /= static_cast<double>(rows.size());
  size_t p = design.names.size();
  std::vector<double> colsum(p, 0.0);
  double rsum = 0.0;
  for (int i : rows) {
    double r = ybar - static_cast<double>(y[static_cast<size_t>(i)]);
    rsum += r;
    for (const auto& [j, v] : design.rows[static_cast<size_t>(i)])
      colsum[static_cast<size_t>(j)] += r * v;
  }
  double n = static_cast<double>(rows.size());
  double best = 0.0;
  for (size_t j = 0; j < p; ++j) {
    if (!design.active[j]) continue;
    double g = (colsum[j] - rsum * design.mean[j]) / (design.stddev[j] * n);
    best = std::max(best, std::abs(g));
  }
  return best;
}

inline std::vector<double> default_lambda_grid(double lam_max, int size = 50,
                                               double min_ratio = 1e-3) {
  if (size < 1) throw std::invalid_argument("grid size must be >= 1");
  if (!(min_ratio > 0 && min_ratio <= 1))
    throw std::invalid_argument("min_ratio must be in (0, 1]");
  std::vector<double> grid(static_cast<size_t>(size));
  for (int i = 0; i < size; ++i)
    grid[static_cast<size_t>(i)] =
        lam_max * std::pow(min_ratio,
                           size == 1 ? 0.0
                                     : static_cast<double>(i) /
                                           static_cast<double>(size - 1));
  return grid;
}

// Minimises (1/n) sum NLL + lambda * ||beta||_1 on standardised columns,
// intercept unpenalised, by proximal gradient with backtracking. Cold
// starts put the intercept at logit(ybar), which makes lambda >= lambda_max
// an exact fixed point: every coefficient stays identically zero.
inline LassoModel fit_lasso(const Design& design, const std::vector<int>& y,
                            double lambda, const std::vector<int>& rows,
                            const LassoOptions& opts = {}, int horizon = 0) {
  if (!(lambda >= 0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and >= 0");
  if (rows.size() < 2)
    throw std::invalid_argument("fit_lasso: need at least 2 rows");
  if (!design.has_stats())
    throw std::invalid_argument("fit_lasso: compute_stats first");
  int n_pos = 0;
  for (int i : rows) {
    int yi = y.at(static_cast<size_t>(i));
    if (yi != 0 && yi != 1)
      throw std::invalid_argument("labels must be 0/1");
    n_pos += yi;
  }
  if (n_pos == 0 || n_pos == static_cast<int>(rows.size()))
    throw std::invalid_argument("fit_lasso: labels are single-class");

  detail::LassoProblem prob(design, rows, y);
  size_t p = design.names.size();
  std::vector<double> beta(p, 0.0);
  double ybar = static_cast<double>(n_pos) / prob.n;
  double b0 = logit(clip(ybar, 1e-12, 1.0 - 1e-12));
  if (opts.warm_start) {
    if (opts.warm_start->size() != p)
      throw std::invalid_argument("warm start size mismatch");
    beta = *opts.warm_start;
    for (size_t j = 0; j < p; ++j)
      if (!design.active[j]) beta[j] = 0.0;
  }
  if (opts.has_warm_intercept) b0 = opts.warm_intercept;

  LassoModel model;
  model.lambda = lambda;
  model.horizon = horizon;
  model.design_has_shd = design.has_source(FeatureSource::shd);
  model.schema_hash = design.schema_hash();
  if (lambda > 0) model.c_equiv = 1.0 / (lambda * prob.n);

  std::vector<double> s, g, beta_new(p), s_new;
  double g0 = 0.0;
  double t = 1.0;
  double last_step = std::numeric_limits<double>::infinity();
  FitStatus status = FitStatus::max_iters;
  int iter = 0;
  double kkt = std::numeric_limits<double>::infinity();

  prob.scores(beta, b0, s);
  double f = prob.smooth_loss(s);

  auto l1 = [&](const std::vector<double>& b) {
    double v = 0.0;
    for (size_t j = 0; j < p; ++j) v += std::abs(b[j]);
    return v;
  };
  if (opts.record_objective)
    model.objective_trace.push_back(f + lambda * l1(beta));

  for (; iter < opts.max_iters; ++iter) {
    prob.gradient(s, g, g0);
    kkt = detail::kkt_residual_of(design, g, g0, beta, lambda);
    if (kkt <= 1e-8 || (last_step < opts.tol && kkt <= opts.kkt_tol)) {
      status = FitStatus::converged;
      break;
    }

    // backtracking prox step
    double b0_new = 0.0, f_new = 0.0;
    for (int halving = 0; halving < 64; ++halving) {
      double quad = 0.0, lin = 0.0;
      for (size_t j = 0; j < p; ++j) {
        if (!design.active[j]) {
          beta_new[j] = 0.0;
          continue;
        }
        beta_new[j] = soft_threshold(beta[j] - t * g[j], t * lambda);
        double d = beta_new[j] - beta[j];
        lin += g[j] * d;
        quad += d * d;
      }
      b0_new = b0 - t * g0;
      double d0 = b0_new - b0;
      lin += g0 * d0;
      quad += d0 * d0;
      prob.scores(beta_new, b0_new, s_new);
      f_new = prob.smooth_loss(s_new);
      if (f_new <= f + lin + quad / (2.0 * t) + 1e-15) break;
      t *= 0.5;
    }

    last_step = std::abs(b0_new - b0);
    for (size_t j = 0; j < p; ++j)
      last_step = std::max(last_step, std::abs(beta_new[j] - beta[j]));
    beta.swap(beta_new);
    b0 = b0_new;
    s.swap(s_new);
    f = f_new;
    t = std::min(t * 1.1, 10.0);
    if (opts.record_objective)
      model.objective_trace.push_back(f + lambda * l1(beta));

    if (lambda == 0.0) {
      double sup = 0.0;
      for (size_t j = 0; j < p; ++j) sup = std::max(sup, std::abs(beta[j]));
      if (sup > 1e3 || std::abs(b0) > 1e3) {
        status = FitStatus::diverged;
        ++iter;
        break;
      }
    }
  }

  if (status != FitStatus::converged) {
    prob.gradient(s, g, g0);
    kkt = detail::kkt_residual_of(design, g, g0, beta, lambda);
  }

  model.status = status;
  model.iterations = iter;
  model.kkt_residual = kkt;
  model.intercept_std = b0;
  double mean_shift = 0.0;
  for (size_t j = 0; j < p; ++j) {
    if (beta[j] == 0.0) continue;
    LassoCoef c;
    c.name = design.names[j];
    c.source = design.sources[j];
    c.value_std = beta[j];
    c.value = beta[j] / design.stddev[j];
    mean_shift += beta[j] * design.mean[j] / design.stddev[j];
    model.coefs.push_back(std::move(c));
  }
  model.intercept = b0 - mean_shift;
  return model;
}

// Standardised coefficient vector aligned to a design's columns; used for
// warm starts along a lambda path.
inline std::vector<double> dense_beta(const LassoModel& model,
                                      const Design& design) {
  std::unordered_map<std::string, size_t> pos;
  for (size_t j = 0; j < design.names.size(); ++j) pos[design.names[j]] = j;
  std::vector<double> beta(design.names.size(), 0.0);
  for (const auto& c : model.coefs) {
    auto it = pos.find(c.name);
    if (it == pos.end())
      throw std::invalid_argument("dense_beta: column " + c.name +
                                  " not in design");
    beta[it->second] = c.value_std;
  }
  return beta;
}

// sigmoid(intercept + beta . x) using original-scale coefficients; the
// coefficient iteration order is the model's own, so column permutations of
// the target design cannot perturb the floating-point sum.
inline std::vector<double> predict_many(const LassoModel& model,
                                        const Design& design,
                                        const std::vector<int>& rows) {
  std::unordered_map<std::string, int> pos;
  for (size_t j = 0; j < design.names.size(); ++j)
    pos[design.names[j]] = static_cast<int>(j);
  std::vector<std::pair<int, double>> cols;
  cols.reserve(model.coefs.size());
  for (const auto& c : model.coefs) {
    auto it = pos.find(c.name);
    if (it == pos.end())
      throw std::invalid_argument("predict: design lacks column " + c.name);
    cols.emplace_back(it->second, c.value);
  }
  std::vector<double> out;
  out.reserve(rows.size());
  for (int i : rows) {
    const auto& row = design.rows.at(static_cast<size_t>(i));
    double score = model.intercept;
    for (const auto& [col, coef] : cols) {
      auto it = std::lower_bound(
          row.begin(), row.end(), col,
          [](const std::pair<int, double>& e, int c) { return e.first < c; });
      if (it != row.end() && it->first == col) score += coef * it->second;
    }
    out.push_back(sigmoid(score));
  }
  return out;
}

inline double predict_proba(const LassoModel& model,
                            const std::unordered_map<std::string, double>& row) {
  double score = model.intercept;
  for (const auto& c : model.coefs) {
    auto it = row.find(c.name);
    if (it == row.end())
      throw std::invalid_argument("predict: row lacks feature " + c.name);
    score += c.value * it->second;
  }
  return sigmoid(score);
}

// N/A (nullopt) when the design carried no SHD columns at all.
inline std::optional<int> count_shd_used(const LassoModel& model) {
  if (!model.design_has_shd) return std::nullopt;
  int n = 0;
  for (const auto& c : model.coefs)
    if (c.source == FeatureSource::shd && c.value_std != 0.0) ++n;
  return n;
}

struct TopCoefficients {
  std::vector<LassoCoef> highest;  // largest signed standardised coefs, desc
  std::vector<LassoCoef> lowest;   // smallest signed, asc
};

inline TopCoefficients top_coefficients(const LassoModel& model, int k) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  auto sorted = model.coefs;
  std::sort(sorted.begin(), sorted.end(),
            [](const LassoCoef& a, const LassoCoef& b) {
              if (a.value_std != b.value_std) return a.value_std > b.value_std;
              return a.name < b.name;
            });
  TopCoefficients out;
  size_t kk = std::min<size_t>(sorted.size(), static_cast<size_t>(k));
  out.highest.assign(sorted.begin(), sorted.begin() + kk);
  out.lowest.assign(sorted.rbegin(), sorted.rbegin() + kk);
  return out;
}

struct CvResult {
  std::vector<double> lambdas;  // descending, deduplicated
  std::vector<std::vector<double>> fold_losses;  // [lambda][fold]
  std::vector<double> mean_losses;
  double chosen_lambda = 0.0;
  int chosen_index = -1;
  bool one_se_rule = false;
  bool dedup_warning = false;
  std::vector<int> single_class_val_folds;
  std::vector<int> degenerate_train_folds;
  std::uint64_t seed = 0;
  int n_folds = 10;
};

// Stratified, seeded fold assignment: each class is shuffled then dealt
// round-robin, so fold class balance is preserved within +-1.
inline std::vector<int> stratified_folds(const std::vector<int>& y,
                                         const std::vector<int>& rows,
                                         int n_folds, std::uint64_t seed) {
  std::vector<int> pos, neg;
  for (int i : rows)
    (y.at(static_cast<size_t>(i)) ? pos : neg).push_back(i);
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::unordered_map<int, int> fold_of;
  int counter = 0;
  for (int i : pos) fold_of[i] = counter++ % n_folds;
  counter = 0;
  for (int i : neg) fold_of[i] = counter++ % n_folds;
  std::vector<int> folds;
  folds.reserve(rows.size());
  for (int i : rows) folds.push_back(fold_of[i]);
  return folds;
}

inline double clipped_logloss(const std::vector<double>& p,
                              const std::vector<int>& y,
                              const std::vector<int>& rows) {
  double loss = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    double pi = clip(p[i], 1e-12, 1.0 - 1e-12);
    loss += y[static_cast<size_t>(rows[i])] ? -std::log(pi)
                                            : -std::log(1.0 - pi);
  }
  return loss / static_cast<double>(rows.size());
}

inline CvResult cv_grid_search(const Design& design, const std::vector<int>& y,
                               std::vector<double> grid,
                               const std::vector<int>& rows,
                               std::uint64_t seed, int n_folds = 10,
                               bool one_se_rule = false, int jobs = 1,
                               const LassoOptions& fit_opts = {}) {
  if (grid.empty()) throw std::invalid_argument("cv: empty lambda grid");
  for (double l : grid)
    if (!(l >= 0) || !std::isfinite(l))
      throw std::invalid_argument("cv: lambda must be finite and >= 0");
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  CvResult result;
  auto dedup_end = std::unique(grid.begin(), grid.end());
  result.dedup_warning = dedup_end != grid.end();
  grid.erase(dedup_end, grid.end());
  result.lambdas = grid;
  result.seed = seed;
  result.n_folds = n_folds;
  result.one_se_rule = one_se_rule;
  if (n_folds < 2) throw std::invalid_argument("cv: need >= 2 folds");
  if (static_cast<int>(rows.size()) < n_folds)
    throw std::invalid_argument("cv: fewer rows than folds");

  std::vector<int> folds = stratified_folds(y, rows, n_folds, seed);
  size_t n_lambda = grid.size();
  result.fold_losses.assign(n_lambda, std::vector<double>(
                                          static_cast<size_t>(n_folds), 0.0));
  std::vector<char> val_single(static_cast<size_t>(n_folds), 0);
  std::vector<char> train_single(static_cast<size_t>(n_folds), 0);

  parallel_for(n_folds, jobs, [&](int f) {
    std::vector<int> train_rows, val_rows;
    for (size_t i = 0; i < rows.size(); ++i)
      (folds[i] == f ? val_rows : train_rows).push_back(rows[i]);
    int val_pos = 0, train_pos = 0;
    for (int i : val_rows) val_pos += y[static_cast<size_t>(i)];
    for (int i : train_rows) train_pos += y[static_cast<size_t>(i)];
    if (val_pos == 0 || val_pos == static_cast<int>(val_rows.size()))
      val_single[static_cast<size_t>(f)] = 1;
    if (train_pos == 0 || train_pos == static_cast<int>(train_rows.size())) {
      // degenerate: constant base-rate prediction for every lambda
      train_single[static_cast<size_t>(f)] = 1;
      double pbar = clip(train_rows.empty()
                             ? 0.5
                             : static_cast<double>(train_pos) /
                                   static_cast<double>(train_rows.size()),
                         1e-12, 1.0 - 1e-12);
      std::vector<double> p(val_rows.size(), pbar);
      for (size_t li = 0; li < n_lambda; ++li)
        result.fold_losses[li][static_cast<size_t>(f)] =
            clipped_logloss(p, y, val_rows);
      return;
    }
    LassoOptions opts = fit_opts;
    std::vector<double> warm;
    double warm_b0 = 0.0;
    bool have_warm = false;
    for (size_t li = 0; li < n_lambda; ++li) {
      if (have_warm) {
        opts.warm_start = &warm;
        opts.warm_intercept = warm_b0;
        opts.has_warm_intercept = true;
      }
      LassoModel m = fit_lasso(design, y, grid[li], train_rows, opts);
      warm = dense_beta(m, design);
      warm_b0 = m.intercept_std;
      have_warm = true;
      auto p = predict_many(m, design, val_rows);
      result.fold_losses[li][static_cast<size_t>(f)] =
          clipped_logloss(p, y, val_rows);
    }
  });

  for (int f = 0; f < n_folds; ++f) {
    if (val_single[static_cast<size_t>(f)])
      result.single_class_val_folds.push_back(f);
    if (train_single[static_cast<size_t>(f)])
      result.degenerate_train_folds.push_back(f);
  }

  result.mean_losses.resize(n_lambda);
  for (size_t li = 0; li < n_lambda; ++li) {
    double m = 0.0;
    for (double v : result.fold_losses[li]) m += v;
    result.mean_losses[li] = m / static_cast<double>(n_folds);
  }
  // ties keep the earliest (largest) lambda
  size_t best = 0;
  for (size_t li = 1; li < n_lambda; ++li)
    if (result.mean_losses[li] < result.mean_losses[best]) best = li;
  if (one_se_rule) {
    double var = 0.0;
    for (double v : result.fold_losses[best]) {
      double d = v - result.mean_losses[best];
      var += d * d;
    }
    var /= static_cast<double>(n_folds) - 1.0;
    double se = std::sqrt(var / static_cast<double>(n_folds));
    double limit = result.mean_losses[best] + se;
    for (size_t li = 0; li <= best; ++li) {
      if (result.mean_losses[li] <= limit) {
        best = li;
        break;
      }
    }
  }
  result.chosen_index = static_cast<int>(best);
  result.chosen_lambda = result.lambdas[best];
  return result;
}

inline std::string cv_to_csv(const CvResult& cv) {
  CsvWriter w({"lambda", "fold", "val_logloss"});
  for (size_t li = 0; li < cv.lambdas.size(); ++li)
    for (int f = 0; f < cv.n_folds; ++f)
      w.append_row({fmt_double(cv.lambdas[li]), std::to_string(f),
                    fmt_double(cv.fold_losses[li][static_cast<size_t>(f)])});
  return w.str();
}

inline nlohmann::json lasso_model_to_json(const LassoModel& m) {
  nlohmann::json j;
  j["intercept"] = m.intercept;
  j["intercept_std"] = m.intercept_std;
  j["lambda"] = m.lambda;
  if (m.c_equiv)
    j["c_equiv"] = *m.c_equiv;
  else
    j["c_equiv"] = nullptr;
  j["horizon"] = m.horizon;
  j["status"] = to_string(m.status);
  j["iterations"] = m.iterations;
  j["kkt_residual"] = m.kkt_residual;
  j["design_has_shd"] = m.design_has_shd;
  j["schema_hash"] = hex64(m.schema_hash);
  nlohmann::json coefs = nlohmann::json::array();
  for (const auto& c : m.coefs)
    coefs.push_back({{"name", c.name},
                     {"source", to_string(c.source)},
                     {"value", c.value},
                     {"value_std", c.value_std}});
  j["coefficients"] = coefs;
  return j;
}

inline LassoModel lasso_model_from_json(const nlohmann::json& j) {
  LassoModel m;
  try {
    m.intercept = j.at("intercept").get<double>();
    m.intercept_std = j.at("intercept_std").get<double>();
    m.lambda = j.at("lambda").get<double>();
    if (!j.at("c_equiv").is_null()) m.c_equiv = j.at("c_equiv").get<double>();
    m.horizon = j.at("horizon").get<int>();
    m.status = fit_status_from_string(j.at("status").get<std::string>());
    m.iterations = j.at("iterations").get<int>();
    m.kkt_residual = j.at("kkt_residual").get<double>();
    m.design_has_shd = j.at("design_has_shd").get<bool>();
    m.schema_hash = std::stoull(j.at("schema_hash").get<std::string>(),
                                nullptr, 16);
    for (const auto& c : j.at("coefficients")) {
      LassoCoef coef;
      coef.name = c.at("name").get<std::string>();
      coef.source = feature_source_from_string(c.at("source").get<std::string>());
      coef.value = c.at("value").get<double>();
      coef.value_std = c.at("value_std").get<double>();
      m.coefs.push_back(std::move(coef));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("lasso model json: ") + e.what());
  }
  return m;
}

}  // namespace acu
