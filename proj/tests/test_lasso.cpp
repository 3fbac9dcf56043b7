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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "acu/cohort.hpp"
#include "acu/design.hpp"
#include "acu/lasso.hpp"
#include "acu/rng.hpp"
#include "acu/synthetic.hpp"
#include "acu/util.hpp"

using namespace acu;

namespace {

// Dense random logistic problem with a few informative columns.
struct Problem {
  Design design;
  std::vector<int> y;
  std::vector<int> rows;
};

Problem random_problem(int n, int p, std::uint64_t seed,
                       double signal = 1.0) {
  Rng rng(seed);
  DesignBuilder b;
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("shd_x" + std::to_string(j));
  b.add_shd_columns(names);
  std::vector<double> beta_true(static_cast<size_t>(p), 0.0);
  for (int j = 0; j < std::min(p, 5); ++j)
    beta_true[static_cast<size_t>(j)] = signal * (j % 2 ? -1.0 : 1.0);
  Problem out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(static_cast<size_t>(p));
    double score = 0.0;
    for (int j = 0; j < p; ++j) {
      x[static_cast<size_t>(j)] = rng.normal();
      score += beta_true[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
    }
    int row = b.add_row();
    b.set_dense(row, 0, x);
    out.y.push_back(rng.uniform() < sigmoid(score) ? 1 : 0);
    out.rows.push_back(row);
  }
  out.design = b.finish();
  out.design.compute_stats(out.rows);
  return out;
}

// Independent KKT oracle on the standardised scale, written from scratch
// against the stationarity conditions of the penalised objective.
double kkt_oracle_residual(const Design& d, const std::vector<int>& y,
                           const std::vector<int>& rows,
                           const LassoModel& m) {
  size_t p = d.names.size();
  std::vector<double> beta(p, 0.0);
  for (const auto& c : m.coefs) {
    auto it = std::find(d.names.begin(), d.names.end(), c.name);
    REQUIRE(it != d.names.end());
    beta[static_cast<size_t>(it - d.names.begin())] = c.value_std;
  }
  double n = static_cast<double>(rows.size());
  // Dense standardised matrix; fine at test sizes.
  std::vector<std::vector<double>> xs(rows.size(),
                                      std::vector<double>(p, 0.0));
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = d.rows[static_cast<size_t>(rows[i])];
    std::vector<double> dense(p, 0.0);
    for (auto [j, v] : row) dense[static_cast<size_t>(j)] = v;
    for (size_t j = 0; j < p; ++j)
      xs[i][j] = d.active[j] ? (dense[j] - d.mean[j]) / d.stddev[j] : 0.0;
  }
  std::vector<double> grad(p, 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    double s = m.intercept_std;
    for (size_t j = 0; j < p; ++j) s += beta[j] * xs[i][j];
    double resid = sigmoid(s) - y[static_cast<size_t>(rows[i])];
    for (size_t j = 0; j < p; ++j) grad[j] += resid * xs[i][j] / n;
  }
  double worst = 0.0;
  for (size_t j = 0; j < p; ++j) {
    if (!d.active[j]) continue;
    double v = beta[j] != 0.0
                   ? std::abs(grad[j] + m.lambda * (beta[j] > 0 ? 1 : -1))
                   : std::max(0.0, std::abs(grad[j]) - m.lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

TEST_CASE("soft threshold operator", "[lasso]") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-2.5, 1.0) == -1.5);
  CHECK(soft_threshold(0.0, 0.0) == 0.0);
  CHECK(soft_threshold(2.0, 0.0) == 2.0);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("penalties at or above the null threshold zero every coefficient",
          "[lasso]") {
  Problem pr = random_problem(120, 12, 21);
  double lmax = lambda_max(pr.design, pr.y, pr.rows);
  REQUIRE(lmax > 0.0);

  double ybar = 0.0;
  for (int i : pr.rows) ybar += pr.y[static_cast<size_t>(i)];
  ybar /= static_cast<double>(pr.rows.size());

  for (double lam : {lmax, 1.5 * lmax, 10.0 * lmax}) {
    CAPTURE(lam);
    LassoModel m = fit_lasso(pr.design, pr.y, lam, pr.rows);
    CHECK(m.coefs.empty());
    CHECK(m.status == FitStatus::converged);
    CHECK(m.intercept == Catch::Approx(logit(ybar)).epsilon(1e-12));
  }

  // Just below the threshold, at least one coefficient activates.
  LassoModel below = fit_lasso(pr.design, pr.y, 0.95 * lmax, pr.rows);
  CHECK_FALSE(below.coefs.empty());
}

TEST_CASE("fitted solutions satisfy the stationarity conditions", "[lasso]") {
  // Random problems at several penalties, verified against an oracle
  // residual computed independently of the solver.
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    Problem pr = random_problem(200, 50, seed);
    double lmax = lambda_max(pr.design, pr.y, pr.rows);
    for (double frac : {0.5, 0.1, 0.02}) {
      LassoModel m = fit_lasso(pr.design, pr.y, frac * lmax, pr.rows);
      CAPTURE(seed, frac, m.iterations);
      REQUIRE(m.status == FitStatus::converged);
      CHECK(m.kkt_residual <= 1e-6);
      CHECK(kkt_oracle_residual(pr.design, pr.y, pr.rows, m) <= 1e-6);
    }
  }
}

TEST_CASE("an unpenalised separable fit never claims convergence",
          "[lasso]") {
  DesignBuilder b;
  b.add_shd_columns({"shd_x"});
  int r0 = b.add_row();
  b.set_dense(r0, 0, {-1.0});
  int r1 = b.add_row();
  b.set_dense(r1, 0, {1.0});
  Design d = b.finish();
  std::vector<int> rows = {0, 1};
  d.compute_stats(rows);
  std::vector<int> y = {0, 1};

  // The optimum sits at infinity; the fit must stop on its iteration or
  // blow-up guard, never report a solved problem.
  LassoModel m = fit_lasso(d, y, 0.0, rows);
  CHECK(m.status != FitStatus::converged);

  // A warm start beyond the blow-up guard trips the divergence flag itself.
  LassoOptions opts;
  opts.warm_intercept = 2e3;
  opts.has_warm_intercept = true;
  LassoModel diverging = fit_lasso(d, y, 0.0, rows, opts);
  CHECK(diverging.status == FitStatus::diverged);
}

TEST_CASE("objective decreases monotonically under backtracking", "[lasso]") {
  Problem pr = random_problem(150, 20, 77);
  double lmax = lambda_max(pr.design, pr.y, pr.rows);
  LassoOptions opts;
  opts.record_objective = true;
  LassoModel m = fit_lasso(pr.design, pr.y, 0.1 * lmax, pr.rows, opts);
  REQUIRE(m.objective_trace.size() >= 2);
  for (size_t i = 1; i < m.objective_trace.size(); ++i) {
    CAPTURE(i);
    CHECK(m.objective_trace[i] <= m.objective_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("errors on degenerate inputs", "[lasso]") {
  Problem pr = random_problem(50, 5, 5);
  std::vector<int> ones(pr.y.size(), 1);
  CHECK_THROWS_AS(fit_lasso(pr.design, ones, 0.1, pr.rows),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_lasso(pr.design, pr.y, -0.5, pr.rows),
                  std::invalid_argument);
  std::vector<int> one_row = {0};
  CHECK_THROWS_AS(fit_lasso(pr.design, pr.y, 0.1, one_row),
                  std::invalid_argument);
}

TEST_CASE("predictions are invariant to column order", "[lasso]") {
  Problem pr = random_problem(80, 8, 13);
  double lmax = lambda_max(pr.design, pr.y, pr.rows);
  LassoModel m = fit_lasso(pr.design, pr.y, 0.1 * lmax, pr.rows);
  REQUIRE_FALSE(m.coefs.empty());

  // Same rows, columns stored in reverse order under the same names.
  size_t p = pr.design.names.size();
  Design rev;
  rev.names.assign(pr.design.names.rbegin(), pr.design.names.rend());
  rev.sources.assign(pr.design.sources.rbegin(), pr.design.sources.rend());
  rev.rows.resize(pr.design.rows.size());
  for (size_t i = 0; i < pr.design.rows.size(); ++i) {
    for (auto [j, v] : pr.design.rows[i])
      rev.rows[i].emplace_back(static_cast<int>(p) - 1 - j, v);
    std::sort(rev.rows[i].begin(), rev.rows[i].end());
  }
  rev.compute_stats(pr.rows);

  auto a = predict_many(m, pr.design, pr.rows);
  auto b = predict_many(m, rev, pr.rows);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    CHECK(a[i] == b[i]);  // bit-identical
  }
}

TEST_CASE("probability prediction fixtures", "[lasso]") {
  LassoModel m;
  m.intercept = 0.0;
  CHECK(predict_proba(m, {}) == 0.5);
  m.intercept = std::log(3.0);
  CHECK(predict_proba(m, {}) == Catch::Approx(0.75).epsilon(1e-12));

  m.coefs.push_back({"shd_a", FeatureSource::shd, 0.4, 0.8});
  double with_extra =
      predict_proba(m, {{"shd_a", 1.5}, {"shd_unused", 99.0}});
  double without_extra = predict_proba(m, {{"shd_a", 1.5}});
  CHECK(with_extra == without_extra);
  CHECK_THROWS_AS(predict_proba(m, {{"shd_b", 1.0}}), std::invalid_argument);
}

TEST_CASE("cross-validation grid search", "[lasso][cv]") {
  Problem pr = random_problem(200, 10, 31);
  double lmax = lambda_max(pr.design, pr.y, pr.rows);

  SECTION("degenerate grid above the threshold picks the null model") {
    std::vector<double> grid = {2.0 * lmax};
    CvResult cv = cv_grid_search(pr.design, pr.y, grid, pr.rows, 99);
    CHECK(cv.chosen_lambda == 2.0 * lmax);
    CHECK(cv.chosen_index == 0);
    CHECK_FALSE(cv.dedup_warning);
  }

  SECTION("duplicate grid entries are deduplicated with a warning") {
    std::vector<double> grid = {lmax, 0.5 * lmax, 0.5 * lmax, 0.1 * lmax};
    CvResult cv = cv_grid_search(pr.design, pr.y, grid, pr.rows, 99);
    CHECK(cv.dedup_warning);
    CHECK(cv.lambdas == std::vector<double>{lmax, 0.5 * lmax, 0.1 * lmax});
  }

  SECTION("fixed seed reproduces the result exactly") {
    auto grid = default_lambda_grid(lmax, 8, 0.05);
    CvResult a = cv_grid_search(pr.design, pr.y, grid, pr.rows, 1234);
    CvResult b = cv_grid_search(pr.design, pr.y, grid, pr.rows, 1234);
    CHECK(a.chosen_lambda == b.chosen_lambda);
    CHECK(a.mean_losses == b.mean_losses);
    CHECK(a.fold_losses == b.fold_losses);
    // And a different seed is allowed to move the losses.
    CvResult c = cv_grid_search(pr.design, pr.y, grid, pr.rows, 4321);
    CHECK(a.mean_losses != c.mean_losses);
  }

  SECTION("parallel fold evaluation matches serial") {
    auto grid = default_lambda_grid(lmax, 6, 0.05);
    CvResult serial =
        cv_grid_search(pr.design, pr.y, grid, pr.rows, 7, 10, false, 1);
    CvResult par =
        cv_grid_search(pr.design, pr.y, grid, pr.rows, 7, 10, false, 4);
    CHECK(serial.mean_losses == par.mean_losses);
    CHECK(serial.chosen_lambda == par.chosen_lambda);
  }

  SECTION("folds with a single validation class are flagged, not fatal") {
    // 5 positives across 10 stratified folds leaves >= 5 folds all-negative.
    Problem sparse_pos = random_problem(30, 4, 17, 0.0);
    int n_pos = 0;
    for (size_t i = 0; i < sparse_pos.y.size(); ++i)
      sparse_pos.y[i] = (i < 5) ? 1 : 0;
    for (int v : sparse_pos.y) n_pos += v;
    REQUIRE(n_pos == 5);
    auto grid = default_lambda_grid(
        lambda_max(sparse_pos.design, sparse_pos.y, sparse_pos.rows), 4, 0.1);
    CvResult cv = cv_grid_search(sparse_pos.design, sparse_pos.y, grid,
                                 sparse_pos.rows, 3);
    CHECK_FALSE(cv.single_class_val_folds.empty());
    for (double loss : cv.mean_losses) CHECK(std::isfinite(loss));
  }
}

TEST_CASE("stratified folds preserve class balance", "[lasso][cv]") {
  Problem pr = random_problem(200, 4, 61);
  auto folds = stratified_folds(pr.y, pr.rows, 10, 42);
  REQUIRE(folds.size() == pr.rows.size());
  std::vector<int> pos_per_fold(10, 0), n_per_fold(10, 0);
  int total_pos = 0;
  for (size_t i = 0; i < pr.rows.size(); ++i) {
    int f = folds[i];
    REQUIRE(f >= 0);
    REQUIRE(f < 10);
    ++n_per_fold[static_cast<size_t>(f)];
    if (pr.y[static_cast<size_t>(pr.rows[i])]) {
      ++pos_per_fold[static_cast<size_t>(f)];
      ++total_pos;
    }
  }
  for (int f = 0; f < 10; ++f) {
    CAPTURE(f);
    CHECK(std::abs(n_per_fold[static_cast<size_t>(f)] - 20) <= 1);
    CHECK(std::abs(pos_per_fold[static_cast<size_t>(f)] -
                   total_pos / 10.0) <= 1.0);
  }
}

TEST_CASE("cv-chosen penalty is sparser than a vanishing penalty",
          "[lasso][cv][synth]") {
  SyntheticConfig cfg = default_synthetic_config();
  cfg.n_patients = 300;
  cfg.seed = 19;
  GeneratedCohort g = generate_synthetic_cohort(cfg);
  DesignBuilder b;
  b.add_shd_columns(g.shd_names);
  std::vector<int> rows, y;
  for (const auto& r : g.records) {
    int row = b.add_row();
    b.set_dense(row, 0, r.shd);
    rows.push_back(row);
    y.push_back(make_binary_label(r.event_day, 180).value);
  }
  Design d = b.finish();
  d.compute_stats(rows);

  double lmax = lambda_max(d, y, rows);
  auto grid = default_lambda_grid(lmax, 10, 0.01);
  CvResult cv = cv_grid_search(d, y, grid, rows, 5);
  LassoModel chosen = fit_lasso(d, y, cv.chosen_lambda, rows);
  LassoModel tiny = fit_lasso(d, y, grid.back() / 100.0, rows);
  CHECK(chosen.coefs.size() < tiny.coefs.size());
}

TEST_CASE("default grid shape", "[lasso]") {
  auto grid = default_lambda_grid(2.0, 50, 1e-3);
  REQUIRE(grid.size() == 50);
  CHECK(grid.front() == 2.0);
  CHECK(grid.back() == Catch::Approx(2e-3).epsilon(1e-12));
  for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
}

TEST_CASE("counting structured-data coefficients", "[lasso]") {
  LassoModel m;
  m.design_has_shd = true;
  m.coefs.push_back({"shd_b", FeatureSource::shd, 0.5, 0.5});
  m.coefs.push_back({"w_pain", FeatureSource::language, -0.2, -0.2});
  CHECK(count_shd_used(m) == 1);

  LassoModel null_model;
  null_model.design_has_shd = true;
  CHECK(count_shd_used(null_model) == 0);

  LassoModel lang_only;
  lang_only.design_has_shd = false;
  lang_only.coefs.push_back({"w_pain", FeatureSource::language, 0.3, 0.3});
  CHECK(count_shd_used(lang_only) == std::nullopt);
}

TEST_CASE("top coefficient rankings", "[lasso]") {
  LassoModel m;
  m.coefs.push_back({"a", FeatureSource::language, 2.0, 2.0});
  m.coefs.push_back({"b", FeatureSource::language, -3.0, -3.0});
  m.coefs.push_back({"c", FeatureSource::language, 0.5, 0.5});

  auto top1 = top_coefficients(m, 1);
  REQUIRE(top1.highest.size() == 1);
  REQUIRE(top1.lowest.size() == 1);
  CHECK(top1.highest[0].name == "a");
  CHECK(top1.lowest[0].name == "b");

  auto top9 = top_coefficients(m, 9);
  CHECK(top9.highest.size() == 3);  // only the non-zeros exist
  CHECK(top9.lowest.size() == 3);
  CHECK(top9.highest[0].name == "a");
  CHECK(top9.lowest[0].name == "b");

  // Ties order lexicographically.
  LassoModel ties;
  ties.coefs.push_back({"z", FeatureSource::language, 1.0, 1.0});
  ties.coefs.push_back({"y", FeatureSource::language, 1.0, 1.0});
  auto t = top_coefficients(ties, 2);
  CHECK(t.highest[0].name == "y");
  CHECK(t.highest[1].name == "z");
}
