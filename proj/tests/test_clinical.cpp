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
#include <string>
#include <vector>

#include "acu/clinical.hpp"
#include "acu/rng.hpp"
#include "acu/stats.hpp"

using namespace acu;

TEST_CASE("kaplan-meier hand fixture", "[clinical][km]") {
  // times 2,4,4,6; the 6 is censored. Steps: 3/4 at t=2, then 1/4 at t=4.
  KmCurve km = kaplan_meier({2, 4, 4, 6}, {1, 1, 1, 0});
  REQUIRE(km.points.size() == 2);

  CHECK(km.points[0].time == 2.0);
  CHECK(km.points[0].n_risk == 4);
  CHECK(km.points[0].n_event == 1);
  CHECK(km.points[0].survival == Catch::Approx(0.75).epsilon(1e-12));
  // Greenwood: S^2 * 1/(4*3).
  CHECK(km.points[0].variance ==
        Catch::Approx(0.75 * 0.75 / 12.0).epsilon(1e-12));

  CHECK(km.points[1].time == 4.0);
  CHECK(km.points[1].n_risk == 3);
  CHECK(km.points[1].n_event == 2);
  CHECK(km.points[1].survival == Catch::Approx(0.25).epsilon(1e-12));
  // Greenwood sum grows to 1/12 + 2/3.
  CHECK(km.points[1].variance ==
        Catch::Approx(0.25 * 0.25 * (1.0 / 12.0 + 2.0 / 3.0)).epsilon(1e-12));

  // The censored observation at t=6 adds no step.
  CHECK(km.survival_at(1.9) == 1.0);
  CHECK(km.survival_at(2.0) == Catch::Approx(0.75).epsilon(1e-12));
  CHECK(km.survival_at(5.0) == Catch::Approx(0.25).epsilon(1e-12));
  CHECK(km.survival_at(100.0) == Catch::Approx(0.25).epsilon(1e-12));

  for (const auto& p : km.points) {
    CHECK(p.lo >= 0.0);
    CHECK(p.lo <= p.survival + 1e-12);
    CHECK(p.survival <= p.hi + 1e-12);
    CHECK(p.hi <= 1.0);
  }
}

TEST_CASE("kaplan-meier with no events stays at one", "[clinical][km]") {
  KmCurve km = kaplan_meier({1, 2, 3}, {0, 0, 0});
  CHECK(km.points.empty());
  CHECK(km.survival_at(0.0) == 1.0);
  CHECK(km.survival_at(10.0) == 1.0);
}

TEST_CASE("kaplan-meier matches the ecdf complement when fully observed",
          "[clinical][km]") {
  Rng rng(505);
  std::vector<double> times;
  std::vector<int> events;
  for (int i = 0; i < 50; ++i) {
    times.push_back(static_cast<double>(rng.below(12)));  // plenty of ties
    events.push_back(1);
  }
  KmCurve km = kaplan_meier(times, events);
  double n = static_cast<double>(times.size());
  for (const auto& p : km.points) {
    double at_most = 0.0;
    for (double t : times) at_most += t <= p.time ? 1.0 : 0.0;
    CHECK(p.survival == Catch::Approx(1.0 - at_most / n).margin(1e-12));
  }
}

TEST_CASE("kaplan-meier input validation", "[clinical][km][errors]") {
  CHECK_THROWS_AS(kaplan_meier({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(kaplan_meier({1, 2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(kaplan_meier({-1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(kaplan_meier({1}, {2}), std::invalid_argument);
}

TEST_CASE("log-rank on identical groups is exactly null",
          "[clinical][logrank]") {
  SurvivalData g;
  Rng rng(99);
  for (int i = 0; i < 40; ++i) {
    g.times.push_back(std::floor(rng.uniform(0.0, 50.0)));
    g.events.push_back(rng.uniform() < 0.6 ? 1 : 0);
  }
  if (std::none_of(g.events.begin(), g.events.end(),
                   [](int e) { return e == 1; }))
    g.events[0] = 1;
  LogRankResult r = log_rank({g, g});
  CHECK(r.chi2 == 0.0);
  CHECK(r.p == 1.0);
  CHECK(r.df == 1);
}

TEST_CASE("log-rank two-group hand fixture", "[clinical][logrank]") {
  // O-E = 1/2 - 1/3 + 1/2 = 2/3, V = 1/4 + 2/9 + 1/4 = 13/18,
  // chi2 = (2/3)^2 / (13/18) = 8/13.
  SurvivalData a{{1.0, 2.0}, {1, 1}};
  SurvivalData b{{1.5, 3.0}, {1, 1}};
  LogRankResult r = log_rank({a, b});
  CHECK(r.df == 1);
  CHECK(r.chi2 == Catch::Approx(8.0 / 13.0).epsilon(1e-9));
  CHECK(r.p == Catch::Approx(chi_square_upper_tail(8.0 / 13.0, 1))
                   .epsilon(1e-12));
}

TEST_CASE("log-rank separates hazards that truly differ",
          "[clinical][logrank]") {
  Rng rng(606);
  SurvivalData slow, fast;
  for (int i = 0; i < 200; ++i) {
    slow.times.push_back(-std::log(1.0 - rng.uniform()));
    slow.events.push_back(1);
    fast.times.push_back(-std::log(1.0 - rng.uniform()) / 3.0);
    fast.events.push_back(1);
  }
  LogRankResult r = log_rank({slow, fast});
  CHECK(r.chi2 > 10.0);
  CHECK(r.p < 0.001);

  SECTION("three groups use two degrees of freedom") {
    LogRankResult r3 = log_rank({slow, fast, slow});
    CHECK(r3.df == 2);
    CHECK(r3.p < 0.001);
  }
}

TEST_CASE("log-rank input validation", "[clinical][logrank][errors]") {
  SurvivalData g{{1.0, 2.0}, {1, 0}};
  CHECK_THROWS_AS(log_rank({g}), std::invalid_argument);
  SurvivalData empty;
  CHECK_THROWS_WITH(log_rank({g, empty}),
                    Catch::Matchers::ContainsSubstring("zero at-risk mass"));
}

TEST_CASE("chi-square upper tail matches the textbook critical value",
          "[clinical][stats]") {
  CHECK(chi_square_upper_tail(3.841, 1) == Catch::Approx(0.050).margin(0.001));
  CHECK(chi_square_upper_tail(5.991, 2) == Catch::Approx(0.050).margin(0.001));
  CHECK(chi_square_upper_tail(0.0, 1) == 1.0);
  CHECK(chi_square_upper_tail(6.635, 1) == Catch::Approx(0.010).margin(0.001));
  // Monotone decreasing in the statistic.
  CHECK(chi_square_upper_tail(2.0, 1) > chi_square_upper_tail(3.0, 1));
  CHECK_THROWS_AS(chi_square_upper_tail(1.0, 0), std::invalid_argument);
}

TEST_CASE("wilson interval", "[clinical][stats]") {
  auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == Catch::Approx(0.4038).margin(5e-4));
  CHECK(hi == Catch::Approx(0.5962).margin(5e-4));

  auto [lo0, hi0] = wilson_interval(0, 10);
  CHECK(lo0 == Catch::Approx(0.0).margin(1e-12));
  CHECK(hi0 > 0.0);
  auto [lo1, hi1] = wilson_interval(10, 10);
  CHECK(hi1 == Catch::Approx(1.0).margin(1e-12));
  CHECK(lo1 < 1.0);

  for (int s = 0; s <= 20; ++s) {
    auto [l, h] = wilson_interval(s, 20);
    CHECK(l >= 0.0);
    CHECK(h <= 1.0);
    CHECK(l <= h);
  }
  CHECK_THROWS_AS(wilson_interval(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(wilson_interval(-1, 10), std::invalid_argument);
}

TEST_CASE("decision curve hand fixture", "[clinical][dca]") {
  // 30 true positives and 20 false positives above t=0.2, n=100:
  // NB = 0.30 - 0.20 * 0.25 = 0.25.
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) { scores.push_back(0.9); labels.push_back(1); }
  for (int i = 0; i < 20; ++i) { scores.push_back(0.9); labels.push_back(0); }
  for (int i = 0; i < 50; ++i) { scores.push_back(0.1); labels.push_back(0); }

  DecisionCurve dc = decision_curve(scores, labels, {0.2});
  REQUIRE(dc.thresholds.size() == 1);
  CHECK(dc.thresholds[0] == 0.2);
  CHECK(dc.nb_model[0] == Catch::Approx(0.25).margin(1e-9));
  CHECK(dc.nb_all[0] == Catch::Approx(0.3 - 0.7 * 0.25).margin(1e-9));
  CHECK(dc.nb_none[0] == 0.0);
}

TEST_CASE("decision curve identities on random data", "[clinical][dca]") {
  Rng rng(707);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    double prevalence = 0.0;
    int n = 50 + static_cast<int>(rng.below(150));
    for (int i = 0; i < n; ++i) {
      scores.push_back(rng.uniform());
      labels.push_back(rng.uniform() < 0.35 ? 1 : 0);
      prevalence += labels.back();
    }
    prevalence /= static_cast<double>(n);

    DecisionCurve dc = decision_curve(scores, labels, {1e-12, 0.3, 0.7});
    CAPTURE(trial, n);
    // Treat-none is identically zero; at a vanishing threshold both the
    // model and treat-all collapse to the prevalence.
    for (double nb : dc.nb_none) CHECK(nb == 0.0);
    CHECK(dc.nb_model[0] == Catch::Approx(prevalence).margin(1e-9));
    CHECK(dc.nb_all[0] == Catch::Approx(prevalence).margin(1e-9));
    // Net benefit can never beat perfect triage.
    for (double nb : dc.nb_model) CHECK(nb <= prevalence + 1e-12);
  }
}

TEST_CASE("decision curve grid handling", "[clinical][dca]") {
  std::vector<double> scores = {0.2, 0.8};
  std::vector<int> labels = {0, 1};
  DecisionCurve dc = decision_curve(scores, labels);
  REQUIRE(dc.thresholds.size() == 99);
  CHECK(dc.thresholds.front() == Catch::Approx(0.01).epsilon(1e-12));
  CHECK(dc.thresholds.back() == Catch::Approx(0.99).epsilon(1e-12));
  CHECK(std::is_sorted(dc.thresholds.begin(), dc.thresholds.end()));

  CHECK_THROWS_AS(decision_curve(scores, labels, {0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(decision_curve(scores, labels, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(decision_curve(scores, labels, {-0.3}),
                  std::invalid_argument);
}

TEST_CASE("calibration collapses constant scores into one bin",
          "[clinical][calibration]") {
  std::vector<double> scores(100, 0.5);
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 2);
  CalibrationCurve c = calibration(scores, labels, 10);
  REQUIRE(c.bins.size() == 1);
  CHECK(c.bins[0].n == 100);
  CHECK(c.bins[0].mean_predicted == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(c.bins[0].observed_rate == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(c.bins[0].ci_lo < 0.5);
  CHECK(c.bins[0].ci_hi > 0.5);
}

TEST_CASE("calibration recovers well-calibrated probabilities",
          "[clinical][calibration]") {
  Rng rng(808);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 10000; ++i) {
    double p = rng.uniform();
    scores.push_back(p);
    labels.push_back(rng.uniform() < p ? 1 : 0);
  }
  CalibrationCurve c = calibration(scores, labels, 10);
  int total = 0;
  for (const auto& bin : c.bins) {
    total += bin.n;
    CHECK(std::abs(bin.observed_rate - bin.mean_predicted) < 0.05);
    CHECK(bin.ci_lo <= bin.observed_rate + 1e-12);
    CHECK(bin.observed_rate <= bin.ci_hi + 1e-12);
  }
  CHECK(total == 10000);
  CHECK(c.bins.size() >= 8);  // near-uniform scores occupy nearly all bins

  for (const auto& [p, rate] : c.smoother) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
  }
  CHECK_FALSE(c.smoother.empty());

  CalibrationCurve plain = calibration(scores, labels, 10, false);
  CHECK(plain.smoother.empty());
}

TEST_CASE("calibration handles an event-free cohort",
          "[clinical][calibration]") {
  Rng rng(909);
  std::vector<double> scores;
  std::vector<int> labels(200, 0);
  for (int i = 0; i < 200; ++i) scores.push_back(rng.uniform(0.0, 0.3));
  CalibrationCurve c = calibration(scores, labels, 5);
  for (const auto& bin : c.bins) {
    CHECK(bin.observed_rate == 0.0);
    CHECK(bin.ci_lo == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("calibration input validation", "[clinical][calibration][errors]") {
  std::vector<double> s = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<int> y = {0, 1, 0, 1, 0};
  CHECK_THROWS_AS(calibration(s, y, 10), std::invalid_argument);
  CHECK_THROWS_AS(calibration(s, y, 1), std::invalid_argument);
  CHECK_THROWS_AS(calibration({}, {}, 2), std::invalid_argument);
  CHECK_THROWS_AS(calibration({0.1, 0.2}, {0, 2}, 2), std::invalid_argument);
}

TEST_CASE("tertile stratification", "[clinical][tertiles]") {
  SECTION("nine distinct scores split three ways") {
    std::vector<double> s = {9, 1, 8, 2, 7, 3, 6, 4, 5};
    TertileResult t = stratify_tertiles(s);
    CHECK(t.counts == std::array<int, 3>{3, 3, 3});
    CHECK(t.cut_low == 3.0);
    CHECK(t.cut_high == 6.0);
    CHECK_FALSE(t.degenerate);
    CHECK(t.assignment[0] == RiskGroup::high);    // 9
    CHECK(t.assignment[1] == RiskGroup::low);     // 1
    CHECK(t.assignment[3] == RiskGroup::low);     // 2
    CHECK(t.assignment[6] == RiskGroup::medium);  // 6 ties to the lower group
    CHECK(t.assignment[8] == RiskGroup::medium);  // 5
  }

  SECTION("large distinct input splits exactly evenly") {
    std::vector<double> s;
    Rng rng(111);
    for (int i = 0; i < 1386; ++i)
      s.push_back(static_cast<double>(i) + rng.uniform() * 0.5);
    std::vector<double> shuffled = s;
    for (size_t i = shuffled.size(); i-- > 1;)
      std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    TertileResult t = stratify_tertiles(shuffled);
    CHECK(t.counts == std::array<int, 3>{462, 462, 462});
  }

  SECTION("boundary ties fall to the lower-risk group") {
    TertileResult t = stratify_tertiles({5, 5, 5, 7, 9, 11});
    CHECK(t.counts == std::array<int, 3>{3, 1, 2});
    CHECK(t.assignment[2] == RiskGroup::low);
  }

  SECTION("constant scores are flagged degenerate") {
    TertileResult t = stratify_tertiles({2, 2, 2, 2});
    CHECK(t.degenerate);
    CHECK(t.counts == std::array<int, 3>{4, 0, 0});
  }

  SECTION("errors") {
    CHECK_THROWS_AS(stratify_tertiles({1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(stratify_tertiles({1, 2, std::nan("")}),
                    std::invalid_argument);
  }

  SECTION("group names") {
    CHECK(to_string(RiskGroup::low) == "low");
    CHECK(to_string(RiskGroup::medium) == "medium");
    CHECK(to_string(RiskGroup::high) == "high");
  }
}

TEST_CASE("population percentiles use midranks", "[clinical][fairness]") {
  std::vector<double> pct = population_percentiles({1, 1, 2});
  REQUIRE(pct.size() == 3);
  CHECK(pct[0] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(pct[1] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(pct[2] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(population_percentiles({}), std::invalid_argument);
}

TEST_CASE("subgroup ecdf", "[clinical][fairness]") {
  SECTION("a top-decile group concentrates at the right edge") {
    std::vector<double> scores;
    std::vector<std::string> tags;
    for (int i = 1; i <= 100; ++i) {
      scores.push_back(static_cast<double>(i));
      tags.push_back(i > 90 ? "flagged" : "rest");
    }
    auto groups = subgroup_ecdf(scores, tags);
    REQUIRE(groups.size() == 2);
    const SubgroupEcdf* flagged = nullptr;
    for (const auto& g : groups)
      if (g.group == "flagged") flagged = &g;
    REQUIRE(flagged != nullptr);
    REQUIRE(flagged->percentiles.size() == 10);
    CHECK(flagged->percentiles.front() ==
          Catch::Approx(0.91).epsilon(1e-12));
    CHECK(flagged->percentiles.back() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(flagged->ecdf.front() == Catch::Approx(0.1).epsilon(1e-12));
    CHECK(flagged->ecdf.back() == Catch::Approx(1.0).epsilon(1e-12));
  }

  SECTION("a uniformly drawn group tracks the diagonal") {
    Rng rng(222);
    std::vector<double> scores;
    std::vector<std::string> tags;
    for (int i = 0; i < 2000; ++i) {
      scores.push_back(rng.uniform());
      tags.push_back(rng.uniform() < 0.5 ? "a" : "b");
    }
    auto groups = subgroup_ecdf(scores, tags);
    for (const auto& g : groups) {
      double worst = 0.0;
      for (size_t i = 0; i < g.percentiles.size(); ++i)
        worst = std::max(worst, std::abs(g.ecdf[i] - g.percentiles[i]));
      CAPTURE(g.group);
      CHECK(worst < 0.1);
      CHECK(std::is_sorted(g.percentiles.begin(), g.percentiles.end()));
      CHECK(std::is_sorted(g.ecdf.begin(), g.ecdf.end()));
    }
  }

  SECTION("errors") {
    CHECK_THROWS_WITH(subgroup_ecdf({0.5}, {""}),
                      Catch::Matchers::ContainsSubstring("empty group tag"));
    CHECK_THROWS_AS(subgroup_ecdf({0.5, 0.6}, {"a"}), std::invalid_argument);
  }
}

TEST_CASE("p-value formatting", "[clinical][format]") {
  CHECK(format_p_value(0.0009) == "<0.001");
  CHECK(format_p_value(1e-31) == "<0.001");
  CHECK(format_p_value(0.001) == "0.001");
  CHECK(format_p_value(0.05) == "0.050");
  CHECK(format_p_value(0.5) == "0.500");
  CHECK(format_p_value(1.0) == "1.000");
}
