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

#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "acu/cohort.hpp"
#include "acu/synthetic.hpp"
#include "acu/util.hpp"

namespace fs = std::filesystem;
using namespace acu;

namespace {

// Scratch directory unique to this binary; removed on process exit is not
// guaranteed, so tests overwrite rather than assume absence.
fs::path scratch() {
  auto p = fs::temp_directory_path() / "acu_test_cohort";
  fs::create_directories(p);
  return p;
}

CohortRecord make_record(const std::string& id, std::optional<int> event_day,
                         Split split, std::vector<double> shd) {
  CohortRecord r;
  r.patient_id = id;
  r.age_at_chemo = 61.5;
  r.sex = "female";
  r.race = "white";
  r.ethnicity = "not_hispanic";
  r.insurance = "private";
  r.cancer_type = "breast";
  r.cancer_stage = "stage_ii";
  r.shd = std::move(shd);
  r.event_day = event_day;
  r.followup_days = 365;
  r.split = split;
  return r;
}

NoteDocument make_note(const std::string& note_id, const std::string& pid,
                       int offset_day, const std::string& text) {
  NoteDocument n;
  n.note_id = note_id;
  n.patient_id = pid;
  n.note_type = NoteType::progress;
  n.offset_day = offset_day;
  n.text = text;
  n.word_count = count_words(text);
  return n;
}

}  // namespace

TEST_CASE("ordinal label cut-points", "[cohort][labels]") {
  CHECK(make_ordinal_label(0).category == 1);
  CHECK(make_ordinal_label(20).category == 1);
  CHECK(make_ordinal_label(30).category == 1);
  CHECK(make_ordinal_label(31).category == 2);
  CHECK(make_ordinal_label(180).category == 2);
  CHECK(make_ordinal_label(181).category == 3);
  CHECK(make_ordinal_label(365).category == 3);
  CHECK(make_ordinal_label(366).category == 4);
  CHECK(make_ordinal_label(std::nullopt).category == 4);
  CHECK_THROWS_AS(make_ordinal_label(-1), std::invalid_argument);
}

TEST_CASE("binary label horizons", "[cohort][labels]") {
  CHECK(make_binary_label(100, 180).value == 1);
  CHECK(make_binary_label(100, 30).value == 0);
  CHECK(make_binary_label(30, 30).value == 1);
  CHECK(make_binary_label(31, 30).value == 0);
  CHECK(make_binary_label(std::nullopt, 365).value == 0);
  CHECK(make_binary_label(100, 180).horizon == 180);
  CHECK_THROWS_AS(make_binary_label(10, 90), std::invalid_argument);
  CHECK_THROWS_AS(make_binary_label(10, 0), std::invalid_argument);
}

TEST_CASE("binary and ordinal labels agree on every day", "[cohort][labels]") {
  // category <= k exactly when the k-th horizon's binary label fires, for
  // every event day and for the no-event case.
  const int horizons[3] = {30, 180, 365};
  auto check_one = [&](std::optional<int> day) {
    int cat = make_ordinal_label(day).category;
    for (int k = 0; k < 3; ++k) {
      int expect = cat <= k + 1 ? 1 : 0;
      REQUIRE(make_binary_label(day, horizons[k]).value == expect);
    }
  };
  for (int day = 0; day <= 1000; ++day) check_one(day);
  check_one(std::nullopt);
}

TEST_CASE("cohort round-trips through csv and jsonl", "[cohort][io]") {
  std::vector<std::string> shd_names = {"shd_alb", "shd_hgb"};
  std::vector<CohortRecord> recs;
  recs.push_back(make_record("P1", 12, Split::train, {3.5, 11.2}));
  recs.push_back(make_record("P2", std::nullopt, Split::test, {4.1, 13.0}));
  recs.push_back(make_record("P3", 200, Split::train, {2.9, 9.8}));
  std::vector<NoteDocument> notes;
  notes.push_back(make_note("P1-n1", "P1", -30, "Progress note, stable."));
  notes.push_back(make_note("P1-n2", "P1", -5, "Worsening pain reported."));
  notes.push_back(make_note("P2-n1", "P2", -100, "Routine follow up."));
  notes.push_back(make_note("P3-n1", "P3", -7, "Admitted with fever."));

  auto dir = scratch();
  auto csv_path = (dir / "cohort.csv").string();
  auto jsonl_path = (dir / "notes.jsonl").string();
  write_file(csv_path, cohort_to_csv(recs, shd_names));
  write_file(jsonl_path, notes_to_jsonl(notes));

  LoadResult lr = load_cohort(csv_path, jsonl_path);
  REQUIRE(lr.records.size() == 3);
  REQUIRE(lr.notes.size() == 4);
  CHECK(lr.shd_names == shd_names);
  CHECK(lr.dropped_noteless == 0);
  for (size_t i = 0; i < recs.size(); ++i) {
    CAPTURE(i);
    CHECK(lr.records[i].patient_id == recs[i].patient_id);
    CHECK(lr.records[i].event_day == recs[i].event_day);
    CHECK(lr.records[i].split == recs[i].split);
    CHECK(lr.records[i].shd == recs[i].shd);
    CHECK(lr.records[i].cancer_stage == recs[i].cancer_stage);
  }
  for (size_t i = 0; i < notes.size(); ++i) {
    CAPTURE(i);
    CHECK(lr.notes[i].note_id == notes[i].note_id);
    CHECK(lr.notes[i].text == notes[i].text);
    CHECK(lr.notes[i].offset_day == notes[i].offset_day);
  }
  // Notes attach to their patients in file order.
  CHECK(lr.records[0].note_ids == std::vector<std::string>{"P1-n1", "P1-n2"});

  // Loading with the matching explicit schema succeeds; a renamed column
  // fails.
  CHECK_NOTHROW(load_cohort(csv_path, jsonl_path, shd_names));
  CHECK_THROWS_WITH(load_cohort(csv_path, jsonl_path, {"shd_alb", "shd_wbc"}),
                    Catch::Matchers::ContainsSubstring("schema mismatch"));
}

TEST_CASE("noteless patients are dropped and counted", "[cohort][io]") {
  std::vector<std::string> shd_names = {"shd_alb"};
  std::vector<CohortRecord> recs;
  recs.push_back(make_record("P1", 12, Split::train, {3.5}));
  recs.push_back(make_record("P2", std::nullopt, Split::test, {4.1}));
  std::vector<NoteDocument> notes;
  notes.push_back(make_note("P1-n1", "P1", -30, "Stable."));

  auto dir = scratch();
  auto csv_path = (dir / "dropped.csv").string();
  auto jsonl_path = (dir / "dropped.jsonl").string();
  write_file(csv_path, cohort_to_csv(recs, shd_names));
  write_file(jsonl_path, notes_to_jsonl(notes));

  LoadResult lr = load_cohort(csv_path, jsonl_path);
  REQUIRE(lr.records.size() == 1);
  CHECK(lr.records[0].patient_id == "P1");
  CHECK(lr.dropped_noteless == 1);
}

TEST_CASE("load errors name the offending input", "[cohort][errors]") {
  auto dir = scratch();
  std::vector<std::string> shd_names = {"shd_alb", "shd_hgb"};
  std::vector<CohortRecord> recs;
  recs.push_back(make_record("P1", 12, Split::train, {3.5, 11.2}));
  auto csv_path = (dir / "err_cohort.csv").string();
  write_file(csv_path, cohort_to_csv(recs, shd_names));

  SECTION("missing file") {
    CHECK_THROWS(load_cohort((dir / "nope.csv").string(),
                             (dir / "nope.jsonl").string()));
  }

  SECTION("note referencing unknown patient names it") {
    auto jsonl_path = (dir / "err_unknown.jsonl").string();
    std::vector<NoteDocument> notes;
    notes.push_back(make_note("P1-n1", "P1", -10, "Fine."));
    notes.push_back(make_note("P99-n1", "P99", -10, "Ghost."));
    write_file(jsonl_path, notes_to_jsonl(notes));
    CHECK_THROWS_WITH(load_cohort(csv_path, jsonl_path),
                      Catch::Matchers::ContainsSubstring("P99"));
  }

  SECTION("short row reports its row index") {
    // A 760-column schema with one row carrying only 759 SHD values.
    std::vector<std::string> wide;
    for (int i = 0; i < 760; ++i)
      wide.push_back("shd_" + std::to_string(i));
    std::vector<CohortRecord> ok;
    ok.push_back(make_record("P1", 5, Split::train,
                             std::vector<double>(760, 0.0)));
    std::string csv = cohort_to_csv(ok, wide);
    // Drop the final field of the last data row (759 SHD values remain).
    auto cut = csv.find_last_of(',');
    REQUIRE(cut != std::string::npos);
    std::string broken = csv.substr(0, cut) + "\n";
    auto broken_path = (dir / "err_short.csv").string();
    write_file(broken_path, broken);
    auto jsonl_path = (dir / "err_short.jsonl").string();
    write_file(jsonl_path,
               notes_to_jsonl({make_note("P1-n1", "P1", -10, "Fine.")}));
    CHECK_THROWS_WITH(load_cohort(broken_path, jsonl_path),
                      Catch::Matchers::ContainsSubstring("row 2"));
  }

  SECTION("duplicate patient id rejected") {
    std::vector<CohortRecord> dup;
    dup.push_back(make_record("P1", 5, Split::train, {1.0, 2.0}));
    dup.push_back(make_record("P1", 9, Split::train, {1.0, 2.0}));
    auto dup_path = (dir / "err_dup.csv").string();
    write_file(dup_path, cohort_to_csv(dup, shd_names));
    auto jsonl_path = (dir / "err_dup.jsonl").string();
    write_file(jsonl_path,
               notes_to_jsonl({make_note("P1-n1", "P1", -10, "Fine.")}));
    CHECK_THROWS_WITH(load_cohort(dup_path, jsonl_path),
                      Catch::Matchers::ContainsSubstring("duplicate"));
  }

  SECTION("malformed numeric field reports row and column") {
    std::string csv = cohort_to_csv(recs, shd_names);
    auto pos = csv.find("61.5");
    REQUIRE(pos != std::string::npos);
    csv.replace(pos, 4, "oops");
    auto bad_path = (dir / "err_num.csv").string();
    write_file(bad_path, csv);
    auto jsonl_path = (dir / "err_num.jsonl").string();
    write_file(jsonl_path,
               notes_to_jsonl({make_note("P1-n1", "P1", -10, "Fine.")}));
    CHECK_THROWS_WITH(
        load_cohort(bad_path, jsonl_path),
        Catch::Matchers::ContainsSubstring("row 2") &&
            Catch::Matchers::ContainsSubstring("age_at_chemo"));
  }

  SECTION("event_day beyond followup rejected") {
    std::vector<CohortRecord> bad;
    bad.push_back(make_record("P1", 400, Split::train, {1.0, 2.0}));
    auto bad_path = (dir / "err_followup.csv").string();
    write_file(bad_path, cohort_to_csv(bad, shd_names));
    auto jsonl_path = (dir / "err_followup.jsonl").string();
    write_file(jsonl_path,
               notes_to_jsonl({make_note("P1-n1", "P1", -10, "Fine.")}));
    CHECK_THROWS_WITH(load_cohort(bad_path, jsonl_path),
                      Catch::Matchers::ContainsSubstring("followup"));
  }
}

TEST_CASE("generator is deterministic for a fixed seed", "[cohort][synth]") {
  SyntheticConfig cfg = default_synthetic_config();
  cfg.n_patients = 200;
  cfg.seed = 7;
  GeneratedCohort a = generate_synthetic_cohort(cfg);
  GeneratedCohort b = generate_synthetic_cohort(cfg);
  CHECK(cohort_to_csv(a.records, a.shd_names) ==
        cohort_to_csv(b.records, b.shd_names));
  CHECK(notes_to_jsonl(a.notes) == notes_to_jsonl(b.notes));

  // A different seed moves the bytes.
  cfg.seed = 8;
  GeneratedCohort c = generate_synthetic_cohort(cfg);
  CHECK(cohort_to_csv(a.records, a.shd_names) !=
        cohort_to_csv(c.records, c.shd_names));
}

TEST_CASE("generated event rates track the configured rates",
          "[cohort][synth]") {
  SyntheticConfig cfg = default_synthetic_config();
  cfg.n_patients = 5000;
  cfg.seed = 11;
  REQUIRE(cfg.event_rates[0] == 0.135);
  REQUIRE(cfg.event_rates[1] == 0.317);
  REQUIRE(cfg.event_rates[2] == 0.390);
  GeneratedCohort g = generate_synthetic_cohort(cfg);
  double n = static_cast<double>(g.records.size());
  double c30 = 0, c180 = 0, c365 = 0;
  for (const auto& r : g.records) {
    if (!r.event_day) continue;
    if (*r.event_day <= 30) ++c30;
    if (*r.event_day <= 180) ++c180;
    if (*r.event_day <= 365) ++c365;
  }
  CHECK(std::abs(c30 / n - 0.135) < 0.02);
  CHECK(std::abs(c180 / n - 0.317) < 0.02);
  CHECK(std::abs(c365 / n - 0.390) < 0.02);
}

TEST_CASE("generated cohort invariants", "[cohort][synth]") {
  SyntheticConfig cfg = default_synthetic_config();
  cfg.n_patients = 1000;
  cfg.seed = 3;
  GeneratedCohort g = generate_synthetic_cohort(cfg);

  SECTION("split is disjoint, exhaustive and 80/20 within one patient") {
    int n_train = 0, n_test = 0;
    for (const auto& r : g.records)
      (r.split == Split::train ? n_train : n_test)++;
    CHECK(n_train + n_test == cfg.n_patients);
    CHECK(std::abs(n_train - 800) <= 1);
    CHECK(std::abs(n_test - 200) <= 1);
  }

  SECTION("cumulative event counts are monotone in the horizon") {
    int c30 = 0, c180 = 0, c365 = 0;
    for (const auto& r : g.records) {
      if (!r.event_day) continue;
      if (*r.event_day <= 30) ++c30;
      if (*r.event_day <= 180) ++c180;
      if (*r.event_day <= 365) ++c365;
    }
    CHECK(c30 <= c180);
    CHECK(c180 <= c365);
  }

  SECTION("every patient has 1-3 notes and unique note ids") {
    std::map<std::string, int> per_patient;
    std::set<std::string> ids;
    for (const auto& n : g.notes) {
      ++per_patient[n.patient_id];
      CHECK(ids.insert(n.note_id).second);
      CHECK(n.offset_day >= -180);
      CHECK(n.offset_day <= -1);
    }
    for (const auto& r : g.records) {
      auto it = per_patient.find(r.patient_id);
      REQUIRE(it != per_patient.end());
      CHECK(it->second >= 1);
      CHECK(it->second <= 3);
    }
  }

  SECTION("event days respect follow-up windows") {
    for (const auto& r : g.records) {
      if (!r.event_day) continue;
      CHECK(*r.event_day >= 0);
      CHECK(*r.event_day <= r.followup_days);
    }
  }

  SECTION("generated files load back cleanly") {
    auto dir = scratch();
    auto csv_path = (dir / "synth.csv").string();
    auto jsonl_path = (dir / "synth.jsonl").string();
    write_file(csv_path, cohort_to_csv(g.records, g.shd_names));
    write_file(jsonl_path, notes_to_jsonl(g.notes));
    LoadResult lr = load_cohort(csv_path, jsonl_path);
    CHECK(lr.records.size() == g.records.size());
    CHECK(lr.notes.size() == g.notes.size());
    CHECK(lr.shd_names == g.shd_names);
  }
}

TEST_CASE("generator rejects invalid configs", "[cohort][synth][errors]") {
  SyntheticConfig cfg = default_synthetic_config();
  cfg.n_patients = 9;
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), std::invalid_argument);
  cfg = default_synthetic_config();
  cfg.signal_strength = -0.1;
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), std::invalid_argument);
  cfg = default_synthetic_config();
  cfg.event_rates = {0.3, 0.2, 0.4};  // not non-decreasing
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), std::invalid_argument);
}

TEST_CASE("count_words splits on whitespace runs", "[cohort][util]") {
  CHECK(count_words("") == 0);
  CHECK(count_words("   ") == 0);
  CHECK(count_words("one") == 1);
  CHECK(count_words("one two\tthree\nfour") == 4);
  CHECK(count_words("  padded   words  ") == 2);
}
