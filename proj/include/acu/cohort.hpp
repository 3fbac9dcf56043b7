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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acu/csv.hpp"
#include "acu/util.hpp"

namespace acu {

enum class Split { train, test };

inline std::string to_string(Split s) {
  return s == Split::train ? "train" : "test";
}
inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw std::invalid_argument("unknown split value: '" + s + "'");
}

enum class NoteType { progress, history_and_physical };

inline std::string to_string(NoteType t) {
  return t == NoteType::progress ? "progress" : "history_and_physical";
}
inline NoteType note_type_from_string(const std::string& s) {
  if (s == "progress") return NoteType::progress;
  if (s == "history_and_physical") return NoteType::history_and_physical;
  throw std::invalid_argument("unknown note_type value: '" + s + "'");
}

// One patient. event_day is the day of the first acute-care event relative
// to chemotherapy start; absent means no event within follow-up.
struct CohortRecord {
  std::string patient_id;
  double age_at_chemo = 0.0;
  std::string sex, race, ethnicity, insurance, cancer_type, cancer_stage;
  std::vector<double> shd;  // length equals the cohort-wide schema
  std::vector<std::string> note_ids;
  std::optional<int> event_day;
  int followup_days = 365;
  Split split = Split::train;
};

struct NoteDocument {
  std::string note_id;
  std::string patient_id;
  NoteType note_type = NoteType::progress;
  int offset_day = 0;  // relative to chemo start; negative = before
  std::string text;
  int word_count = 0;  // whitespace-token count of text
};

inline int count_words(const std::string& text) {
  int n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

// Time-to-event category: 1 = event within 30 days, 2 = (30,180],
// 3 = (180,365], 4 = none within 365 days.
struct OrdinalLabel {
  int category = 4;
};

struct BinaryLabel {
  int horizon = 30;  // 30 | 180 | 365
  int value = 0;
};

inline OrdinalLabel make_ordinal_label(std::optional<int> event_day) {
  if (!event_day) return {4};
  if (*event_day < 0)
    throw std::invalid_argument("event_day must be >= 0, got " +
                                std::to_string(*event_day));
  if (*event_day <= 30) return {1};
  if (*event_day <= 180) return {2};
  if (*event_day <= 365) return {3};
  return {4};
}

inline bool valid_horizon(int horizon) {
  return horizon == 30 || horizon == 180 || horizon == 365;
}

inline BinaryLabel make_binary_label(std::optional<int> event_day,
                                     int horizon) {
  if (!valid_horizon(horizon))
    throw std::invalid_argument("horizon must be 30, 180 or 365, got " +
                                std::to_string(horizon));
  int value = (event_day && *event_day <= horizon) ? 1 : 0;
  return {horizon, value};
}

struct LoadResult {
  std::vector<CohortRecord> records;
  std::vector<NoteDocument> notes;
  std::vector<std::string> shd_names;  // column names as in the CSV header
  int dropped_noteless = 0;            // patients removed for having no notes
};

inline const std::vector<std::string>& cohort_fixed_columns() {
  static const std::vector<std::string> cols = {
      "patient_id", "age_at_chemo", "sex",          "race",
      "ethnicity",  "insurance",    "cancer_type",  "cancer_stage",
      "event_day",  "followup_days", "split"};
  return cols;
}

inline std::vector<NoteDocument> parse_notes_jsonl(const std::string& text) {
  std::vector<NoteDocument> notes;
  size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    auto t = trim(line);
    if (t.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(t);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("notes line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
    NoteDocument n;
    try {
      n.note_id = j.at("note_id").get<std::string>();
      n.patient_id = j.at("patient_id").get<std::string>();
      n.note_type = note_type_from_string(j.at("note_type").get<std::string>());
      n.offset_day = j.at("offset_day").get<int>();
      n.text = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("notes line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
    n.word_count = count_words(n.text);
    notes.push_back(std::move(n));
  }
  return notes;
}

// Loads cohort.csv + notes.jsonl. When `schema` is non-empty the CSV's SHD
// columns must match it exactly (same names, same order). Patients with no
// notes at all are dropped and counted, mirroring the study-population rule.
inline LoadResult load_cohort(const std::string& records_path,
                              const std::string& notes_path,
                              const std::vector<std::string>& schema = {}) {
  CsvTable table = read_csv(records_path);

  const auto& fixed = cohort_fixed_columns();
  if (table.header.size() < fixed.size())
    throw std::invalid_argument("cohort header has too few columns");
  for (size_t i = 0; i < fixed.size(); ++i)
    if (table.header[i] != fixed[i])
      throw std::invalid_argument("cohort column " + std::to_string(i + 1) +
                                  " must be '" + fixed[i] + "', got '" +
                                  table.header[i] + "'");
  std::vector<std::string> shd_names(table.header.begin() + fixed.size(),
                                     table.header.end());
  for (const auto& s : shd_names)
    if (s.rfind("shd_", 0) != 0)
      throw std::invalid_argument("SHD column '" + s +
                                  "' must be prefixed 'shd_'");
  if (!schema.empty() && schema != shd_names) {
    if (schema.size() != shd_names.size())
      throw std::invalid_argument(
          "SHD schema mismatch: file has " + std::to_string(shd_names.size()) +
          " columns, schema expects " + std::to_string(schema.size()));
    throw std::invalid_argument("SHD schema mismatch: column names differ");
  }

  LoadResult out;
  out.shd_names = shd_names;
  std::set<std::string> seen_ids;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string where = "cohort row " + std::to_string(r + 2);
    CohortRecord rec;
    rec.patient_id = row[0];
    if (rec.patient_id.empty())
      throw std::invalid_argument(where + ": empty patient_id");
    if (!seen_ids.insert(rec.patient_id).second)
      throw std::invalid_argument(where + ": duplicate patient_id " +
                                  rec.patient_id);
    rec.age_at_chemo = parse_double_field(row[1], where + " age_at_chemo");
    rec.sex = row[2];
    rec.race = row[3];
    rec.ethnicity = row[4];
    rec.insurance = row[5];
    rec.cancer_type = row[6];
    rec.cancer_stage = row[7];
    if (!row[8].empty())
      rec.event_day = parse_int_field(row[8], where + " event_day");
    rec.followup_days = parse_int_field(row[9], where + " followup_days");
    rec.split = split_from_string(row[10]);
    if (rec.event_day &&
        (*rec.event_day < 0 || *rec.event_day > rec.followup_days))
      throw std::invalid_argument(where + ": event_day " +
                                  std::to_string(*rec.event_day) +
                                  " outside [0, followup_days]");
    rec.shd.reserve(shd_names.size());
    for (size_t c = fixed.size(); c < row.size(); ++c)
      rec.shd.push_back(parse_double_field(row[c], where + " " +
                                           table.header[c]));
    out.records.push_back(std::move(rec));
  }

  out.notes = parse_notes_jsonl(read_file(notes_path));
  std::map<std::string, std::vector<std::string>> notes_by_patient;
  for (const auto& n : out.notes) {
    if (!seen_ids.count(n.patient_id))
      throw std::invalid_argument("note " + n.note_id +
                                  " references unknown patient_id " +
                                  n.patient_id);
    notes_by_patient[n.patient_id].push_back(n.note_id);
  }
  std::vector<CohortRecord> kept;
  kept.reserve(out.records.size());
  for (auto& rec : out.records) {
    auto it = notes_by_patient.find(rec.patient_id);
    if (it == notes_by_patient.end()) {
      ++out.dropped_noteless;
      continue;
    }
    rec.note_ids = it->second;
    kept.push_back(std::move(rec));
  }
  out.records = std::move(kept);
  return out;
}

inline std::string cohort_to_csv(const std::vector<CohortRecord>& records,
                                 const std::vector<std::string>& shd_names) {
  std::vector<std::string> header = cohort_fixed_columns();
  header.insert(header.end(), shd_names.begin(), shd_names.end());
  CsvWriter w(header);
  for (const auto& r : records) {
    if (r.shd.size() != shd_names.size())
      throw std::invalid_argument("record " + r.patient_id +
                                  " SHD length mismatch");
    std::vector<std::string> row = {
        r.patient_id,
        fmt_double(r.age_at_chemo),
        r.sex,
        r.race,
        r.ethnicity,
        r.insurance,
        r.cancer_type,
        r.cancer_stage,
        r.event_day ? std::to_string(*r.event_day) : std::string(),
        std::to_string(r.followup_days),
        to_string(r.split)};
    for (double v : r.shd) row.push_back(fmt_double(v));
    w.append_row(row);
  }
  return w.str();
}

inline std::string notes_to_jsonl(const std::vector<NoteDocument>& notes) {
  std::string out;
  for (const auto& n : notes) {
    nlohmann::json j;
    j["note_id"] = n.note_id;
    j["patient_id"] = n.patient_id;
    j["note_type"] = to_string(n.note_type);
    j["offset_day"] = n.offset_day;
    j["text"] = n.text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace acu
