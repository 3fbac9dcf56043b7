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
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acu/cohort.hpp"
#include "acu/rng.hpp"
#include "acu/util.hpp"

namespace acu {

// Synthetic cohort with planted signal. A latent risk z ~ N(0,1) per
// patient drives (a) the event-time category through a cumulative-logit
// draw, (b) the mixture rate of high-risk vs low-risk planted words in the
// generated notes, and (c) a designated subset of SHD columns. Everything
// else is noise, so downstream models have a known signal to recover.
struct SyntheticConfig {
  int n_patients = 1000;
  std::uint64_t seed = 1;
  std::array<double, 3> event_rates = {0.135, 0.317, 0.390};  // 30/180/365d
  // attribute -> (code, proportion); proportions sum to 1 per attribute
  std::map<std::string, std::vector<std::pair<std::string, double>>>
      demographic_mix;
  double signal_strength = 1.0;
  std::vector<std::string> vocab_high;
  std::vector<std::string> vocab_low;
  int n_shd = 40;
  int n_shd_signal = 8;
};

// Proportions follow the source cohort's published distribution (counts out
// of 6,938 patients).
inline SyntheticConfig default_synthetic_config() {
  SyntheticConfig c;
  auto mix = [](std::initializer_list<std::pair<const char*, int>> rows) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [code, count] : rows)
      out.emplace_back(code, count / 6938.0);
    return out;
  };
  c.demographic_mix["sex"] = mix({{"female", 3659}, {"male", 3279}});
  c.demographic_mix["race"] = mix(
      {{"white", 3804}, {"asian", 1619}, {"black", 188}, {"other", 1327}});
  c.demographic_mix["ethnicity"] =
      mix({{"non_hispanic", 5989}, {"hispanic", 855}, {"unknown", 94}});
  c.demographic_mix["insurance"] = mix(
      {{"medicare", 2683}, {"private", 2450}, {"medicaid", 599}, {"other", 1206}});
  c.demographic_mix["cancer_type"] =
      mix({{"breast", 1321},
           {"gastrointestinal", 819},
           {"thoracic", 774},
           {"lymphoma", 700},
           {"head_and_neck", 658},
           {"pancreas", 585},
           {"prostate", 520},
           {"gynecologic", 513},
           {"genitourinary", 461},
           {"other", 587}});
  c.demographic_mix["cancer_stage"] = mix({{"stage_i", 1099},
                                           {"stage_ii", 1415},
                                           {"stage_iii", 964},
                                           {"stage_iv", 1898},
                                           {"unknown", 1562}});
  // Chosen to be fixed points of the packaged lemmatiser so that planted
  // words survive preprocessing verbatim.
  c.vocab_high = {"admission", "failure",     "pain",    "palliative",
                  "sepsis",    "dehydration", "fever",   "metastatic",
                  "hospice",   "nausea"};
  c.vocab_low = {"breast",    "psa",      "prostate", "stable",
                 "routine",   "benign",   "remission", "wellness",
                 "mammogram", "annual"};
  return c;
}

inline void validate(const SyntheticConfig& c) {
  if (c.n_patients < 10)
    throw std::invalid_argument("n_patients must be >= 10");
  if (c.signal_strength < 0)
    throw std::invalid_argument("signal_strength must be >= 0");
  for (double r : c.event_rates)
    if (!(r > 0.0 && r < 1.0))
      throw std::invalid_argument("event_rates must lie in (0,1)");
  if (!(c.event_rates[0] <= c.event_rates[1] &&
        c.event_rates[1] <= c.event_rates[2]))
    throw std::invalid_argument("event_rates must be non-decreasing");
  if (c.demographic_mix.empty())
    throw std::invalid_argument("demographic_mix must not be empty");
  for (const auto& [attr, rows] : c.demographic_mix) {
    double sum = 0.0;
    for (const auto& [code, p] : rows) {
      if (code.empty()) throw std::invalid_argument(attr + ": empty code");
      if (p < 0) throw std::invalid_argument(attr + ": negative proportion");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument(attr + ": proportions sum to " +
                                  fmt_double(sum) + ", expected 1");
  }
  if (c.vocab_high.empty() || c.vocab_low.empty())
    throw std::invalid_argument("vocab_high and vocab_low must be non-empty");
  if (c.n_shd < 0 || c.n_shd_signal < 0 || c.n_shd_signal > c.n_shd)
    throw std::invalid_argument("need 0 <= n_shd_signal <= n_shd");
}

inline nlohmann::json synthetic_config_to_json(const SyntheticConfig& c) {
  nlohmann::json j;
  j["n_patients"] = c.n_patients;
  j["seed"] = c.seed;
  j["event_rates"] = c.event_rates;
  nlohmann::json mix = nlohmann::json::object();
  for (const auto& [attr, rows] : c.demographic_mix) {
    nlohmann::json obj = nlohmann::json::array();
    for (const auto& [code, p] : rows)
      obj.push_back({{"code", code}, {"proportion", p}});
    mix[attr] = obj;
  }
  j["demographic_mix"] = mix;
  j["signal_strength"] = c.signal_strength;
  j["vocab_high"] = c.vocab_high;
  j["vocab_low"] = c.vocab_low;
  j["n_shd"] = c.n_shd;
  j["n_shd_signal"] = c.n_shd_signal;
  return j;
}

inline SyntheticConfig synthetic_config_from_json(const nlohmann::json& j) {
  SyntheticConfig c = default_synthetic_config();
  try {
    c.n_patients = j.at("n_patients").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.event_rates = j.at("event_rates").get<std::array<double, 3>>();
    if (j.contains("demographic_mix")) {
      c.demographic_mix.clear();
      for (const auto& [attr, rows] : j.at("demographic_mix").items())
        for (const auto& row : rows)
          c.demographic_mix[attr].emplace_back(
              row.at("code").get<std::string>(),
              row.at("proportion").get<double>());
    }
    c.signal_strength = j.at("signal_strength").get<double>();
    if (j.contains("vocab_high"))
      c.vocab_high = j.at("vocab_high").get<std::vector<std::string>>();
    if (j.contains("vocab_low"))
      c.vocab_low = j.at("vocab_low").get<std::vector<std::string>>();
    if (j.contains("n_shd")) c.n_shd = j.at("n_shd").get<int>();
    if (j.contains("n_shd_signal"))
      c.n_shd_signal = j.at("n_shd_signal").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("synthetic config: ") + e.what());
  }
  return c;
}

namespace detail {

// Background vocabulary: a hand-written clinical core plus deterministic
// pseudo-words, Zipf-weighted. Planted words are excluded so frequency
// signal comes only from the latent-risk mixture.
struct FillerVocab {
  std::vector<std::string> words;
  std::vector<double> cumweight;  // inclusive prefix sums of Zipf weights

  // Binary search over the cumulative weights; O(log n) per draw.
  const std::string& draw(Rng& rng) const {
    double u = rng.uniform() * cumweight.back();
    size_t i = static_cast<size_t>(
        std::upper_bound(cumweight.begin(), cumweight.end(), u) -
        cumweight.begin());
    if (i >= words.size()) i = words.size() - 1;
    return words[i];
  }
};

inline const std::vector<std::string>& filler_base_words() {
  static const std::vector<std::string> base = {
      "patient", "clinic", "oncology", "chemotherapy", "cycle", "dose",
      "tolerated", "review", "plan", "continue", "follow", "labs", "blood",
      "count", "white", "cell", "platelet", "hemoglobin", "creatinine",
      "liver", "function", "renal", "baseline", "imaging", "scan", "ct",
      "mri", "lesion", "mass", "node", "lymph", "biopsy", "pathology",
      "diagnosis", "history", "physical", "exam", "vital", "signs", "weight",
      "pressure", "pulse", "temperature", "oxygen", "saturation", "lungs",
      "clear", "heart", "regular", "rhythm", "abdomen", "soft", "tender",
      "extremities", "edema", "neuro", "alert", "oriented", "mood", "appetite",
      "diet", "fluids", "hydration", "medication", "regimen", "infusion",
      "port", "line", "access", "toxicity", "grade", "neuropathy", "fatigue",
      "anemia", "neutropenia", "thrombocytopenia", "mucositis", "rash",
      "diarrhea", "constipation", "vomiting", "appointment", "schedule",
      "discussed", "risks", "benefits", "questions", "answered", "family",
      "support", "home", "care", "nurse", "pharmacy", "dosing", "reduction",
      "delay", "hold", "resume", "response", "partial", "complete",
      "progression", "recurrence", "surveillance", "margin", "resection",
      "surgery", "radiation", "field", "fraction", "boost", "immunotherapy",
      "targeted", "marker", "receptor", "positive", "mutation", "gene",
      "panel", "trial", "eligibility", "criteria", "performance", "status",
      "ecog", "karnofsky", "assessment", "pain_score", "scale", "mild",
      "moderate", "severe", "managed", "improved", "worsened", "unchanged",
      "resolved", "ongoing", "chronic", "acute", "onset", "duration",
      "frequency", "episode", "symptom", "cough", "dyspnea", "chest",
      "shortness", "breath", "swelling", "numbness", "tingling", "headache",
      "dizziness", "weakness", "insomnia", "anxiety", "depression", "screen",
      "counseling", "social", "work", "referral", "dietitian", "therapy",
      "rehabilitation", "goals", "discussion", "prognosis", "options",
      "informed", "consent_form", "signed", "witnessed", "tumor", "board",
      "recommendation", "guideline", "protocol", "standard", "supportive",
      "antiemetic", "premedication", "steroid", "growth", "factor",
      "prophylaxis", "antibiotic", "vaccination", "influenza", "covid",
      "smoking", "alcohol", "exercise", "sleep", "bowel", "bladder", "skin",
      "wound", "healing", "incision", "drain", "dressing", "followup_visit"};
  return base;
}

inline const FillerVocab& filler_vocabulary(
    const std::set<std::string>& exclude) {
  static std::map<std::string, FillerVocab> cache;
  std::string key;
  for (const auto& w : exclude) key += w + "|";
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  FillerVocab v;
  std::set<std::string> seen;
  for (const auto& w : filler_base_words())
    if (!exclude.count(w) && seen.insert(w).second) v.words.push_back(w);

  static const char* consonants = "bcdfghjklmnprstvwz";
  static const char* vowels = "aeiou";
  Rng pseudo(0x66696c6c65720aull);  // fixed: pseudo-words are config-invariant
  while (v.words.size() < 2600) {
    int n_syll = pseudo.uniform_int(2, 4);
    std::string w;
    for (int s = 0; s < n_syll; ++s) {
      w += consonants[pseudo.below(18)];
      w += vowels[pseudo.below(5)];
      if (pseudo.uniform() < 0.35) w += consonants[pseudo.below(18)];
    }
    if (exclude.count(w) || !seen.insert(w).second) continue;
    v.words.push_back(w);
  }
  v.cumweight.resize(v.words.size());
  double acc = 0.0;
  for (size_t i = 0; i < v.words.size(); ++i) {
    acc += 1.0 / static_cast<double>(i + 1);
    v.cumweight[i] = acc;
  }
  return cache.emplace(key, std::move(v)).first->second;
}

// Common function words and negation cues mixed into sentences so the
// preprocessing stages have realistic work to do.
inline const std::vector<std::pair<std::string, double>>& glue_words() {
  static const std::vector<std::pair<std::string, double>> glue = {
      {"the", 6.0},   {"and", 4.0},   {"of", 4.0},     {"with", 3.0},
      {"is", 3.0},    {"was", 3.0},   {"to", 3.0},     {"in", 2.5},
      {"for", 2.0},   {"on", 2.0},    {"at", 1.5},     {"has", 1.5},
      {"no", 1.2},    {"not", 0.8},   {"denies", 0.8}, {"without", 0.6},
      {"today", 0.6}, {"will", 1.0},  {"she", 1.2},    {"he", 1.2},
      {"this", 1.0},  {"that", 1.0},  {"but", 0.6},    {"however", 0.4}};
  return glue;
}

inline double solve_intercept(const std::vector<double>& z, double s,
                              double target) {
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double zi : z) mean += sigmoid(mid + s * zi);
    mean /= static_cast<double>(z.size());
    if (mean < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

struct GeneratedCohort {
  std::vector<CohortRecord> records;
  std::vector<NoteDocument> notes;
  std::vector<std::string> shd_names;
};

inline GeneratedCohort generate_synthetic_cohort(const SyntheticConfig& cfg) {
  validate(cfg);
  const int n = cfg.n_patients;
  const double s = cfg.signal_strength;
  Rng root(cfg.seed);
  Rng demo_rng = root.stream(1);
  Rng label_rng = root.stream(2);
  Rng note_rng = root.stream(3);
  Rng split_rng = root.stream(4);
  Rng shd_rng = root.stream(5);

  int id_width = 5;
  for (int m = n; m >= 100000; m /= 10) ++id_width;
  id_width = std::min(id_width, 12);  // int n never needs more digits

  GeneratedCohort out;
  out.records.resize(n);
  std::vector<double> z(n);

  // Pass 1: latent risk + demographics.
  for (int i = 0; i < n; ++i) {
    auto& r = out.records[i];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "P%0*d", id_width, i + 1);
    r.patient_id = buf;
    z[i] = demo_rng.normal();
    r.age_at_chemo = clip(demo_rng.normal(60.5, 14.4), 18.0, 95.0);
    r.age_at_chemo = std::round(r.age_at_chemo * 10.0) / 10.0;
    for (const auto& [attr, rows] : cfg.demographic_mix) {
      std::vector<double> w;
      w.reserve(rows.size());
      for (const auto& [code, p] : rows) w.push_back(p);
      const std::string& code = rows[demo_rng.weighted(w)].first;
      if (attr == "sex")
        r.sex = code;
      else if (attr == "race")
        r.race = code;
      else if (attr == "ethnicity")
        r.ethnicity = code;
      else if (attr == "insurance")
        r.insurance = code;
      else if (attr == "cancer_type")
        r.cancer_type = code;
      else if (attr == "cancer_stage")
        r.cancer_stage = code;
      else
        throw std::invalid_argument("unknown demographic attribute: " + attr);
    }
    r.followup_days = 365;
  }

  // Pass 2: event categories. Intercepts are solved against the drawn z so
  // the expected cumulative rate at each horizon equals the target; the
  // uniform draws are stratified over a shuffled grid, which keeps realized
  // rates within O(1/n) of the targets instead of O(1/sqrt(n)).
  std::array<double, 3> alpha;
  for (int k = 0; k < 3; ++k)
    alpha[k] = detail::solve_intercept(z, s, cfg.event_rates[k]);
  std::vector<int> strata(n);
  for (int i = 0; i < n; ++i) strata[i] = i;
  label_rng.shuffle(strata);
  for (int i = 0; i < n; ++i) {
    auto& r = out.records[i];
    double u = (strata[i] + label_rng.uniform()) / static_cast<double>(n);
    int category = 4;
    for (int k = 0; k < 3; ++k) {
      if (u < sigmoid(alpha[k] + s * z[i])) {
        category = k + 1;
        break;
      }
    }
    switch (category) {
      case 1: r.event_day = label_rng.uniform_int(0, 30); break;
      case 2: r.event_day = label_rng.uniform_int(31, 180); break;
      case 3: r.event_day = label_rng.uniform_int(181, 365); break;
      default: r.event_day.reset();
    }
  }

  // Pass 3: SHD. First n_shd_signal columns carry z plus unit noise.
  char shd_buf[16];
  for (int j = 0; j < cfg.n_shd; ++j) {
    std::snprintf(shd_buf, sizeof(shd_buf), "shd_%03d", j);
    out.shd_names.emplace_back(shd_buf);
  }
  for (int i = 0; i < n; ++i) {
    auto& r = out.records[i];
    r.shd.resize(cfg.n_shd);
    for (int j = 0; j < cfg.n_shd; ++j) {
      double noise = shd_rng.normal();
      r.shd[j] = (j < cfg.n_shd_signal) ? z[i] + noise : noise;
    }
  }

  // Pass 4: notes. Word mixture: planted words take a fixed share of each
  // note, split between the high and low lists by sigmoid(s*z).
  std::set<std::string> planted(cfg.vocab_high.begin(), cfg.vocab_high.end());
  planted.insert(cfg.vocab_low.begin(), cfg.vocab_low.end());
  const auto& filler = detail::filler_vocabulary(planted);
  const auto& glue = detail::glue_words();
  double glue_total = 0.0;
  for (const auto& [w, wt] : glue) glue_total += wt;
  const double planted_share = 0.16;
  const double glue_share = 0.22;

  // Each patient expresses a random subset of each planted list. Without
  // this the planted columns are nearly collinear (all driven by z alone)
  // and an L1 fit keeps only a few of them.
  auto draw_subset = [](Rng& rng, size_t list_size) {
    size_t k = std::max<size_t>(1, (list_size * 2) / 5);
    std::vector<size_t> idx(list_size);
    for (size_t j = 0; j < list_size; ++j) idx[j] = j;
    for (size_t j = 0; j < k; ++j) {
      size_t pick = j + rng.below(list_size - j);
      std::swap(idx[j], idx[pick]);
    }
    idx.resize(k);
    return idx;
  };

  for (int i = 0; i < n; ++i) {
    auto& r = out.records[i];
    double q_high = planted_share * sigmoid(s * z[i]);
    auto sub_high = draw_subset(note_rng, cfg.vocab_high.size());
    auto sub_low = draw_subset(note_rng, cfg.vocab_low.size());
    int n_notes = note_rng.uniform_int(1, 3);
    std::set<int> offsets;
    while (static_cast<int>(offsets.size()) < n_notes)
      offsets.insert(note_rng.uniform_int(-180, -1));
    int note_idx = 0;
    for (int offset : offsets) {
      ++note_idx;
      NoteDocument doc;
      doc.patient_id = r.patient_id;
      doc.note_id = r.patient_id + "-n" + std::to_string(note_idx);
      doc.offset_day = offset;
      doc.note_type = note_rng.uniform() < 0.8
                          ? NoteType::progress
                          : NoteType::history_and_physical;
      int target_words = note_rng.uniform_int(100, 1500);
      std::string text;
      bool consent = doc.note_type == NoteType::history_and_physical &&
                     note_rng.uniform() < 0.05;
      int words = 0;
      if (consent) {
        text = "Clinical trial consent was reviewed and signed today. ";
        words = 8;
      }
      while (words < target_words) {
        int sentence_len = note_rng.uniform_int(6, 12);
        for (int w = 0; w < sentence_len; ++w) {
          double u = note_rng.uniform();
          std::string word;
          if (u < q_high) {
            word = cfg.vocab_high[sub_high[note_rng.below(sub_high.size())]];
          } else if (u < planted_share) {
            word = cfg.vocab_low[sub_low[note_rng.below(sub_low.size())]];
          } else if (u < planted_share + glue_share) {
            double g = note_rng.uniform() * glue_total;
            double acc = 0.0;
            size_t gi = 0;
            for (; gi < glue.size(); ++gi) {
              acc += glue[gi].second;
              if (g < acc) break;
            }
            word = glue[std::min(gi, glue.size() - 1)].first;
          } else {
            word = filler.draw(note_rng);
          }
          if (w == 0 && !word.empty())
            word[0] = static_cast<char>(std::toupper(
                static_cast<unsigned char>(word[0])));
          text += word;
          text += (w + 1 == sentence_len) ? "." : " ";
          if (w + 1 == sentence_len) text += " ";
          ++words;
        }
      }
      if (!text.empty() && text.back() == ' ') text.pop_back();
      doc.text = std::move(text);
      doc.word_count = count_words(doc.text);
      r.note_ids.push_back(doc.note_id);
      out.notes.push_back(std::move(doc));
    }
  }

  // Pass 5: 80/20 split.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  split_rng.shuffle(order);
  int n_train = static_cast<int>(std::llround(0.8 * n));
  for (int i = 0; i < n; ++i)
    out.records[order[i]].split = i < n_train ? Split::train : Split::test;

  return out;
}

}  // namespace acu
