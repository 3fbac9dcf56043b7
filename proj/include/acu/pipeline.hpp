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

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "acu/clinical.hpp"
#include "acu/cohort.hpp"
#include "acu/csv.hpp"
#include "acu/design.hpp"
#include "acu/lasso.hpp"
#include "acu/metrics.hpp"
#include "acu/ordinal.hpp"
#include "acu/svg.hpp"
#include "acu/synthetic.hpp"
#include "acu/text.hpp"
#include "acu/util.hpp"

namespace acu {

inline const char* acurisk_version() { return "1.0.0"; }

// ---------------------------------------------------------------------------
// Model registry

inline const std::vector<std::string>& all_model_names() {
  static const std::vector<std::string> names = {
      "tabular_lasso", "language_lasso", "fusion_lasso", "language_ordinal",
      "fusion_ordinal"};
  return names;
}

inline bool is_lasso_model(const std::string& m) {
  return m == "tabular_lasso" || m == "language_lasso" || m == "fusion_lasso";
}

inline bool is_fusion_model(const std::string& m) {
  return m == "fusion_lasso" || m == "fusion_ordinal";
}

inline bool model_uses_shd(const std::string& m) {
  return m == "tabular_lasso" || is_fusion_model(m);
}

inline int model_index(const std::string& m) {
  const auto& all = all_model_names();
  for (size_t i = 0; i < all.size(); ++i)
    if (all[i] == m) return static_cast<int>(i);
  throw std::invalid_argument("unknown model: " + m);
}

// slot of a horizon in the fixed {30, 180, 365} order
inline int horizon_slot(int h) {
  if (h == 30) return 0;
  if (h == 180) return 1;
  if (h == 365) return 2;
  throw std::invalid_argument("horizon must be one of 30/180/365");
}

// ---------------------------------------------------------------------------
// Run configuration

struct Seeds {
  std::uint64_t fold = 101;
  std::uint64_t bootstrap = 202;
  std::uint64_t generator = 303;
  std::uint64_t encoder = 404;
};

struct RunConfig {
  std::string cohort_csv;   // default: <output_dir>/cohort.csv
  std::string notes_jsonl;  // default: <output_dir>/notes.jsonl
  std::string output_dir;
  std::vector<int> horizons = {30, 180, 365};
  std::vector<std::string> models = all_model_names();
  Seeds seeds;
  int vocab_size = 2000;
  int n_bootstrap = 1000;
  int lambda_grid_size = 50;
  double lambda_min_ratio = 1e-3;
  int cv_folds = 10;
  std::vector<double> dca_grid;  // empty = 0.01..0.99
  int stratify_horizon = 180;
  std::string stratify_model = "language_lasso";
  std::vector<std::string> fairness_attrs = {"race", "insurance",
                                             "cancer_stage"};
  int calibration_bins = 10;
  int encoder_dim = 128;
  OrdinalTrainConfig ordinal;  // seed field is derived from seeds.fold
  bool has_synthetic = false;
  nlohmann::json synthetic;  // optional block consumed by `generate`

  // execution knobs (CLI flags); they never change artifact bytes and are
  // excluded from the config hash
  int jobs = 1;
  bool svg = false;
};

inline void validate_run_config(const RunConfig& c) {
  if (c.output_dir.empty())
    throw std::invalid_argument("config: output_dir is required");
  if (c.horizons.empty()) throw std::invalid_argument("config: no horizons");
  for (int h : c.horizons) horizon_slot(h);
  for (size_t i = 1; i < c.horizons.size(); ++i)
    if (c.horizons[i] <= c.horizons[i - 1])
      throw std::invalid_argument("config: horizons must be ascending, unique");
  if (c.models.empty()) throw std::invalid_argument("config: no models");
  std::set<std::string> seen;
  for (const auto& m : c.models) {
    model_index(m);
    if (!seen.insert(m).second)
      throw std::invalid_argument("config: duplicate model " + m);
  }
  if (c.vocab_size < 1)
    throw std::invalid_argument("config: vocab_size must be >= 1");
  if (c.n_bootstrap < 1)
    throw std::invalid_argument("config: n_bootstrap must be >= 1");
  if (c.lambda_grid_size < 1)
    throw std::invalid_argument("config: lambda_grid_size must be >= 1");
  if (!(c.lambda_min_ratio > 0.0) || c.lambda_min_ratio > 1.0)
    throw std::invalid_argument("config: lambda_min_ratio must be in (0, 1]");
  if (c.cv_folds < 2)
    throw std::invalid_argument("config: cv_folds must be >= 2");
  for (double t : c.dca_grid)
    if (!(t > 0.0) || !(t < 1.0))
      throw std::invalid_argument("config: dca_grid values must lie in (0,1)");
  if (std::find(c.horizons.begin(), c.horizons.end(), c.stratify_horizon) ==
      c.horizons.end())
    throw std::invalid_argument(
        "config: stratify_horizon must be one of the requested horizons");
  if (std::find(c.models.begin(), c.models.end(), c.stratify_model) ==
      c.models.end())
    throw std::invalid_argument(
        "config: stratify_model must be one of the requested models");
  static const std::set<std::string> attrs = {
      "sex", "race", "ethnicity", "insurance", "cancer_type", "cancer_stage"};
  if (c.fairness_attrs.empty())
    throw std::invalid_argument("config: fairness_attrs is empty");
  for (const auto& a : c.fairness_attrs)
    if (!attrs.count(a))
      throw std::invalid_argument("config: unknown fairness attribute " + a);
  if (c.calibration_bins < 2)
    throw std::invalid_argument("config: calibration_bins must be >= 2");
  if (c.encoder_dim < 1)
    throw std::invalid_argument("config: encoder_dim must be >= 1");
  if (!(c.ordinal.learning_rate > 0.0))
    throw std::invalid_argument("config: ordinal learning_rate must be > 0");
  if (c.ordinal.max_epochs < 1 || c.ordinal.patience < 1)
    throw std::invalid_argument("config: ordinal epochs/patience must be >= 1");
  if (!(c.ordinal.val_fraction > 0.0) || c.ordinal.val_fraction > 0.5)
    throw std::invalid_argument(
        "config: ordinal val_fraction must be in (0, 0.5]");
  if (c.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("cohort_csv"))
      c.cohort_csv = j.at("cohort_csv").get<std::string>();
    if (j.contains("notes_jsonl"))
      c.notes_jsonl = j.at("notes_jsonl").get<std::string>();
    if (j.contains("horizons"))
      c.horizons = j.at("horizons").get<std::vector<int>>();
    if (j.contains("models"))
      c.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      if (s.contains("fold")) c.seeds.fold = s.at("fold").get<std::uint64_t>();
      if (s.contains("bootstrap"))
        c.seeds.bootstrap = s.at("bootstrap").get<std::uint64_t>();
      if (s.contains("generator"))
        c.seeds.generator = s.at("generator").get<std::uint64_t>();
      if (s.contains("encoder"))
        c.seeds.encoder = s.at("encoder").get<std::uint64_t>();
    }
    if (j.contains("vocab_size")) c.vocab_size = j.at("vocab_size").get<int>();
    if (j.contains("n_bootstrap"))
      c.n_bootstrap = j.at("n_bootstrap").get<int>();
    if (j.contains("lambda_grid_size"))
      c.lambda_grid_size = j.at("lambda_grid_size").get<int>();
    if (j.contains("lambda_min_ratio"))
      c.lambda_min_ratio = j.at("lambda_min_ratio").get<double>();
    if (j.contains("cv_folds")) c.cv_folds = j.at("cv_folds").get<int>();
    if (j.contains("dca_grid"))
      c.dca_grid = j.at("dca_grid").get<std::vector<double>>();
    if (j.contains("stratify_horizon"))
      c.stratify_horizon = j.at("stratify_horizon").get<int>();
    if (j.contains("stratify_model"))
      c.stratify_model = j.at("stratify_model").get<std::string>();
    if (j.contains("fairness_attrs"))
      c.fairness_attrs =
          j.at("fairness_attrs").get<std::vector<std::string>>();
    if (j.contains("calibration_bins"))
      c.calibration_bins = j.at("calibration_bins").get<int>();
    if (j.contains("encoder_dim"))
      c.encoder_dim = j.at("encoder_dim").get<int>();
    if (j.contains("ordinal")) {
      const auto& o = j.at("ordinal");
      if (o.contains("learning_rate"))
        c.ordinal.learning_rate = o.at("learning_rate").get<double>();
      if (o.contains("max_epochs"))
        c.ordinal.max_epochs = o.at("max_epochs").get<int>();
      if (o.contains("patience"))
        c.ordinal.patience = o.at("patience").get<int>();
      if (o.contains("val_fraction"))
        c.ordinal.val_fraction = o.at("val_fraction").get<double>();
    }
    if (j.contains("synthetic")) {
      c.has_synthetic = true;
      c.synthetic = j.at("synthetic");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (c.cohort_csv.empty()) c.cohort_csv = c.output_dir + "/cohort.csv";
  if (c.notes_jsonl.empty()) c.notes_jsonl = c.output_dir + "/notes.jsonl";
  validate_run_config(c);
  if (c.has_synthetic && c.synthetic.contains("n_shd") &&
      c.synthetic.at("n_shd").get<int>() == 0)
    for (const auto& m : c.models)
      if (model_uses_shd(m))
        throw std::invalid_argument("config: model " + m +
                                    " needs SHD columns but the synthetic "
                                    "block sets n_shd = 0");
  return c;
}

// Canonical serialisation; nlohmann orders keys, so dump() is stable.
inline nlohmann::json run_config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["cohort_csv"] = c.cohort_csv;
  j["notes_jsonl"] = c.notes_jsonl;
  j["output_dir"] = c.output_dir;
  j["horizons"] = c.horizons;
  j["models"] = c.models;
  j["seeds"] = {{"fold", c.seeds.fold},
                {"bootstrap", c.seeds.bootstrap},
                {"generator", c.seeds.generator},
                {"encoder", c.seeds.encoder}};
  j["vocab_size"] = c.vocab_size;
  j["n_bootstrap"] = c.n_bootstrap;
  j["lambda_grid_size"] = c.lambda_grid_size;
  j["lambda_min_ratio"] = c.lambda_min_ratio;
  j["cv_folds"] = c.cv_folds;
  j["dca_grid"] = c.dca_grid;
  j["stratify_horizon"] = c.stratify_horizon;
  j["stratify_model"] = c.stratify_model;
  j["fairness_attrs"] = c.fairness_attrs;
  j["calibration_bins"] = c.calibration_bins;
  j["encoder_dim"] = c.encoder_dim;
  j["ordinal"] = {{"learning_rate", c.ordinal.learning_rate},
                  {"max_epochs", c.ordinal.max_epochs},
                  {"patience", c.ordinal.patience},
                  {"val_fraction", c.ordinal.val_fraction}};
  if (c.has_synthetic) j["synthetic"] = c.synthetic;
  return j;
}

inline std::string config_hash(const RunConfig& c) {
  return hex64(fnv1a64(run_config_to_json(c).dump()));
}

inline std::string artifact_path(const RunConfig& c, const std::string& name) {
  return c.output_dir + "/" + name;
}

inline std::string lasso_model_file(const std::string& model, int horizon) {
  return "model_" + model + "_" + std::to_string(horizon) + ".json";
}

inline std::string ordinal_model_file(const std::string& model) {
  return "model_" + model + ".json";
}

// ---------------------------------------------------------------------------
// Output-directory lock (single process owns the directory)

class DirLock {
 public:
  explicit DirLock(const std::string& dir) {
    std::filesystem::create_directories(dir);
    path_ = dir + "/.acurisk.lock";
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw std::runtime_error(
          "output directory is locked by another process (" + path_ +
          " exists); remove the file if it is stale");
    std::string pid = std::to_string(::getpid()) + "\n";
    ssize_t ignored = ::write(fd_, pid.data(), pid.size());
    (void)ignored;
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

// ---------------------------------------------------------------------------
// Shared stage plumbing

inline void require_artifact(const std::string& path,
                             const std::string& producer) {
  if (!file_exists(path))
    throw std::invalid_argument("missing artifact " + path +
                                "; produce it with `acurisk " + producer +
                                " --config <config>`");
}

inline void record_stage(const RunConfig& cfg, const std::string& stage,
                         double seconds) {
  std::string path = artifact_path(cfg, "manifest.json");
  nlohmann::json m;
  if (file_exists(path)) {
    try {
      m = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception&) {
      m = nlohmann::json::object();  // corrupted manifest: start over
    }
  }
  m["version"] = acurisk_version();
  m["config"] = run_config_to_json(cfg);
  m["config_hash"] = config_hash(cfg);
  nlohmann::json hashes = nlohmann::json::object();
  if (file_exists(cfg.cohort_csv))
    hashes["cohort_csv"] = hex64(fnv1a64(read_file(cfg.cohort_csv)));
  if (file_exists(cfg.notes_jsonl))
    hashes["notes_jsonl"] = hex64(fnv1a64(read_file(cfg.notes_jsonl)));
  m["input_hashes"] = hashes;
  m["stages"][stage] = {{"seconds", seconds}};
  write_file(path, m.dump(2) + "\n");
}

// select_notes + preprocess per patient; patients whose notes all fail
// selection leave the modelling cohort entirely, so every model sees the
// same patients.
struct LanguageData {
  std::vector<int> kept;  // indices into the cohort record list
  std::vector<TokenStream> streams;
  int dropped = 0;
};

inline LanguageData build_language_data(
    const std::vector<CohortRecord>& records,
    const std::vector<NoteDocument>& notes) {
  std::unordered_map<std::string, std::vector<const NoteDocument*>> by_patient;
  for (const auto& n : notes) by_patient[n.patient_id].push_back(&n);

  LanguageData out;
  const Lexicons& lex = default_lexicons();
  for (size_t i = 0; i < records.size(); ++i) {
    std::vector<NoteDocument> own;
    auto it = by_patient.find(records[i].patient_id);
    if (it != by_patient.end())
      for (const auto* n : it->second) own.push_back(*n);
    std::vector<NoteDocument> selected = select_notes(own);
    if (selected.empty()) {
      ++out.dropped;
      continue;
    }
    TokenStream stream;
    for (const auto& note : selected) {
      TokenStream s = preprocess(note.text, lex);
      stream.tokens.insert(stream.tokens.end(), s.tokens.begin(),
                           s.tokens.end());
    }
    out.kept.push_back(static_cast<int>(i));
    out.streams.push_back(std::move(stream));
  }
  return out;
}

inline std::string prep_input_hash(const RunConfig& cfg) {
  std::uint64_t h = fnv1a64(read_file(cfg.cohort_csv));
  h = fnv1a64(read_file(cfg.notes_jsonl), h);
  h = fnv1a64("vocab_size=" + std::to_string(cfg.vocab_size), h);
  return hex64(h);
}

// Everything the train/eval/curve stages need, rebuilt deterministically
// from the persisted artifacts (stage isolation: files are the interface).
struct PipelineData {
  LoadResult cohort;
  LanguageData lang;
  Vocabulary vocab;
  std::vector<TfidfVector> lang_rows;  // per kept patient, from features CSV
  std::vector<int> train_rows, test_rows;  // indices into lang.kept order

  const CohortRecord& rec(int kept_idx) const {
    return cohort.records[static_cast<size_t>(
        lang.kept[static_cast<size_t>(kept_idx)])];
  }
  int n_kept() const { return static_cast<int>(lang.kept.size()); }
};

inline PipelineData load_pipeline_data(const RunConfig& cfg) {
  require_artifact(cfg.cohort_csv, "generate");
  require_artifact(cfg.notes_jsonl, "generate");
  std::string vocab_path = artifact_path(cfg, "vocab.json");
  std::string feat_path = artifact_path(cfg, "features_lang.csv");
  require_artifact(vocab_path, "prep");
  require_artifact(feat_path, "prep");

  PipelineData pd;
  pd.cohort = load_cohort(cfg.cohort_csv, cfg.notes_jsonl);
  pd.lang = build_language_data(pd.cohort.records, pd.cohort.notes);

  nlohmann::json vj;
  try {
    vj = nlohmann::json::parse(read_file(vocab_path));
    pd.vocab.terms = vj.at("terms").get<std::vector<std::string>>();
    pd.vocab.doc_freq = vj.at("doc_freq").get<std::vector<std::int64_t>>();
    pd.vocab.n_docs = vj.at("n_docs").get<std::int64_t>();
    pd.vocab.truncated = vj.at("truncated").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("vocab.json is malformed (" + std::string(e.what()) +
                             "); re-run `acurisk prep`");
  }
  if (pd.vocab.terms.size() != pd.vocab.doc_freq.size())
    throw std::runtime_error("vocab.json is inconsistent; re-run `acurisk prep`");

  CsvTable feats = read_csv(feat_path);
  if (feats.header.empty() || feats.header[0] != "patient_id")
    throw std::runtime_error(
        "features_lang.csv lacks patient_id column; re-run `acurisk prep`");
  if (feats.header.size() != pd.vocab.terms.size() + 1)
    throw std::runtime_error(
        "features_lang.csv does not match vocab.json; re-run `acurisk prep`");
  for (size_t j = 0; j < pd.vocab.terms.size(); ++j)
    if (feats.header[j + 1] != "w_" + pd.vocab.terms[j])
      throw std::runtime_error(
          "features_lang.csv does not match vocab.json; re-run `acurisk prep`");
  if (feats.rows.size() != pd.lang.kept.size())
    throw std::runtime_error(
        "features_lang.csv is stale (patient set changed); re-run `acurisk prep`");
  pd.lang_rows.resize(feats.rows.size());
  for (size_t r = 0; r < feats.rows.size(); ++r) {
    const auto& row = feats.rows[r];
    const CohortRecord& rec =
        pd.cohort.records[static_cast<size_t>(pd.lang.kept[r])];
    if (row[0] != rec.patient_id)
      throw std::runtime_error(
          "features_lang.csv is stale (patient order changed); re-run "
          "`acurisk prep`");
    for (size_t j = 1; j < row.size(); ++j) {
      if (row[j].empty()) continue;
      double v = parse_double_field(row[j], "features_lang cell");
      if (v != 0.0)
        pd.lang_rows[r].entries.emplace_back(static_cast<int>(j - 1), v);
    }
  }

  for (int k = 0; k < pd.n_kept(); ++k) {
    if (pd.rec(k).split == Split::train)
      pd.train_rows.push_back(k);
    else
      pd.test_rows.push_back(k);
  }
  if (pd.train_rows.empty() || pd.test_rows.empty())
    throw std::invalid_argument("cohort needs both train and test patients");
  return pd;
}

// Design over kept patients for one LASSO model (SHD block, language block,
// or both), standardisation statistics from the training rows.
inline Design build_design(const std::string& model, const PipelineData& pd) {
  bool with_shd = model_uses_shd(model);
  bool with_lang = model != "tabular_lasso";
  DesignBuilder b;
  if (with_shd) b.add_shd_columns(pd.cohort.shd_names);
  int lang_offset = static_cast<int>(pd.cohort.shd_names.size());
  if (with_lang) b.add_language_columns(pd.vocab);
  for (int k = 0; k < pd.n_kept(); ++k) {
    int r = b.add_row();
    if (with_shd) b.set_dense(r, 0, pd.rec(k).shd);
    if (with_lang)
      b.set_sparse(r, with_shd ? lang_offset : 0,
                   pd.lang_rows[static_cast<size_t>(k)]);
  }
  Design d = b.finish();
  d.compute_stats(pd.train_rows);
  return d;
}

// Note embeddings for the ordinal models, one per kept patient.
inline std::vector<Embedding> build_embeddings(const PipelineData& pd,
                                               std::uint64_t encoder_seed,
                                               int encoder_dim, int jobs) {
  HashedEncoder enc{encoder_seed, encoder_dim};
  std::vector<Embedding> out(pd.lang.streams.size());
  parallel_for(static_cast<int>(pd.lang.streams.size()), jobs, [&](int i) {
    out[static_cast<size_t>(i)] =
        embed_tokens(enc, pd.lang.streams[static_cast<size_t>(i)].tokens);
  });
  return out;
}

inline std::vector<Embedding> build_fused_inputs(
    const PipelineData& pd, const std::vector<Embedding>& embeddings) {
  ShdStandardiser std_shd;
  std::vector<const std::vector<double>*> train_shd;
  for (int k : pd.train_rows) train_shd.push_back(&pd.rec(k).shd);
  std_shd.fit(train_shd);
  std::vector<Embedding> out(embeddings.size());
  for (int k = 0; k < pd.n_kept(); ++k)
    out[static_cast<size_t>(k)] =
        fuse(embeddings[static_cast<size_t>(k)], std_shd.apply(pd.rec(k).shd));
  return out;
}

inline std::vector<int> binary_labels(const PipelineData& pd, int horizon) {
  std::vector<int> y(static_cast<size_t>(pd.n_kept()), 0);
  for (int k = 0; k < pd.n_kept(); ++k)
    y[static_cast<size_t>(k)] =
        make_binary_label(pd.rec(k).event_day, horizon).value;
  return y;
}

inline std::vector<OrdinalLabel> ordinal_labels(const PipelineData& pd) {
  std::vector<OrdinalLabel> out;
  out.reserve(static_cast<size_t>(pd.n_kept()));
  for (int k = 0; k < pd.n_kept(); ++k)
    out.push_back(make_ordinal_label(pd.rec(k).event_day));
  return out;
}

// ---------------------------------------------------------------------------
// Stages

inline void stage_generate(const RunConfig& cfg) {
  if (!cfg.has_synthetic)
    throw std::invalid_argument(
        "generate: config has no `synthetic` block to generate from");
  nlohmann::json block = cfg.synthetic;
  SyntheticConfig defaults = default_synthetic_config();
  if (!block.contains("n_patients")) block["n_patients"] = defaults.n_patients;
  if (!block.contains("event_rates")) block["event_rates"] = defaults.event_rates;
  if (!block.contains("signal_strength"))
    block["signal_strength"] = defaults.signal_strength;
  block["seed"] = cfg.seeds.generator;  // seeds.generator wins, always
  SyntheticConfig syn = synthetic_config_from_json(block);
  GeneratedCohort gen = generate_synthetic_cohort(syn);

  std::filesystem::create_directories(
      std::filesystem::path(cfg.cohort_csv).parent_path());
  std::filesystem::create_directories(
      std::filesystem::path(cfg.notes_jsonl).parent_path());
  write_file(cfg.cohort_csv, cohort_to_csv(gen.records, gen.shd_names));
  write_file(cfg.notes_jsonl, notes_to_jsonl(gen.notes));
  std::cout << "[generate] wrote " << gen.records.size() << " patients, "
            << gen.notes.size() << " notes\n";
}

inline void stage_prep(const RunConfig& cfg) {
  require_artifact(cfg.cohort_csv, "generate");
  require_artifact(cfg.notes_jsonl, "generate");
  std::string vocab_path = artifact_path(cfg, "vocab.json");
  std::string input_hash = prep_input_hash(cfg);

  LoadResult data = load_cohort(cfg.cohort_csv, cfg.notes_jsonl);
  LanguageData lang = build_language_data(data.records, data.notes);
  if (lang.kept.empty())
    throw std::invalid_argument("prep: no patient has a usable note");

  Vocabulary vocab;
  bool reused = false;
  if (file_exists(vocab_path)) {
    try {
      nlohmann::json vj = nlohmann::json::parse(read_file(vocab_path));
      if (vj.value("input_hash", "") == input_hash) {
        vocab.terms = vj.at("terms").get<std::vector<std::string>>();
        vocab.doc_freq = vj.at("doc_freq").get<std::vector<std::int64_t>>();
        vocab.n_docs = vj.at("n_docs").get<std::int64_t>();
        vocab.truncated = vj.at("truncated").get<bool>();
        reused = true;
      }
    } catch (const nlohmann::json::exception&) {
      reused = false;  // unreadable cache: rebuild
    }
  }
  if (!reused) {
    // vocabulary is fitted on the training split only; test text never
    // influences term selection or document frequencies
    std::vector<TokenStream> train_streams;
    for (size_t i = 0; i < lang.kept.size(); ++i)
      if (data.records[static_cast<size_t>(lang.kept[i])].split ==
          Split::train)
        train_streams.push_back(lang.streams[i]);
    if (train_streams.empty())
      throw std::invalid_argument("prep: no training-split patients");
    vocab = build_vocabulary(train_streams, cfg.vocab_size);
    nlohmann::json vj;
    vj["terms"] = vocab.terms;
    vj["doc_freq"] = vocab.doc_freq;
    vj["n_docs"] = vocab.n_docs;
    vj["truncated"] = vocab.truncated;
    vj["input_hash"] = input_hash;
    write_file(vocab_path, vj.dump(2) + "\n");
  }

  std::vector<std::string> header = {"patient_id"};
  for (const auto& t : vocab.terms) header.push_back("w_" + t);
  CsvWriter w(header);
  std::vector<std::string> row(header.size());
  for (size_t i = 0; i < lang.kept.size(); ++i) {
    for (auto& cell : row) cell.clear();
    row[0] = data.records[static_cast<size_t>(lang.kept[i])].patient_id;
    TfidfVector v = tfidf(lang.streams[i], vocab);
    for (const auto& [j, value] : v.entries)
      row[static_cast<size_t>(j) + 1] = fmt_double(value);
    w.append_row(row);
  }
  w.save(artifact_path(cfg, "features_lang.csv"));
  std::cout << "[prep] " << (reused ? "reused" : "built") << " vocab ("
            << vocab.terms.size() << " terms), wrote features for "
            << lang.kept.size() << " patients (" << lang.dropped
            << " dropped: no usable note)\n";
}

// Cheap header peek so fusion-without-SHD surfaces before any compute.
inline int count_shd_header_columns(const std::string& cohort_csv) {
  std::string text = read_file(cohort_csv);
  size_t eol = text.find('\n');
  std::string first = text.substr(0, eol == std::string::npos ? text.size() : eol);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  int n = 0;
  for (const auto& col : split(first, ','))
    if (col.rfind("shd_", 0) == 0) ++n;
  return n;
}

inline void stage_train(const RunConfig& cfg) {
  // surface impossible requests before any compute
  require_artifact(cfg.cohort_csv, "generate");
  if (count_shd_header_columns(cfg.cohort_csv) == 0)
    for (const auto& m : cfg.models)
      if (model_uses_shd(m))
        throw std::invalid_argument(
            "model " + m + " needs SHD columns but the cohort has none");

  PipelineData pd = load_pipeline_data(cfg);

  std::vector<Embedding> embeddings, fused;
  bool any_ordinal = false;
  for (const auto& m : cfg.models)
    if (!is_lasso_model(m)) any_ordinal = true;
  if (any_ordinal)
    embeddings =
        build_embeddings(pd, cfg.seeds.encoder, cfg.encoder_dim, cfg.jobs);

  for (const auto& model : all_model_names()) {
    if (std::find(cfg.models.begin(), cfg.models.end(), model) ==
        cfg.models.end())
      continue;
    if (is_lasso_model(model)) {
      Design d = build_design(model, pd);
      for (int h : cfg.horizons) {
        std::vector<int> y = binary_labels(pd, h);
        double lmax = lambda_max(d, y, pd.train_rows);
        std::vector<double> grid = default_lambda_grid(
            lmax, cfg.lambda_grid_size, cfg.lambda_min_ratio);
        CvResult cv =
            cv_grid_search(d, y, grid, pd.train_rows, cfg.seeds.fold,
                           cfg.cv_folds, false, cfg.jobs);
        LassoModel fit =
            fit_lasso(d, y, cv.chosen_lambda, pd.train_rows, {}, h);
        write_file(artifact_path(cfg, "cv_" + model + "_" +
                                          std::to_string(h) + ".csv"),
                   cv_to_csv(cv));
        write_file(artifact_path(cfg, lasso_model_file(model, h)),
                   lasso_model_to_json(fit).dump(2) + "\n");
        std::cout << "[train] " << model << " h=" << h << " lambda="
                  << fmt_double(cv.chosen_lambda) << " nonzero="
                  << fit.coefs.size() << " status=" << to_string(fit.status)
                  << "\n";
      }
    } else {
      const std::vector<Embedding>* xs_all = &embeddings;
      if (is_fusion_model(model)) {
        if (fused.empty()) fused = build_fused_inputs(pd, embeddings);
        xs_all = &fused;
      }
      std::vector<OrdinalLabel> labels = ordinal_labels(pd);
      std::vector<Embedding> xs_train;
      std::vector<OrdinalLabel> y_train;
      for (int k : pd.train_rows) {
        xs_train.push_back((*xs_all)[static_cast<size_t>(k)]);
        y_train.push_back(labels[static_cast<size_t>(k)]);
      }
      OrdinalTrainConfig oc = cfg.ordinal;
      oc.seed = derive_seed(cfg.seeds.fold,
                            100 + static_cast<std::uint64_t>(
                                      model_index(model)));
      OrdinalFit fit = train_ordinal(xs_train, y_train, oc);
      fit.model.fusion = is_fusion_model(model);
      fit.model.embed_dim = cfg.encoder_dim;
      fit.model.shd_dim = fit.model.fusion
                              ? static_cast<int>(pd.cohort.shd_names.size())
                              : 0;
      fit.model.encoder_seed = cfg.seeds.encoder;
      nlohmann::json mj = ordinal_model_to_json(fit.model, oc);
      mj["epochs"] = fit.epochs;
      mj["initial_train_loss"] = fit.initial_train_loss;
      mj["final_train_loss"] = fit.final_train_loss;
      mj["best_val_loss"] = fit.best_val_loss;
      write_file(artifact_path(cfg, ordinal_model_file(model)),
                 mj.dump(2) + "\n");
      std::cout << "[train] " << model << " epochs=" << fit.epochs
                << " train_loss=" << fmt_fixed(fit.final_train_loss, 4)
                << " val_loss=" << fmt_fixed(fit.best_val_loss, 4) << "\n";
    }
  }
}

// Scores for one model over all kept patients, per requested horizon.
// Ordinal models are self-describing (encoder seed/dim from the file).
inline std::map<int, std::vector<double>> model_scores(
    const RunConfig& cfg, const PipelineData& pd, const std::string& model) {
  std::map<int, std::vector<double>> by_horizon;
  std::vector<int> all_rows(static_cast<size_t>(pd.n_kept()));
  for (int k = 0; k < pd.n_kept(); ++k) all_rows[static_cast<size_t>(k)] = k;

  if (is_lasso_model(model)) {
    Design d = build_design(model, pd);
    for (int h : cfg.horizons) {
      std::string path = artifact_path(cfg, lasso_model_file(model, h));
      require_artifact(path, "train");
      LassoModel m = lasso_model_from_json(nlohmann::json::parse(read_file(path)));
      by_horizon[h] = predict_many(m, d, all_rows);
    }
  } else {
    std::string path = artifact_path(cfg, ordinal_model_file(model));
    require_artifact(path, "train");
    OrdinalModel m = ordinal_model_from_json(nlohmann::json::parse(read_file(path)));
    std::vector<Embedding> xs =
        build_embeddings(pd, m.encoder_seed, m.embed_dim, cfg.jobs);
    if (m.fusion) xs = build_fused_inputs(pd, xs);
    std::vector<std::array<double, 3>> cumulative(xs.size());
    for (size_t i = 0; i < xs.size(); ++i)
      cumulative[i] = forward(m, xs[i]).cumulative;
    for (int h : cfg.horizons) {
      std::vector<double> s(xs.size());
      for (size_t i = 0; i < xs.size(); ++i)
        s[i] = cumulative[i][static_cast<size_t>(horizon_slot(h))];
      by_horizon[h] = s;
    }
  }
  return by_horizon;
}

inline void stage_eval(const RunConfig& cfg) {
  PipelineData pd = load_pipeline_data(cfg);

  CsvWriter predictions(
      {"model", "horizon", "patient_id", "split", "label", "score"});
  CsvWriter metrics(
      {"model", "horizon", "metric", "point", "lo", "hi", "n_boot", "seed"});
  CsvWriter shd_used({"model", "horizon", "shd_used"});
  CsvWriter calib({"model", "horizon", "series", "x", "y", "lo", "hi"});
  CsvWriter top_coefs({"model", "horizon", "direction", "rank", "name",
                       "source", "value_std", "value"});

  static const std::vector<std::string> metric_names = {"auroc", "auprc",
                                                        "cross_entropy"};

  for (const auto& model : all_model_names()) {
    if (std::find(cfg.models.begin(), cfg.models.end(), model) ==
        cfg.models.end())
      continue;
    auto scores = model_scores(cfg, pd, model);

    // fusion_ordinal has one SHD-usage row; per-horizon for the LASSOs
    if (model == "fusion_ordinal") {
      OrdinalModel m = ordinal_model_from_json(nlohmann::json::parse(
          read_file(artifact_path(cfg, ordinal_model_file(model)))));
      shd_used.append_row(
          {model, "all", std::to_string(used_shd_count(m))});
    }

    for (int h : cfg.horizons) {
      const std::vector<double>& s = scores.at(h);
      std::vector<int> y = binary_labels(pd, h);

      for (int k = 0; k < pd.n_kept(); ++k) {
        const CohortRecord& r = pd.rec(k);
        predictions.append_row({model, std::to_string(h), r.patient_id,
                                to_string(r.split),
                                std::to_string(y[static_cast<size_t>(k)]),
                                fmt_double(s[static_cast<size_t>(k)])});
      }

      std::vector<double> s_test;
      std::vector<int> y_test;
      for (int k : pd.test_rows) {
        s_test.push_back(s[static_cast<size_t>(k)]);
        y_test.push_back(y[static_cast<size_t>(k)]);
      }

      for (size_t mi = 0; mi < metric_names.size(); ++mi) {
        const std::string& name = metric_names[mi];
        std::uint64_t idx = static_cast<std::uint64_t>(
            (model_index(model) * 3 + horizon_slot(h)) * 3 +
            static_cast<int>(mi));
        std::uint64_t seed = derive_seed(cfg.seeds.bootstrap, idx);
        MetricWithCi ci;
        if (name == "auroc")
          ci = bootstrap_ci(s_test, y_test, auroc, cfg.n_bootstrap, seed, true);
        else if (name == "auprc")
          ci = bootstrap_ci(s_test, y_test, auprc, cfg.n_bootstrap, seed, true);
        else
          ci = bootstrap_ci(s_test, y_test, cross_entropy, cfg.n_bootstrap,
                            seed, false);
        metrics.append_row({model, std::to_string(h), name,
                            fmt_double(ci.point), fmt_double(ci.lo),
                            fmt_double(ci.hi), std::to_string(ci.n_boot),
                            std::to_string(seed)});
      }

      if (is_lasso_model(model)) {
        LassoModel m = lasso_model_from_json(nlohmann::json::parse(
            read_file(artifact_path(cfg, lasso_model_file(model, h)))));
        if (auto used = count_shd_used(m))
          shd_used.append_row(
              {model, std::to_string(h), std::to_string(*used)});
        TopCoefficients tops = top_coefficients(m, 20);
        for (size_t r = 0; r < tops.highest.size(); ++r)
          top_coefs.append_row(
              {model, std::to_string(h), "high", std::to_string(r + 1),
               tops.highest[r].name, to_string(tops.highest[r].source),
               fmt_double(tops.highest[r].value_std),
               fmt_double(tops.highest[r].value)});
        for (size_t r = 0; r < tops.lowest.size(); ++r)
          top_coefs.append_row(
              {model, std::to_string(h), "low", std::to_string(r + 1),
               tops.lowest[r].name, to_string(tops.lowest[r].source),
               fmt_double(tops.lowest[r].value_std),
               fmt_double(tops.lowest[r].value)});
      }

      CalibrationCurve cc =
          calibration(s_test, y_test, cfg.calibration_bins, true);
      for (const auto& b : cc.bins)
        calib.append_row({model, std::to_string(h), "bins",
                          fmt_double(b.mean_predicted),
                          fmt_double(b.observed_rate), fmt_double(b.ci_lo),
                          fmt_double(b.ci_hi)});
      for (const auto& [p, v] : cc.smoother)
        calib.append_row({model, std::to_string(h), "smoother", fmt_double(p),
                          fmt_double(v), "", ""});
    }
    std::cout << "[eval] " << model << " scored\n";
  }

  predictions.save(artifact_path(cfg, "predictions.csv"));
  metrics.save(artifact_path(cfg, "metrics.csv"));
  shd_used.save(artifact_path(cfg, "shd_used.csv"));
  calib.save(artifact_path(cfg, "calibration.csv"));
  top_coefs.save(artifact_path(cfg, "top_coefs.csv"));

  if (cfg.svg) {
    CsvTable t = parse_csv(calib.str());
    SvgSeries bins{"observed", {}}, smooth{"smoothed", {}},
        diag{"ideal", {{0.0, 0.0}, {1.0, 1.0}}};
    for (const auto& row : t.rows) {
      if (row[0] != cfg.stratify_model ||
          row[1] != std::to_string(cfg.stratify_horizon))
        continue;
      double x = parse_double_field(row[3], "x");
      double y = parse_double_field(row[4], "y");
      (row[2] == "bins" ? bins : smooth).points.emplace_back(x, y);
    }
    write_file(artifact_path(cfg, "calibration.svg"),
               render_line_chart("Calibration: " + cfg.stratify_model + ", " +
                                     std::to_string(cfg.stratify_horizon) +
                                     "d",
                                 "predicted risk", "observed rate",
                                 {diag, bins, smooth}));
  }
}

// predictions.csv split back into per-model/horizon test-set scored sets
struct TestScores {
  std::vector<std::string> patient_ids;
  std::vector<double> scores;
  std::vector<int> labels;
};

inline TestScores load_test_scores(const RunConfig& cfg,
                                   const std::string& model, int horizon) {
  std::string path = artifact_path(cfg, "predictions.csv");
  require_artifact(path, "eval");
  CsvTable t = read_csv(path);
  int c_model = t.require_column("model");
  int c_h = t.require_column("horizon");
  int c_pid = t.require_column("patient_id");
  int c_split = t.require_column("split");
  int c_label = t.require_column("label");
  int c_score = t.require_column("score");
  TestScores out;
  std::string h_str = std::to_string(horizon);
  for (const auto& row : t.rows) {
    if (row[static_cast<size_t>(c_model)] != model ||
        row[static_cast<size_t>(c_h)] != h_str ||
        row[static_cast<size_t>(c_split)] != "test")
      continue;
    out.patient_ids.push_back(row[static_cast<size_t>(c_pid)]);
    out.scores.push_back(
        parse_double_field(row[static_cast<size_t>(c_score)], "score"));
    out.labels.push_back(
        parse_int_field(row[static_cast<size_t>(c_label)], "label"));
  }
  if (out.scores.empty())
    throw std::invalid_argument("predictions.csv has no test rows for " +
                                model + " at horizon " + h_str +
                                "; re-run `acurisk eval`");
  return out;
}

inline void stage_dca(const RunConfig& cfg) {
  require_artifact(artifact_path(cfg, "predictions.csv"), "eval");
  CsvWriter out({"model", "horizon", "series", "x", "y", "lo", "hi"});
  std::vector<double> grid =
      cfg.dca_grid.empty() ? default_dca_grid() : cfg.dca_grid;
  for (const auto& model : all_model_names()) {
    if (std::find(cfg.models.begin(), cfg.models.end(), model) ==
        cfg.models.end())
      continue;
    for (int h : cfg.horizons) {
      TestScores ts = load_test_scores(cfg, model, h);
      DecisionCurve dc = decision_curve(ts.scores, ts.labels, grid);
      for (size_t i = 0; i < dc.thresholds.size(); ++i) {
        std::string x = fmt_double(dc.thresholds[i]);
        out.append_row({model, std::to_string(h), "model", x,
                        fmt_double(dc.nb_model[i]), "", ""});
        out.append_row({model, std::to_string(h), "all", x,
                        fmt_double(dc.nb_all[i]), "", ""});
        out.append_row({model, std::to_string(h), "none", x,
                        fmt_double(dc.nb_none[i]), "", ""});
      }
    }
  }
  out.save(artifact_path(cfg, "dca.csv"));
  std::cout << "[dca] wrote decision curves for " << cfg.models.size()
            << " models x " << cfg.horizons.size() << " horizons\n";

  if (cfg.svg) {
    TestScores ts =
        load_test_scores(cfg, cfg.stratify_model, cfg.stratify_horizon);
    DecisionCurve dc = decision_curve(ts.scores, ts.labels, grid);
    SvgSeries sm{cfg.stratify_model, {}}, sa{"treat all", {}},
        sn{"treat none", {}};
    for (size_t i = 0; i < dc.thresholds.size(); ++i) {
      sm.points.emplace_back(dc.thresholds[i], dc.nb_model[i]);
      sa.points.emplace_back(dc.thresholds[i], dc.nb_all[i]);
      sn.points.emplace_back(dc.thresholds[i], 0.0);
    }
    write_file(artifact_path(cfg, "dca.svg"),
               render_line_chart(
                   "Decision curve: " + cfg.stratify_model + ", " +
                       std::to_string(cfg.stratify_horizon) + "d",
                   "decision threshold", "net benefit", {sm, sa, sn}));
  }
}

inline void stage_km(const RunConfig& cfg) {
  require_artifact(cfg.cohort_csv, "generate");
  require_artifact(cfg.notes_jsonl, "generate");
  TestScores ts =
      load_test_scores(cfg, cfg.stratify_model, cfg.stratify_horizon);
  LoadResult data = load_cohort(cfg.cohort_csv, cfg.notes_jsonl);
  std::unordered_map<std::string, const CohortRecord*> by_id;
  for (const auto& r : data.records) by_id[r.patient_id] = &r;

  TertileResult tert = stratify_tertiles(ts.scores);
  if (tert.degenerate)
    std::cout << "[km] warning: all scores equal; every patient assigned to "
                 "the low-risk group\n";

  // time to first event, censored at follow-up end
  std::array<SurvivalData, 3> groups;
  for (size_t i = 0; i < ts.scores.size(); ++i) {
    auto it = by_id.find(ts.patient_ids[i]);
    if (it == by_id.end())
      throw std::runtime_error("predictions.csv patient " + ts.patient_ids[i] +
                               " not in cohort; re-run `acurisk eval`");
    const CohortRecord& r = *it->second;
    double time = r.event_day ? static_cast<double>(*r.event_day)
                              : static_cast<double>(r.followup_days);
    int event = r.event_day ? 1 : 0;
    auto& g = groups[static_cast<size_t>(tert.assignment[i])];
    g.times.push_back(time);
    g.events.push_back(event);
  }

  CsvWriter km_csv({"model", "horizon", "series", "x", "y", "lo", "hi"});
  static const char* group_names[3] = {"low", "medium", "high"};
  std::vector<SvgSeries> svg_series;
  std::vector<SurvivalData> logrank_groups;
  std::string h_str = std::to_string(cfg.stratify_horizon);
  for (int g = 0; g < 3; ++g) {
    const auto& sd = groups[static_cast<size_t>(g)];
    if (sd.times.empty()) continue;
    KmCurve curve = kaplan_meier(sd.times, sd.events, group_names[g]);
    km_csv.append_row({cfg.stratify_model, h_str, group_names[g], "0", "1",
                       "1", "1"});
    SvgSeries series{group_names[g], {{0.0, 1.0}}};
    for (const auto& p : curve.points) {
      km_csv.append_row({cfg.stratify_model, h_str, group_names[g],
                         fmt_double(p.time), fmt_double(p.survival),
                         fmt_double(p.lo), fmt_double(p.hi)});
      series.points.emplace_back(p.time, p.survival);
    }
    svg_series.push_back(std::move(series));
    logrank_groups.push_back(sd);
  }
  km_csv.save(artifact_path(cfg, "km.csv"));

  CsvWriter lr_csv({"model", "horizon", "chi2", "df", "p", "p_display"});
  if (logrank_groups.size() >= 2) {
    LogRankResult lr = log_rank(logrank_groups);
    lr_csv.append_row({cfg.stratify_model, h_str, fmt_double(lr.chi2),
                       std::to_string(lr.df), fmt_double(lr.p),
                       format_p_value(lr.p)});
    std::cout << "[km] log-rank chi2=" << fmt_fixed(lr.chi2, 2)
              << " df=" << lr.df << " p=" << format_p_value(lr.p) << "\n";
  } else {
    lr_csv.append_row({cfg.stratify_model, h_str, "", "", "", "n/a"});
    std::cout << "[km] log-rank skipped: fewer than 2 occupied risk groups\n";
  }
  lr_csv.save(artifact_path(cfg, "logrank.csv"));

  if (cfg.svg)
    write_file(artifact_path(cfg, "km.svg"),
               render_line_chart("Kaplan-Meier by risk tertile (" +
                                     cfg.stratify_model + ", " + h_str + "d)",
                                 "days since chemo start",
                                 "event-free fraction", svg_series));
}

inline void stage_fairness(const RunConfig& cfg) {
  require_artifact(cfg.cohort_csv, "generate");
  require_artifact(cfg.notes_jsonl, "generate");
  TestScores ts =
      load_test_scores(cfg, cfg.stratify_model, cfg.stratify_horizon);
  LoadResult data = load_cohort(cfg.cohort_csv, cfg.notes_jsonl);
  std::unordered_map<std::string, const CohortRecord*> by_id;
  for (const auto& r : data.records) by_id[r.patient_id] = &r;

  auto attr_of = [](const CohortRecord& r,
                    const std::string& attr) -> const std::string& {
    if (attr == "sex") return r.sex;
    if (attr == "race") return r.race;
    if (attr == "ethnicity") return r.ethnicity;
    if (attr == "insurance") return r.insurance;
    if (attr == "cancer_type") return r.cancer_type;
    return r.cancer_stage;
  };

  CsvWriter out({"model", "horizon", "series", "x", "y", "lo", "hi"});
  std::string h_str = std::to_string(cfg.stratify_horizon);
  for (const auto& attr : cfg.fairness_attrs) {
    std::vector<std::string> tags;
    tags.reserve(ts.scores.size());
    for (const auto& pid : ts.patient_ids) {
      auto it = by_id.find(pid);
      if (it == by_id.end())
        throw std::runtime_error("predictions.csv patient " + pid +
                                 " not in cohort; re-run `acurisk eval`");
      tags.push_back(attr_of(*it->second, attr));
    }
    std::vector<SubgroupEcdf> curves = subgroup_ecdf(ts.scores, tags);
    std::vector<SvgSeries> svg_series{
        {"parity", {{0.0, 0.0}, {1.0, 1.0}}}};
    for (const auto& c : curves) {
      SvgSeries series{c.group, {{0.0, 0.0}}};
      for (size_t i = 0; i < c.percentiles.size(); ++i) {
        out.append_row({cfg.stratify_model, h_str, attr + ":" + c.group,
                        fmt_double(c.percentiles[i]), fmt_double(c.ecdf[i]),
                        "", ""});
        series.points.emplace_back(c.percentiles[i], c.ecdf[i]);
      }
      svg_series.push_back(std::move(series));
    }
    if (cfg.svg)
      write_file(artifact_path(cfg, "ecdf_" + attr + ".svg"),
                 render_line_chart("Risk percentile ECDF by " + attr + " (" +
                                       cfg.stratify_model + ", " + h_str +
                                       "d)",
                                   "population risk percentile",
                                   "cumulative fraction of subgroup",
                                   svg_series));
  }
  out.save(artifact_path(cfg, "ecdf.csv"));
  std::cout << "[fairness] wrote ECDFs for "
            << join(cfg.fairness_attrs, ",") << "\n";
}

inline void stage_report(const RunConfig& cfg) {
  struct Needed {
    const char* file;
    const char* producer;
  };
  static const Needed needed[] = {
      {"metrics.csv", "eval"},      {"shd_used.csv", "eval"},
      {"calibration.csv", "eval"},  {"top_coefs.csv", "eval"},
      {"predictions.csv", "eval"},  {"dca.csv", "dca"},
      {"km.csv", "km"},             {"logrank.csv", "km"},
      {"ecdf.csv", "fairness"},
  };
  std::string missing;
  for (const auto& n : needed)
    if (!file_exists(artifact_path(cfg, n.file)))
      missing += "\n  " + std::string(n.file) + " (run `acurisk " +
                 n.producer + " --config <config>`)";
  if (!missing.empty())
    throw std::invalid_argument("report: missing artifacts:" + missing);

  LoadResult data = load_cohort(cfg.cohort_csv, cfg.notes_jsonl);
  int n_train = 0, n_test = 0;
  std::map<int, int> events_by_horizon;
  for (const auto& r : data.records) {
    (r.split == Split::train ? n_train : n_test) += 1;
    for (int h : cfg.horizons)
      events_by_horizon[h] += make_binary_label(r.event_day, h).value;
  }

  CsvTable metrics = read_csv(artifact_path(cfg, "metrics.csv"));
  // (model, horizon, metric) -> "point (lo-hi)"
  std::map<std::string, std::string> cell;
  for (const auto& row : metrics.rows) {
    double point = parse_double_field(row[3], "point");
    double lo = parse_double_field(row[4], "lo");
    double hi = parse_double_field(row[5], "hi");
    cell[row[0] + "|" + row[1] + "|" + row[2]] =
        fmt_fixed(point, 3) + " (" + fmt_fixed(lo, 3) + "-" +
        fmt_fixed(hi, 3) + ")";
  }
  CsvTable shd = read_csv(artifact_path(cfg, "shd_used.csv"));
  std::map<std::string, std::string> shd_cell;
  for (const auto& row : shd.rows) shd_cell[row[0] + "|" + row[1]] = row[2];
  auto shd_for = [&](const std::string& model, int h) -> std::string {
    auto it = shd_cell.find(model + "|" + std::to_string(h));
    if (it != shd_cell.end()) return it->second;
    it = shd_cell.find(model + "|all");
    if (it != shd_cell.end()) return it->second;
    return "-";
  };

  std::string md;
  md += "# ACU risk pipeline report\n\n";
  md += "Library version " + std::string(acurisk_version()) +
        ", config hash `" + config_hash(cfg) + "`.\n\n";
  md += "## Cohort\n\n";
  md += "- patients: " + std::to_string(data.records.size()) + " (train " +
        std::to_string(n_train) + ", test " + std::to_string(n_test) + ")\n";
  for (int h : cfg.horizons) {
    double rate = static_cast<double>(events_by_horizon[h]) /
                  static_cast<double>(data.records.size());
    md += "- event rate at " + std::to_string(h) + " days: " +
          fmt_fixed(rate, 3) + "\n";
  }
  md += "\n## Discrimination on the test split\n\n";
  md += "| Model | Horizon (days) | SHD used | AUROC (95% CI) | AUPRC (95% "
        "CI) | Cross-entropy (95% CI) |\n";
  md += "|---|---|---|---|---|---|\n";
  for (const auto& model : all_model_names()) {
    if (std::find(cfg.models.begin(), cfg.models.end(), model) ==
        cfg.models.end())
      continue;
    for (int h : cfg.horizons) {
      std::string key = model + "|" + std::to_string(h) + "|";
      md += "| " + model + " | " + std::to_string(h) + " | " +
            shd_for(model, h) + " | " + cell[key + "auroc"] + " | " +
            cell[key + "auprc"] + " | " + cell[key + "cross_entropy"] +
            " |\n";
    }
  }

  // strongest language signal: the highest/lowest standardised weights
  std::string coef_model;
  for (const auto& m : {std::string("language_lasso"), cfg.stratify_model})
    if (is_lasso_model(m) &&
        std::find(cfg.models.begin(), cfg.models.end(), m) != cfg.models.end())
      coef_model = m;
  if (!coef_model.empty()) {
    CsvTable tc = read_csv(artifact_path(cfg, "top_coefs.csv"));
    std::string h_str = std::to_string(cfg.stratify_horizon);
    std::vector<std::pair<std::string, std::string>> high, low;
    for (const auto& row : tc.rows) {
      if (row[0] != coef_model || row[1] != h_str) continue;
      double w = parse_double_field(row[6], "value_std");
      auto& dst = row[2] == "high" ? high : low;
      dst.emplace_back(row[4], fmt_fixed(w, 4));
    }
    md += "\n## Largest coefficients (" + coef_model + ", " + h_str +
          " days, standardised scale)\n\n";
    md += "| Rank | Highest | Weight | Lowest | Weight |\n";
    md += "|---|---|---|---|---|\n";
    size_t rows = std::max(high.size(), low.size());
    for (size_t r = 0; r < rows && r < 20; ++r) {
      std::string hn = r < high.size() ? high[r].first : "";
      std::string hw = r < high.size() ? high[r].second : "";
      std::string ln = r < low.size() ? low[r].first : "";
      std::string lw = r < low.size() ? low[r].second : "";
      md += "| " + std::to_string(r + 1) + " | " + hn + " | " + hw + " | " +
            ln + " | " + lw + " |\n";
    }
  }

  CsvTable lr = read_csv(artifact_path(cfg, "logrank.csv"));
  md += "\n## Risk stratification\n\n";
  if (!lr.rows.empty() && !lr.rows[0][2].empty()) {
    md += "Tertiles of " + lr.rows[0][0] + " risk at " + lr.rows[0][1] +
          " days; log-rank chi2 = " +
          fmt_fixed(parse_double_field(lr.rows[0][2], "chi2"), 2) + " (df " +
          lr.rows[0][3] + "), p " +
          (lr.rows[0][5][0] == '<' ? lr.rows[0][5] : "= " + lr.rows[0][5]) +
          ".\n";
  } else {
    md += "Log-rank not computed (fewer than 2 occupied risk groups).\n";
  }

  md += "\n## Artifact index\n\n";
  md += "- `metrics.csv` - discrimination metrics with bootstrap CIs\n";
  md += "- `predictions.csv` - per-patient scores, both splits\n";
  md += "- `calibration.csv`, `dca.csv`, `km.csv`, `ecdf.csv` - curve tables "
        "(long format)\n";
  md += "- `logrank.csv` - tertile separation test\n";
  md += "- `shd_used.csv` - structured-feature usage per model\n";
  md += "- `top_coefs.csv` - largest positive/negative weights per LASSO "
        "model\n";
  md += "- `manifest.json` - config, input hashes, stage timings\n";
  static const char* svgs[] = {"calibration.svg", "dca.svg", "km.svg"};
  for (const char* f : svgs)
    if (file_exists(artifact_path(cfg, f)))
      md += "\n![" + std::string(f) + "](" + f + ")\n";
  for (const auto& attr : cfg.fairness_attrs) {
    std::string f = "ecdf_" + attr + ".svg";
    if (file_exists(artifact_path(cfg, f)))
      md += "\n![" + f + "](" + f + ")\n";
  }

  write_file(artifact_path(cfg, "report.md"), md);
  std::cout << "[report] wrote report.md\n";
}

// ---------------------------------------------------------------------------
// Stage dispatch

inline const std::vector<std::string>& all_stage_names() {
  static const std::vector<std::string> names = {
      "generate", "prep", "train", "eval", "dca", "km", "fairness", "report"};
  return names;
}

inline void run_stage(const RunConfig& cfg, const std::string& stage) {
  std::filesystem::create_directories(cfg.output_dir);
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (stage == "generate")
      stage_generate(cfg);
    else if (stage == "prep")
      stage_prep(cfg);
    else if (stage == "train")
      stage_train(cfg);
    else if (stage == "eval")
      stage_eval(cfg);
    else if (stage == "dca")
      stage_dca(cfg);
    else if (stage == "km")
      stage_km(cfg);
    else if (stage == "fairness")
      stage_fairness(cfg);
    else if (stage == "report")
      stage_report(cfg);
    else
      throw std::invalid_argument("unknown stage: " + stage);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("stage " + stage + " failed: " + e.what() +
                                "\nrerun with: acurisk " + stage +
                                " --config <config>");
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + stage + " failed: " + e.what() +
                             "\nrerun with: acurisk " + stage +
                             " --config <config>");
  }
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  record_stage(cfg, stage, seconds);
}

// All stages in order; `generate` only if the config carries a synthetic
// block (otherwise the cohort files must already exist).
inline void run_pipeline(const RunConfig& cfg) {
  for (const auto& stage : all_stage_names()) {
    if (stage == "generate" && !cfg.has_synthetic) continue;
    run_stage(cfg, stage);
  }
}

}  // namespace acu
