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

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "acu/text.hpp"
#include "acu/util.hpp"

namespace acu {

enum class FeatureSource { shd, language };

inline std::string to_string(FeatureSource s) {
  return s == FeatureSource::shd ? "shd" : "language";
}
inline FeatureSource feature_source_from_string(const std::string& s) {
  if (s == "shd") return FeatureSource::shd;
  if (s == "language") return FeatureSource::language;
  throw std::invalid_argument("unknown feature source: '" + s + "'");
}

// Sparse row-major design matrix with named, source-tagged columns.
// Standardisation stats are computed once on the training rows and shared
// by every fit on this design (path and CV folds alike).
struct Design {
  std::vector<std::string> names;
  std::vector<FeatureSource> sources;
  std::vector<std::vector<std::pair<int, double>>> rows;  // col-sorted
  std::vector<double> mean, stddev;  // filled by compute_stats
  std::vector<char> active;          // stddev > 0; frozen at coef 0 otherwise

  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_cols() const { return static_cast<int>(names.size()); }
  bool has_stats() const { return mean.size() == names.size(); }

  bool has_source(FeatureSource s) const {
    for (auto src : sources)
      if (src == s) return true;
    return false;
  }

  void check_columns() const {
    if (names.size() != sources.size())
      throw std::invalid_argument("design: names/sources length mismatch");
    std::unordered_map<std::string, int> seen;
    for (const auto& n : names)
      if (++seen[n] > 1)
        throw std::invalid_argument("design: duplicate column name " + n);
  }

  // Population mean/std over the given rows, implicit zeros included.
  // Rejects non-finite values anywhere in those rows.
  void compute_stats(const std::vector<int>& row_idx) {
    check_columns();
    if (row_idx.empty())
      throw std::invalid_argument("design: no rows for stats");
    size_t p = names.size();
    std::vector<double> sum(p, 0.0), sumsq(p, 0.0);
    for (int i : row_idx) {
      for (const auto& [j, v] : rows.at(static_cast<size_t>(i))) {
        if (!std::isfinite(v))
          throw std::invalid_argument("design: non-finite value in row " +
                                      std::to_string(i) + ", column " +
                                      names[static_cast<size_t>(j)]);
        sum[static_cast<size_t>(j)] += v;
        sumsq[static_cast<size_t>(j)] += v * v;
      }
    }
    double n = static_cast<double>(row_idx.size());
    mean.assign(p, 0.0);
    stddev.assign(p, 0.0);
    active.assign(p, 0);
    for (size_t j = 0; j < p; ++j) {
      mean[j] = sum[j] / n;
      double var = sumsq[j] / n - mean[j] * mean[j];
      if (var < 0) var = 0;
      stddev[j] = std::sqrt(var);
      active[j] = stddev[j] > 1e-12 ? 1 : 0;
    }
  }

  // Stable identity of the column layout, recorded in persisted models.
  std::uint64_t schema_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (size_t j = 0; j < names.size(); ++j) {
      h = fnv1a64(names[j], h);
      h = fnv1a64(to_string(sources[j]), h);
      h = fnv1a64("|", h);
    }
    return h;
  }
};

// Assembles the per-model design. SHD columns are dense (stored sparsely
// all the same); language columns come from TF-IDF vectors over the
// vocabulary, named "w_<term>".
struct DesignBuilder {
  Design design;

  void add_shd_columns(const std::vector<std::string>& shd_names) {
    for (const auto& n : shd_names) {
      design.names.push_back(n);
      design.sources.push_back(FeatureSource::shd);
    }
  }
  void add_language_columns(const Vocabulary& vocab) {
    for (const auto& t : vocab.terms) {
      design.names.push_back("w_" + t);
      design.sources.push_back(FeatureSource::language);
    }
  }

  // Row values are appended in column order; offsets locate each block.
  int add_row() {
    design.rows.emplace_back();
    return static_cast<int>(design.rows.size()) - 1;
  }
  void set_dense(int row, int col_offset, const std::vector<double>& values) {
    auto& r = design.rows.at(static_cast<size_t>(row));
    for (size_t j = 0; j < values.size(); ++j)
      if (values[j] != 0.0)
        r.emplace_back(col_offset + static_cast<int>(j), values[j]);
  }
  void set_sparse(int row, int col_offset, const TfidfVector& v) {
    auto& r = design.rows.at(static_cast<size_t>(row));
    for (const auto& [j, w] : v.entries)
      if (w != 0.0) r.emplace_back(col_offset + j, w);
  }

  Design finish() {
    design.check_columns();
    for (auto& r : design.rows)
      std::sort(r.begin(), r.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
    return std::move(design);
  }
};

}  // namespace acu
