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

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acu/cohort.hpp"
#include "acu/rng.hpp"
#include "acu/text.hpp"
#include "acu/util.hpp"

namespace acu {

struct ChunkSet {
  std::vector<std::vector<std::string>> chunks;  // each <= chunk length
  bool truncated = false;
};

// Greedy fixed-size chunking; streams beyond max_chunks * chunk_len tokens
// are cut at the front 25 chunks and flagged.
inline ChunkSet chunk(const std::vector<std::string>& tokens,
                      int chunk_len = 256, int max_chunks = 25) {
  if (tokens.empty()) throw std::invalid_argument("chunk: empty token stream");
  if (chunk_len < 1 || max_chunks < 1)
    throw std::invalid_argument("chunk: sizes must be >= 1");
  ChunkSet out;
  size_t limit = static_cast<size_t>(chunk_len) *
                 static_cast<size_t>(max_chunks);
  size_t n = tokens.size();
  if (n > limit) {
    n = limit;
    out.truncated = true;
  }
  for (size_t start = 0; start < n; start += static_cast<size_t>(chunk_len)) {
    size_t end = std::min(n, start + static_cast<size_t>(chunk_len));
    out.chunks.emplace_back(tokens.begin() + static_cast<long>(start),
                            tokens.begin() + static_cast<long>(end));
  }
  return out;
}

using Embedding = std::vector<double>;

// Deterministic encoder stand-in for a pre-trained transformer: hashed
// bag-of-tokens projected through a seeded pseudo-random matrix, tanh
// squashed. Bag semantics: token order inside a chunk does not matter.
// Any encoder honouring encode(tokens <= 256) -> fixed-dim vector and
// determinism can replace it.
struct HashedEncoder {
  std::uint64_t seed = 0;
  int dim = 128;

  Embedding encode(const std::vector<std::string>& tokens) const {
    if (static_cast<int>(tokens.size()) > 256)
      throw std::invalid_argument("encode: chunk longer than 256 tokens");
    Embedding e(static_cast<size_t>(dim), 0.0);
    for (const auto& tok : tokens) {
      std::uint64_t state = seed ^ fnv1a64(tok);
      for (int d = 0; d < dim; ++d) {
        std::uint64_t bits = splitmix64_next(state);
        double u = static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0,1)
        e[static_cast<size_t>(d)] += 2.0 * u - 1.0;
      }
    }
    double scale =
        tokens.empty() ? 1.0 : 1.0 / std::sqrt(static_cast<double>(tokens.size()));
    for (auto& v : e) v = std::tanh(v * scale);
    return e;
  }
};

inline Embedding average_embeddings(const std::vector<Embedding>& embeddings) {
  if (embeddings.empty())
    throw std::invalid_argument("average_embeddings: empty set");
  size_t d = embeddings[0].size();
  Embedding mean(d, 0.0);
  for (const auto& e : embeddings) {
    if (e.size() != d)
      throw std::invalid_argument("average_embeddings: dimension mismatch");
    for (size_t k = 0; k < d; ++k) mean[k] += e[k];
  }
  double inv = 1.0 / static_cast<double>(embeddings.size());
  for (auto& v : mean) v *= inv;
  return mean;
}

// chunk -> encode -> average for one patient document.
inline Embedding embed_tokens(const HashedEncoder& encoder,
                              const std::vector<std::string>& tokens,
                              bool* truncated = nullptr) {
  ChunkSet cs = chunk(tokens);
  if (truncated) *truncated = cs.truncated;
  std::vector<Embedding> parts;
  parts.reserve(cs.chunks.size());
  for (const auto& c : cs.chunks) parts.push_back(encoder.encode(c));
  return average_embeddings(parts);
}

inline Embedding fuse(const Embedding& note_embedding,
                      const std::vector<double>& shd_standardised) {
  Embedding out = note_embedding;
  out.insert(out.end(), shd_standardised.begin(), shd_standardised.end());
  return out;
}

// Standardisation for the SHD block of fused inputs; fit on training rows.
struct ShdStandardiser {
  std::vector<double> mean, stddev;

  void fit(const std::vector<const std::vector<double>*>& rows) {
    if (rows.empty()) throw std::invalid_argument("standardiser: no rows");
    size_t p = rows[0]->size();
    mean.assign(p, 0.0);
    stddev.assign(p, 0.0);
    for (const auto* r : rows) {
      if (r->size() != p)
        throw std::invalid_argument("standardiser: ragged rows");
      for (size_t j = 0; j < p; ++j) mean[j] += (*r)[j];
    }
    double n = static_cast<double>(rows.size());
    for (auto& m : mean) m /= n;
    for (const auto* r : rows)
      for (size_t j = 0; j < p; ++j) {
        double d = (*r)[j] - mean[j];
        stddev[j] += d * d;
      }
    for (auto& s : stddev) s = std::sqrt(s / n);
  }

  std::vector<double> apply(const std::vector<double>& row) const {
    if (row.size() != mean.size())
      throw std::invalid_argument("standardiser: dimension mismatch");
    std::vector<double> out(row.size());
    for (size_t j = 0; j < row.size(); ++j)
      out[j] = stddev[j] > 1e-12 ? (row[j] - mean[j]) / stddev[j] : 0.0;
    return out;
  }
};

struct OrdinalProbabilities {
  std::array<double, 4> slices;      // P of category 1..4
  std::array<double, 3> cumulative;  // P(x<=30), P(x<=180), P(x<=365)
};

// Thresholds realised as theta1 = raw0, theta_{k+1} = theta_k + exp(raw_k):
// strictly increasing for any raw values, which forces the cumulative
// probabilities to nest correctly.
struct OrdinalModel {
  std::vector<double> w;
  std::array<double, 3> theta_raw = {0.0, 0.0, 0.0};
  bool fusion = false;
  int embed_dim = 128;
  int shd_dim = 0;
  std::uint64_t encoder_seed = 0;

  std::array<double, 3> thresholds() const {
    std::array<double, 3> t;
    t[0] = theta_raw[0];
    t[1] = t[0] + std::exp(theta_raw[1]);
    t[2] = t[1] + std::exp(theta_raw[2]);
    return t;
  }
};

inline OrdinalProbabilities forward(const OrdinalModel& model,
                                    const Embedding& x) {
  if (x.size() != model.w.size())
    throw std::invalid_argument("forward: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(model.w.size()) + ")");
  double s = 0.0;
  for (size_t j = 0; j < x.size(); ++j) s += model.w[j] * x[j];
  auto theta = model.thresholds();
  OrdinalProbabilities out;
  double c1 = sigmoid(theta[0] - s);
  double c2 = std::max(sigmoid(theta[1] - s), c1);
  double c3 = std::max(sigmoid(theta[2] - s), c2);
  out.cumulative = {c1, c2, c3};
  out.slices = {c1, c2 - c1, c3 - c2, 1.0 - c3};
  return out;
}

inline double cll_loss(const OrdinalProbabilities& probs,
                       const OrdinalLabel& label) {
  if (label.category < 1 || label.category > 4)
    throw std::invalid_argument("label category out of range");
  double p = probs.slices[static_cast<size_t>(label.category - 1)];
  return -std::log(std::max(p, 1e-12));
}

struct OrdinalGradient {
  double loss = 0.0;
  std::vector<double> g_w;
  std::array<double, 3> g_theta_raw = {0.0, 0.0, 0.0};
};

// Mean cumulative-link NLL and its analytic gradient. Per sample with
// category c, P = sig(theta_c - s) - sig(theta_{c-1} - s) (bounds 0 and 1):
//   dL/ds       = (c_c' - c_{c-1}') / P          with c_k' = c_k (1 - c_k)
//   dL/dtheta_c = -c_c'/P,  dL/dtheta_{c-1} = +c_{c-1}'/P
// then chained through theta_k = raw0 + sum_{m<k} exp(raw_m). Samples whose
// P hits the 1e-12 floor contribute a clipped loss and zero gradient.
inline OrdinalGradient ordinal_loss_gradient(
    const std::vector<double>& w, const std::array<double, 3>& theta_raw,
    const std::vector<Embedding>& xs, const std::vector<OrdinalLabel>& labels,
    const std::vector<int>& rows) {
  if (xs.size() != labels.size())
    throw std::invalid_argument("gradient: xs/labels length mismatch");
  OrdinalGradient out;
  out.g_w.assign(w.size(), 0.0);
  std::array<double, 3> theta;
  theta[0] = theta_raw[0];
  theta[1] = theta[0] + std::exp(theta_raw[1]);
  theta[2] = theta[1] + std::exp(theta_raw[2]);

  std::array<double, 3> g_theta_sum = {0.0, 0.0, 0.0};
  for (int idx : rows) {
    const auto& x = xs.at(static_cast<size_t>(idx));
    int cat = labels[static_cast<size_t>(idx)].category;
    if (cat < 1 || cat > 4)
      throw std::invalid_argument("label category out of range");
    if (x.size() != w.size())
      throw std::invalid_argument("gradient: dimension mismatch");
    double s = 0.0;
    for (size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];

    double c_hi = cat <= 3 ? sigmoid(theta[static_cast<size_t>(cat - 1)] - s)
                           : 1.0;
    double c_lo = cat >= 2 ? sigmoid(theta[static_cast<size_t>(cat - 2)] - s)
                           : 0.0;
    double p = c_hi - c_lo;
    if (p < 1e-12) {
      out.loss += -std::log(1e-12);
      continue;
    }
    out.loss += -std::log(p);
    double dhi = cat <= 3 ? c_hi * (1.0 - c_hi) : 0.0;
    double dlo = cat >= 2 ? c_lo * (1.0 - c_lo) : 0.0;
    double dl_ds = (dhi - dlo) / p;
    for (size_t j = 0; j < x.size(); ++j) out.g_w[j] += dl_ds * x[j];
    if (cat <= 3) g_theta_sum[static_cast<size_t>(cat - 1)] += -dhi / p;
    if (cat >= 2) g_theta_sum[static_cast<size_t>(cat - 2)] += dlo / p;
  }

  double n = static_cast<double>(rows.size());
  out.loss /= n;
  for (auto& g : out.g_w) g /= n;
  // chain rule: theta_k depends on raw0 always, raw1 for k>=2, raw2 for k=3
  out.g_theta_raw[0] =
      (g_theta_sum[0] + g_theta_sum[1] + g_theta_sum[2]) / n;
  out.g_theta_raw[1] =
      std::exp(theta_raw[1]) * (g_theta_sum[1] + g_theta_sum[2]) / n;
  out.g_theta_raw[2] = std::exp(theta_raw[2]) * g_theta_sum[2] / n;
  return out;
}

struct OrdinalTrainConfig {
  double learning_rate = 1.0;
  int max_epochs = 5000;
  int patience = 50;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct OrdinalFit {
  OrdinalModel model;
  int epochs = 0;
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  double best_val_loss = 0.0;
};

// Full-batch gradient descent with step halving on training-loss increase
// and early stopping on a held-out validation slice; returns the
// best-validation parameters. Training loss over accepted steps is
// non-increasing by construction.
inline OrdinalFit train_ordinal(const std::vector<Embedding>& xs,
                                const std::vector<OrdinalLabel>& labels,
                                const OrdinalTrainConfig& cfg) {
  if (xs.size() != labels.size())
    throw std::invalid_argument("train: xs/labels length mismatch");
  if (xs.size() < 5) throw std::invalid_argument("train: need >= 5 samples");
  std::array<int, 5> cat_count = {0, 0, 0, 0, 0};
  for (const auto& l : labels) {
    if (l.category < 1 || l.category > 4)
      throw std::invalid_argument("label category out of range");
    ++cat_count[static_cast<size_t>(l.category)];
  }
  int distinct = 0;
  for (int k = 1; k <= 4; ++k) distinct += cat_count[static_cast<size_t>(k)] > 0;
  if (distinct < 2)
    throw std::invalid_argument("train: need >= 2 distinct categories");

  size_t dim = xs[0].size();
  std::vector<int> order(xs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng(cfg.seed);
  rng.shuffle(order);
  int n_val = std::max(1, static_cast<int>(std::llround(
                              cfg.val_fraction *
                              static_cast<double>(order.size()))));
  n_val = std::min(n_val, static_cast<int>(order.size()) - 2);
  std::vector<int> val_rows(order.end() - n_val, order.end());
  std::vector<int> train_rows(order.begin(), order.end() - n_val);

  // threshold init from training base rates, floors keep them increasing
  double n_train = static_cast<double>(train_rows.size());
  std::array<double, 3> cum = {0.0, 0.0, 0.0};
  for (int i : train_rows) {
    int cat = labels[static_cast<size_t>(i)].category;
    for (int k = 0; k < 3; ++k)
      if (cat <= k + 1) cum[static_cast<size_t>(k)] += 1.0;
  }
  std::array<double, 3> theta_init;
  double prev = -1e9;
  for (int k = 0; k < 3; ++k) {
    double rate = clip(cum[static_cast<size_t>(k)] / n_train, 1e-3, 1.0 - 1e-3);
    double th = logit(rate);
    if (th <= prev + 1e-3) th = prev + 1e-3;
    theta_init[static_cast<size_t>(k)] = th;
    prev = th;
  }
  std::vector<double> w(dim, 0.0);
  std::array<double, 3> raw;
  raw[0] = theta_init[0];
  raw[1] = std::log(theta_init[1] - theta_init[0]);
  raw[2] = std::log(theta_init[2] - theta_init[1]);

  auto eval_loss = [&](const std::vector<double>& w_,
                       const std::array<double, 3>& raw_,
                       const std::vector<int>& rows) {
    OrdinalModel m;
    m.w = w_;
    m.theta_raw = raw_;
    double loss = 0.0;
    for (int i : rows)
      loss += cll_loss(forward(m, xs[static_cast<size_t>(i)]),
                       labels[static_cast<size_t>(i)]);
    return loss / static_cast<double>(rows.size());
  };

  OrdinalGradient grad =
      ordinal_loss_gradient(w, raw, xs, labels, train_rows);
  double train_loss = grad.loss;
  double initial_loss = train_loss;
  double lr = cfg.learning_rate;

  std::vector<double> best_w = w;
  std::array<double, 3> best_raw = raw;
  double best_val = eval_loss(w, raw, val_rows);
  int best_epoch = 0;
  int epoch = 0;

  std::vector<double> w_try(dim);
  std::array<double, 3> raw_try;
  for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (size_t j = 0; j < dim; ++j) w_try[j] = w[j] - lr * grad.g_w[j];
      for (int k = 0; k < 3; ++k)
        raw_try[static_cast<size_t>(k)] =
            raw[static_cast<size_t>(k)] -
            lr * grad.g_theta_raw[static_cast<size_t>(k)];
      double loss_try = eval_loss(w_try, raw_try, train_rows);
      if (loss_try <= train_loss) {
        w.swap(w_try);
        raw = raw_try;
        train_loss = loss_try;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;  // no descent direction at double precision

    double val_loss = eval_loss(w, raw, val_rows);
    if (val_loss < best_val - 1e-12) {
      best_val = val_loss;
      best_w = w;
      best_raw = raw;
      best_epoch = epoch;
    }
    if (epoch - best_epoch >= cfg.patience) break;
    grad = ordinal_loss_gradient(w, raw, xs, labels, train_rows);
  }

  OrdinalFit fit;
  fit.model.w = best_w;
  fit.model.theta_raw = best_raw;
  fit.model.embed_dim = static_cast<int>(dim);
  fit.epochs = std::min(epoch, cfg.max_epochs);
  fit.initial_train_loss = initial_loss;
  fit.final_train_loss = eval_loss(best_w, best_raw, train_rows);
  fit.best_val_loss = best_val;
  return fit;
}

// Number of SHD-aligned weights at or above the magnitude threshold.
inline int used_shd_count(const OrdinalModel& model, double threshold = 1e-3) {
  if (!model.fusion)
    throw std::invalid_argument("used_shd_count: not a fusion model");
  if (model.embed_dim + model.shd_dim != static_cast<int>(model.w.size()))
    throw std::invalid_argument("used_shd_count: dimension bookkeeping broken");
  int n = 0;
  for (size_t j = static_cast<size_t>(model.embed_dim); j < model.w.size();
       ++j)
    if (std::abs(model.w[j]) >= threshold) ++n;
  return n;
}

inline nlohmann::json ordinal_model_to_json(const OrdinalModel& m,
                                            const OrdinalTrainConfig& cfg) {
  nlohmann::json j;
  j["w"] = m.w;
  j["theta_raw"] = m.theta_raw;
  j["fusion"] = m.fusion;
  j["embed_dim"] = m.embed_dim;
  j["shd_dim"] = m.shd_dim;
  j["encoder_seed"] = m.encoder_seed;
  j["train_config"] = {{"learning_rate", cfg.learning_rate},
                       {"max_epochs", cfg.max_epochs},
                       {"patience", cfg.patience},
                       {"val_fraction", cfg.val_fraction},
                       {"seed", cfg.seed}};
  return j;
}

inline OrdinalModel ordinal_model_from_json(const nlohmann::json& j) {
  OrdinalModel m;
  try {
    m.w = j.at("w").get<std::vector<double>>();
    m.theta_raw = j.at("theta_raw").get<std::array<double, 3>>();
    m.fusion = j.at("fusion").get<bool>();
    m.embed_dim = j.at("embed_dim").get<int>();
    m.shd_dim = j.at("shd_dim").get<int>();
    m.encoder_seed = j.at("encoder_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("ordinal model json: ") + e.what());
  }
  return m;
}

}  // namespace acu
