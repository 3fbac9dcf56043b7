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
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "acu/cohort.hpp"
#include "acu/lexicon.hpp"
#include "acu/util.hpp"

namespace acu {

struct TokenStream {
  std::vector<std::string> tokens;  // lowercase; negation rendered as "not_"
};

// Keeps notes dated in [-180, 0) with 100..5000 words, drops H&P notes
// that mention clinical-trial consent, then retains at most the 3 most
// recent survivors, returned in chronological order. Same-day ties order
// by note_id.
inline std::vector<NoteDocument> select_notes(
    const std::vector<NoteDocument>& notes) {
  static const char* consent_phrase = "clinical trial consent";
  std::vector<NoteDocument> kept;
  for (const auto& n : notes) {
    if (n.offset_day < -180 || n.offset_day >= 0) continue;
    if (n.word_count < 100 || n.word_count > 5000) continue;
    if (n.note_type == NoteType::history_and_physical &&
        contains_ci(n.text, consent_phrase))
      continue;
    kept.push_back(n);
  }
  std::sort(kept.begin(), kept.end(),
            [](const NoteDocument& a, const NoteDocument& b) {
              if (a.offset_day != b.offset_day)
                return a.offset_day < b.offset_day;
              return a.note_id < b.note_id;
            });
  if (kept.size() > 3) kept.erase(kept.begin(), kept.end() - 3);
  return kept;
}

namespace detail {

enum class Boundary : std::uint8_t { none = 0, comma = 1, sentence = 2 };

struct RawToken {
  std::string text;
  Boundary after = Boundary::none;
};

// Characters kept inside tokens: ASCII letters/digits, apostrophe, hyphen;
// any byte >= 0x80 passes through so multibyte UTF-8 stays intact.
// '.', '!', '?', ';', ':' and newline end a sentence; ',' ends a clause.
inline std::vector<RawToken> tokenize(const std::string& text) {
  std::vector<RawToken> out;
  std::string cur;
  auto flush = [&](Boundary b) {
    // trim edge apostrophes/hyphens so "'stable'" and "pain-" normalise
    size_t s = 0, e = cur.size();
    while (s < e && (cur[s] == '\'' || cur[s] == '-')) ++s;
    while (e > s && (cur[e - 1] == '\'' || cur[e - 1] == '-')) --e;
    std::string tok = cur.substr(s, e - s);
    cur.clear();
    bool has_alnum = false;
    for (unsigned char c : tok)
      if (std::isalnum(c) || c >= 0x80) {
        has_alnum = true;
        break;
      }
    if (has_alnum) {
      out.push_back({std::move(tok), b});
    } else if (!out.empty() && b != Boundary::none) {
      out.back().after = std::max(out.back().after, b);
    }
  };
  for (unsigned char c : text) {
    if (std::isalpha(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (std::isdigit(c) || c == '\'' || c == '-') {
      cur += static_cast<char>(c);
    } else if (c >= 0x80) {
      cur += static_cast<char>(c);
    } else if (c == '.' || c == '!' || c == '?' || c == ';' || c == ':' ||
               c == '\n') {
      flush(Boundary::sentence);
    } else if (c == ',') {
      flush(Boundary::comma);
    } else {
      flush(Boundary::none);
    }
  }
  flush(Boundary::none);
  return out;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (!std::isdigit(c)) return false;
  return true;
}

inline bool is_year(std::string_view s) {
  return s.size() == 4 && all_digits(s) &&
         (s.substr(0, 2) == "19" || s.substr(0, 2) == "20");
}

inline bool is_ordinal_number(std::string_view s) {
  if (s.size() < 3) return false;
  auto suffix = s.substr(s.size() - 2);
  if (suffix != "st" && suffix != "nd" && suffix != "rd" && suffix != "th")
    return false;
  return all_digits(s.substr(0, s.size() - 2));
}

inline bool is_clock(std::string_view s) {
  if (s.size() < 3 || s.size() > 4) return false;
  auto suffix = s.substr(s.size() - 2);
  if (suffix != "am" && suffix != "pm") return false;
  return all_digits(s.substr(0, s.size() - 2));
}

inline bool is_dashed_date(std::string_view s) {
  // yyyy-m-d or d-m-yy / d-m-yyyy style
  std::vector<std::string_view> parts;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '-') {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 3) return false;
  for (auto p : parts)
    if (!all_digits(p)) return false;
  bool iso = parts[0].size() == 4 && parts[1].size() <= 2 &&
             parts[2].size() <= 2;
  bool dmy = parts[0].size() <= 2 && parts[1].size() <= 2 &&
             (parts[2].size() == 2 || parts[2].size() == 4);
  return iso || dmy;
}

inline bool is_datetime_token(const std::string& tok, const Lexicons& lex) {
  return lex.datetime_words.count(tok) > 0 || is_year(tok) ||
         is_ordinal_number(tok) || is_clock(tok) || is_dashed_date(tok);
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

inline bool has_vowel(std::string_view s) {
  for (char c : s)
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y')
      return true;
  return false;
}

inline bool is_ascii_consonant(char c) {
  return c >= 'a' && c <= 'z' && c != 'a' && c != 'e' && c != 'i' &&
         c != 'o' && c != 'u';
}

// Undoubles a trailing doubled consonant except ll/ss/zz ("admitt"->"admit",
// "swell" stays).
inline void undouble(std::string& s) {
  size_t n = s.size();
  if (n < 2) return;
  char c = s[n - 1];
  if (s[n - 2] != c || !is_ascii_consonant(c)) return;
  if (c == 'l' || c == 's' || c == 'z') return;
  s.pop_back();
}

}  // namespace detail

// Deterministic suffix-rule lemmatiser with exception lookup. Rules cover
// plural -s/-es/-ies, past -ed/-ied, progressive -ing and comparative
// -er/-est; everything irregular lives in the exception table.
inline std::string lemmatise(const std::string& word,
                             const Lexicons& lex = default_lexicons()) {
  using detail::ends_with;
  auto exc = lex.lemma_exceptions.find(word);
  if (exc != lex.lemma_exceptions.end()) return exc->second;

  std::string w = word;
  if (ends_with(w, "'s"))
    w.resize(w.size() - 2);
  else if (ends_with(w, "'"))
    w.resize(w.size() - 1);
  if (w != word) {
    exc = lex.lemma_exceptions.find(w);
    if (exc != lex.lemma_exceptions.end()) return exc->second;
  }

  if (w.size() >= 5 && ends_with(w, "ies")) {
    w.resize(w.size() - 3);
    w += 'y';
    return w;
  }
  if (w.size() >= 5 && ends_with(w, "ied")) {
    w.resize(w.size() - 3);
    w += 'y';
    return w;
  }
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
    return w;
  }
  if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") ||
      ends_with(w, "zes")) {
    w.resize(w.size() - 2);
    return w;
  }
  if (w.size() >= 4 && ends_with(w, "oes")) {
    w.resize(w.size() - 2);
    return w;
  }
  if (w.size() >= 4 && ends_with(w, "s") && !ends_with(w, "ss") &&
      !ends_with(w, "us") && !ends_with(w, "is") && !ends_with(w, "'s")) {
    w.resize(w.size() - 1);
    return w;
  }
  if (w.size() >= 6 && ends_with(w, "ing")) {
    std::string stem = w.substr(0, w.size() - 3);
    if (detail::has_vowel(stem)) {
      detail::undouble(stem);
      return stem;
    }
    return w;
  }
  if (w.size() >= 5 && ends_with(w, "ed")) {
    std::string stem = w.substr(0, w.size() - 2);
    if (detail::has_vowel(stem)) {
      detail::undouble(stem);
      return stem;
    }
    return w;
  }
  if (w.size() >= 6 && ends_with(w, "est")) {
    std::string stem = w.substr(0, w.size() - 3);
    if (detail::has_vowel(stem)) {
      detail::undouble(stem);
      return stem;
    }
    return w;
  }
  if (w.size() >= 5 && ends_with(w, "er")) {
    // comparative only in the doubled-consonant form (bigger -> big);
    // agent/content nouns (fever, cancer, lower) stay whole
    std::string stem = w.substr(0, w.size() - 2);
    size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] &&
        detail::is_ascii_consonant(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z' && detail::has_vowel(stem)) {
      stem.pop_back();
      return stem;
    }
    return w;
  }
  return w;
}

// Full preprocessing: tokenize + lowercase, mark negation (cue to sentence
// end / comma / scope-breaking conjunction, capped at 6 tokens), remove
// date/time tokens and lexicon entities, remove stop-class words, then
// lemmatise and re-attach the "not_" prefix. Negation runs before removal
// so a cue inside removed material still marks its scope.
inline TokenStream preprocess(const std::string& text,
                              const Lexicons& lex = default_lexicons()) {
  auto raw = detail::tokenize(text);
  const int scope_cap = 6;

  std::vector<bool> negated(raw.size(), false);
  int remaining = 0;
  for (size_t i = 0; i < raw.size(); ++i) {
    const std::string& tok = raw[i].text;
    if (lex.negation_cues.count(tok)) {
      remaining = scope_cap;
    } else if (remaining > 0) {
      if (lex.scope_breakers.count(tok)) {
        remaining = 0;
      } else {
        negated[i] = true;
        --remaining;
      }
    }
    if (raw[i].after != detail::Boundary::none) remaining = 0;
  }

  TokenStream out;
  out.tokens.reserve(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    const std::string& tok = raw[i].text;
    if (detail::is_datetime_token(tok, lex)) continue;
    if (lex.entities.count(tok)) continue;
    if (lex.stop.count(tok)) continue;
    // cue tokens pass through verbatim; they are markers, not content
    std::string lemma =
        lex.negation_cues.count(tok) ? tok : lemmatise(tok, lex);
    if (lemma.empty()) continue;
    out.tokens.push_back(negated[i] ? "not_" + lemma : std::move(lemma));
  }
  return out;
}

struct Vocabulary {
  std::vector<std::string> terms;  // rank order: frequency desc, term asc
  std::vector<std::int64_t> doc_freq;
  std::int64_t n_docs = 0;
  bool truncated = true;  // false when fewer distinct terms than k existed

  const std::unordered_map<std::string, int>& index() const {
    if (index_.size() != terms.size()) {
      index_.clear();
      for (size_t i = 0; i < terms.size(); ++i)
        index_[terms[i]] = static_cast<int>(i);
    }
    return index_;
  }
  double idf(int term_idx) const {
    return std::log((1.0 + static_cast<double>(n_docs)) /
                    (1.0 + static_cast<double>(doc_freq[term_idx]))) +
           1.0;
  }

 private:
  mutable std::unordered_map<std::string, int> index_;
};

// Top-k terms by total corpus frequency, ties lexicographic. Streams must
// come from the training split only.
inline Vocabulary build_vocabulary(const std::vector<TokenStream>& streams,
                                   int k) {
  if (k < 1) throw std::invalid_argument("vocabulary size k must be >= 1");
  std::unordered_map<std::string, std::int64_t> tf;
  std::unordered_map<std::string, std::int64_t> df;
  for (const auto& s : streams) {
    std::set<std::string> seen;
    for (const auto& t : s.tokens) {
      ++tf[t];
      if (seen.insert(t).second) ++df[t];
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(tf.begin(),
                                                           tf.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  v.n_docs = static_cast<std::int64_t>(streams.size());
  v.truncated = static_cast<int>(ranked.size()) > k;
  size_t keep = std::min<size_t>(ranked.size(), static_cast<size_t>(k));
  v.terms.reserve(keep);
  v.doc_freq.reserve(keep);
  for (size_t i = 0; i < keep; ++i) {
    v.terms.push_back(ranked[i].first);
    v.doc_freq.push_back(df[ranked[i].first]);
  }
  return v;
}

// Sparse, index-sorted; weights >= 0; L2 norm 1 unless no in-vocabulary
// token appears (then the zero vector).
struct TfidfVector {
  std::vector<std::pair<int, double>> entries;
};

inline TfidfVector tfidf(const TokenStream& stream, const Vocabulary& vocab) {
  const auto& index = vocab.index();
  std::map<int, std::int64_t> counts;
  for (const auto& t : stream.tokens) {
    auto it = index.find(t);
    if (it != index.end()) ++counts[it->second];
  }
  TfidfVector out;
  out.entries.reserve(counts.size());
  double norm_sq = 0.0;
  for (const auto& [idx, c] : counts) {
    double w = static_cast<double>(c) * vocab.idf(idx);
    out.entries.emplace_back(idx, w);
    norm_sq += w * w;
  }
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [idx, w] : out.entries) w *= inv;
  }
  return out;
}

}  // namespace acu
