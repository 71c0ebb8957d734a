#pragma once

// Corpus preprocessing: vocabulary, frequent-word subsampling and the
// unigram^power negative-sampling table.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "random.hpp"

namespace w2h {

using WordId = std::int32_t;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Calls fn(std::string_view) for every whitespace-delimited token.
template <class Fn>
void for_each_token(std::istream& in, Fn&& fn) {
  std::string token;
  while (in >> token) fn(std::string_view(token));
}

struct VocabEntry {
  std::string word;
  std::int64_t count = 0;
};

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Entries must already be unique; order defines the ids.
  explicit Vocabulary(std::vector<VocabEntry> entries, std::int64_t min_count = 1)
      : entries_(std::move(entries)), min_count_(min_count) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!index_.emplace(entries_[i].word, static_cast<WordId>(i)).second) {
        throw CorpusError("duplicate vocabulary word '" + entries_[i].word + "'");
      }
      total_tokens_ += entries_[i].count;
    }
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::int64_t total_tokens() const { return total_tokens_; }
  std::int64_t min_count() const { return min_count_; }

  const std::string& word(WordId id) const { return entries_[static_cast<std::size_t>(id)].word; }
  std::int64_t count(WordId id) const { return entries_[static_cast<std::size_t>(id)].count; }
  const std::vector<VocabEntry>& entries() const { return entries_; }

  /// -1 when the word is not in the vocabulary.
  WordId find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? WordId{-1} : it->second;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, WordId> index_;
  std::int64_t total_tokens_ = 0;
  std::int64_t min_count_ = 1;
};

/// Counts tokens, drops words below min_count and orders the rest by
/// descending count (ties by first occurrence).
template <std::ranges::input_range Tokens>
Vocabulary build_vocab_from_tokens(const Tokens& tokens, std::int64_t min_count) {
  if (min_count < 1) throw CorpusError("min_count must be >= 1");
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<VocabEntry> seen;
  for (const auto& t : tokens) {
    std::string w(t);
    auto [it, inserted] = slot.emplace(w, seen.size());
    if (inserted) seen.push_back({std::move(w), 0});
    ++seen[it->second].count;
  }
  if (seen.empty()) throw CorpusError("empty token stream");
  std::vector<VocabEntry> kept;
  for (auto& e : seen) {
    if (e.count >= min_count) kept.push_back(std::move(e));
  }
  if (kept.empty()) {
    throw CorpusError("empty vocabulary: no word occurs at least " + std::to_string(min_count) +
                      " times");
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const VocabEntry& a, const VocabEntry& b) { return a.count > b.count; });
  return Vocabulary(std::move(kept), min_count);
}

inline Vocabulary build_vocab(std::istream& in, std::int64_t min_count) {
  std::vector<std::string> tokens;
  for_each_token(in, [&](std::string_view t) { tokens.emplace_back(t); });
  return build_vocab_from_tokens(tokens, min_count);
}

inline Vocabulary build_vocab(std::span<const std::string> paths, std::int64_t min_count) {
  std::vector<std::string> tokens;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
    for_each_token(in, [&](std::string_view t) { tokens.emplace_back(t); });
  }
  return build_vocab_from_tokens(tokens, min_count);
}

/// Maps the token stream to ids, dropping out-of-vocabulary tokens.
inline std::vector<WordId> encode_corpus(std::span<const std::string> paths, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
    for_each_token(in, [&](std::string_view t) {
      if (WordId id = vocab.find(t); id >= 0) ids.push_back(id);
    });
  }
  return ids;
}

/// Word2Vec subsampling: p = min(1, (sqrt(f/t) + 1) * t/f), f = count/total.
inline double keep_probability(std::int64_t count, std::int64_t total, double t) {
  const double f = static_cast<double>(count) / static_cast<double>(total);
  return std::min(1.0, (std::sqrt(f / t) + 1.0) * t / f);
}

inline std::vector<double> keep_probabilities(const Vocabulary& vocab, double t) {
  std::vector<double> p(vocab.size(), 1.0);
  if (t <= 0) return p;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    p[i] = keep_probability(vocab.count(static_cast<WordId>(i)), vocab.total_tokens(), t);
  }
  return p;
}

class NegativeTable {
 public:
  /// Word i receives round(C_i * size) - round(C_{i-1} * size) slots, where
  /// C is the cumulative share of count^power.
  NegativeTable(const Vocabulary& vocab, double power, std::size_t size) : power_(power) {
    if (vocab.empty()) throw CorpusError("negative table needs a non-empty vocabulary");
    if (size < vocab.size()) throw CorpusError("negative table smaller than vocabulary");
    std::vector<double> weight(vocab.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      weight[i] = std::pow(static_cast<double>(vocab.count(static_cast<WordId>(i))), power);
      norm += weight[i];
    }
    slots_.resize(size);
    double cumulative = 0.0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
      cumulative += weight[i];
      std::size_t end = i + 1 == weight.size()
                            ? size
                            : static_cast<std::size_t>(std::llround(cumulative / norm * size));
      end = std::clamp(end, begin, size);
      std::fill(slots_.begin() + static_cast<std::ptrdiff_t>(begin),
                slots_.begin() + static_cast<std::ptrdiff_t>(end), static_cast<WordId>(i));
      begin = end;
    }
  }

  std::size_t size() const { return slots_.size(); }
  double power() const { return power_; }
  std::span<const WordId> slots() const { return slots_; }

  WordId sample(Rng& rng) const { return slots_[rng.below(slots_.size())]; }

 private:
  std::vector<WordId> slots_;
  double power_;
};

inline WordId sample_negative(const NegativeTable& table, Rng& rng) { return table.sample(rng); }

}  // namespace w2h
