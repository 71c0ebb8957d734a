#pragma once

// Unsupervised hyponymy detection: rank labelled pairs by the entailment
// operator applied to their embeddings and score the ranking.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "entailment.hpp"
#include "model.hpp"

namespace w2h {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "hypo entails hyper" when label is true.
struct LabeledPair {
  std::string hypo;
  std::string hyper;
  bool label = false;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

/// Parses "hypo<TAB>hyper<TAB>label" lines; label is True/False/1/0.
/// Blank lines and '#' comments are skipped.
inline std::vector<LabeledPair> read_pairs(std::istream& in, const std::string& source = "<stream>") {
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw EvalError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      fields.push_back(line.substr(start, tab - start));
    }
    fields.push_back(line.substr(start));
    if (fields.size() != 3) fail("expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty()) fail("empty word");
    const std::string& l = fields[2];
    bool label;
    if (l == "True" || l == "1") {
      label = true;
    } else if (l == "False" || l == "0") {
      label = false;
    } else {
      fail("label must be True, False, 1 or 0, got '" + l + "'");
    }
    pairs.push_back({fields[0], fields[1], label});
  }
  return pairs;
}

inline std::vector<LabeledPair> load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open pair file '" + path + "'");
  return read_pairs(in, path);
}

inline void write_pairs(std::ostream& out, std::span<const LabeledPair> pairs) {
  for (const auto& p : pairs) out << p.hypo << '\t' << p.hyper << '\t' << (p.label ? "True" : "False") << '\n';
}

/// emb[hypo] (>) emb[hyper]; nullopt when either word is missing.
inline std::optional<double> score_pair(const Embeddings& emb, const LabeledPair& pair) {
  auto y = emb.find(pair.hypo);
  auto x = emb.find(pair.hyper);
  if (!y || !x) return std::nullopt;
  return entailment_operator<ExactMath>(*y, *x);
}

struct ScoredPair {
  LabeledPair pair;
  double score = 0.0;
};

/// Stable descending sort by score.
inline std::vector<ScoredPair> rank_pairs(std::vector<ScoredPair> scored) {
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredPair& a, const ScoredPair& b) { return a.score > b.score; });
  return scored;
}

inline std::vector<bool> labels_of(std::span<const ScoredPair> ranked) {
  std::vector<bool> labels;
  labels.reserve(ranked.size());
  for (const auto& s : ranked) labels.push_back(s.pair.label);
  return labels;
}

/// First floor(N/2) items predicted positive, the rest negative; percent correct.
inline double accuracy_at_half(const std::vector<bool>& ranked_labels) {
  if (ranked_labels.empty()) throw EvalError("accuracy_at_half needs at least one item");
  const std::size_t half = ranked_labels.size() / 2;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ranked_labels.size(); ++i) correct += ranked_labels[i] == (i < half);
  return 100.0 * static_cast<double>(correct) / static_cast<double>(ranked_labels.size());
}

/// Precision at the rank of each positive example, in list order.
inline std::vector<double> positive_precisions(const std::vector<bool>& ranked_labels) {
  std::vector<double> out;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < ranked_labels.size(); ++i) {
    if (!ranked_labels[i]) continue;
    ++positives;
    out.push_back(static_cast<double>(positives) / static_cast<double>(i + 1));
  }
  return out;
}

/// Mean over positives of precision at that positive's rank, in percent.
inline double average_precision(const std::vector<bool>& ranked_labels) {
  const auto p = positive_precisions(ranked_labels);
  if (p.empty()) throw EvalError("average_precision needs at least one positive example");
  return 100.0 * std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

struct EvalReport {
  std::vector<ScoredPair> ranked;
  double acc50 = 0.0;
  double ap = 0.0;
  std::size_t skipped_oov = 0;
};

/// Scores every in-vocabulary pair with `score`, ranks and computes both
/// metrics. Pairs with an out-of-vocabulary word are skipped and counted.
template <class ScoreFn>
EvalReport evaluate_ranking(std::span<const LabeledPair> pairs, ScoreFn&& score) {
  EvalReport report;
  std::vector<ScoredPair> scored;
  for (const auto& p : pairs) {
    if (std::optional<double> s = score(p)) {
      scored.push_back({p, *s});
    } else {
      ++report.skipped_oov;
    }
  }
  if (scored.empty()) throw EvalError("no scorable pairs");
  report.ranked = rank_pairs(std::move(scored));
  const auto labels = labels_of(report.ranked);
  report.acc50 = accuracy_at_half(labels);
  report.ap = average_precision(labels);
  return report;
}

inline EvalReport evaluate_pairs(const Embeddings& emb, std::span<const LabeledPair> pairs) {
  return evaluate_ranking(pairs, [&](const LabeledPair& p) { return score_pair(emb, p); });
}

/// Ranked pairs as "hypo hyper score label rank" TSV rows followed by a
/// '#'-prefixed summary block.
inline void write_report(std::ostream& out, const EvalReport& report) {
  char buf[64];
  out << "# hypo\thyper\tscore\tlabel\trank\n";
  for (std::size_t i = 0; i < report.ranked.size(); ++i) {
    const auto& s = report.ranked[i];
    std::snprintf(buf, sizeof buf, "%.9g", s.score);
    out << s.pair.hypo << '\t' << s.pair.hyper << '\t' << buf << '\t' << (s.pair.label ? "True" : "False")
        << '\t' << i + 1 << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.2f", report.acc50);
  out << "# acc50\t" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", report.ap);
  out << "# ap\t" << buf << '\n';
  out << "# scored\t" << report.ranked.size() << '\n';
  out << "# skipped_oov\t" << report.skipped_oov << '\n';
}

// --- abstractness --------------------------------------------------------------

/// 0 (>) X = sum_i 0.5 log sigmoid(-X_i); higher means fewer known features.
template <RealRange R>
double abstractness_score(const R& x) {
  const std::vector<double> zero(std::ranges::size(x), 0.0);
  return entailment_operator<ExactMath>(zero, x);
}

inline double abstractness_score(const Embeddings& emb, std::string_view word) {
  auto v = emb.find(word);
  if (!v) throw EvalError("word '" + std::string(word) + "' is not in the embeddings");
  return abstractness_score(*v);
}

struct AbstractnessEntry {
  std::string word;
  double score = 0.0;
  std::int64_t count = 0;
};

/// Words with count > min_freq that have an embedding, by descending
/// abstractness; ties alphabetical.
inline std::vector<AbstractnessEntry> rank_abstractness(const Embeddings& emb, const Vocabulary& counts,
                                                        std::int64_t min_freq) {
  std::vector<AbstractnessEntry> out;
  for (const auto& e : counts.entries()) {
    if (e.count <= min_freq) continue;
    auto v = emb.find(e.word);
    if (!v) continue;
    out.push_back({e.word, abstractness_score(*v), e.count});
  }
  std::sort(out.begin(), out.end(), [](const AbstractnessEntry& a, const AbstractnessEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
  return out;
}

}  // namespace w2h
