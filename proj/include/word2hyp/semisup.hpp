#pragma once

// Semi-supervised hyponymy detection: a linear map into a space where the
// entailment operator separates hyponym pairs, fitted by full-batch
// gradient descent on a logistic loss, and evaluated with lexically
// disjoint k-fold cross-validation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "entailment.hpp"
#include "hyponymy.hpp"
#include "model.hpp"
#include "random.hpp"

namespace w2h {

struct LinearMap {
  Matrix<double> weights;  // d_out x d_in
  double bias = 0.0;       // calibration used only by the training loss

  std::size_t d_in() const { return weights.cols(); }
  std::size_t d_out() const { return weights.rows(); }

  static LinearMap identity(std::size_t d_in, std::size_t d_out) {
    LinearMap m{Matrix<double>(d_out, d_in), 0.0};
    for (std::size_t i = 0; i < std::min(d_in, d_out); ++i) m.weights(i, i) = 1.0;
    return m;
  }

  template <RealRange R>
  std::vector<double> apply(const R& v) const {
    const auto in = detail::as_span(v);
    detail::check_same_dim(in.size(), d_in(), "LinearMap::apply");
    std::vector<double> out(d_out(), 0.0);
    for (std::size_t r = 0; r < d_out(); ++r) {
      auto w = weights.row(r);
      double acc = 0.0;
      for (std::size_t c = 0; c < in.size(); ++c) acc += w[c] * in[c];
      out[r] = acc;
    }
    return out;
  }

  /// Entailment score of the mapped pair, without the bias.
  template <RealRange RY, RealRange RX>
  double score(const RY& hypo, const RX& hyper) const {
    return entailment_operator<ExactMath>(apply(hypo), apply(hyper));
  }
};

inline void save_map(const LinearMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EvalError("cannot open '" + path + "' for writing");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", map.bias);
  out << map.d_out() << ' ' << map.d_in() << ' ' << buf << '\n';
  for (std::size_t r = 0; r < map.d_out(); ++r) {
    for (std::size_t c = 0; c < map.d_in(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", map.weights(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

inline LinearMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open map file '" + path + "'");
  std::size_t rows = 0, cols = 0;
  LinearMap map;
  if (!(in >> rows >> cols >> map.bias)) throw EvalError(path + ": malformed map header");
  map.weights = Matrix<double>(rows, cols);
  for (auto& w : map.weights.data()) {
    if (!(in >> w)) throw EvalError(path + ": truncated map matrix");
  }
  return map;
}

// --- folds -------------------------------------------------------------------------

struct Fold {
  std::vector<std::size_t> test;
  std::vector<std::size_t> train;
  std::size_t removed = 0;  // training pairs dropped for sharing a word with the test fold
};

struct FoldPlan {
  std::vector<Fold> folds;
};

/// Random partition into k test folds, stratified by label: positives and
/// negatives are shuffled separately and dealt round-robin, so every test
/// list keeps the data's class balance that acc50 presumes. Each fold's
/// training set is every other pair that shares no word with that fold's
/// test pairs.
inline FoldPlan make_folds(std::span<const LabeledPair> pairs, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw EvalError("cross-validation needs at least 2 folds");
  if (pairs.size() < k) {
    throw EvalError("cannot split " + std::to_string(pairs.size()) + " pairs into " + std::to_string(k) +
                    " folds");
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < pairs.size(); ++i) (pairs[i].label ? pos : neg).push_back(i);
  Rng rng(seed);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  };
  shuffle(pos);
  shuffle(neg);

  FoldPlan plan;
  plan.folds.resize(k);
  for (std::size_t i = 0; i < pos.size(); ++i) plan.folds[i % k].test.push_back(pos[i]);
  // Negatives go first to folds left without positives, then in fold order.
  std::vector<std::size_t> order;
  for (std::size_t f = 0; f < k; ++f)
    if (plan.folds[f].test.empty()) order.push_back(f);
  for (std::size_t f = 0; f < k; ++f)
    if (!plan.folds[f].test.empty()) order.push_back(f);
  for (std::size_t i = 0; i < neg.size(); ++i) plan.folds[order[i % k]].test.push_back(neg[i]);
  for (auto& fold : plan.folds) std::sort(fold.test.begin(), fold.test.end());

  for (std::size_t f = 0; f < k; ++f) {
    Fold& fold = plan.folds[f];
    std::unordered_set<std::string> test_words;
    std::vector<bool> in_test(pairs.size(), false);
    for (std::size_t i : fold.test) {
      test_words.insert(pairs[i].hypo);
      test_words.insert(pairs[i].hyper);
      in_test[i] = true;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (in_test[i]) continue;
      if (test_words.contains(pairs[i].hypo) || test_words.contains(pairs[i].hyper)) {
        ++fold.removed;
      } else {
        fold.train.push_back(i);
      }
    }
    if (fold.train.empty()) {
      throw EvalError("fold " + std::to_string(f + 1) + " has an empty training set after removing pairs " +
                      "that share words with its test set");
    }
  }
  return plan;
}

// --- map training ---------------------------------------------------------------------

struct MapConfig {
  std::optional<std::size_t> d_out;  // defaults to the embedding dimension
  int epochs = 500;
  double lr = 1.0;  // initial step; halved on every rejected step
  double l2 = 0.0;  // penalty (l2/2) * ||M - I||_F^2, pulling towards the start
  double tolerance = 1e-6;
};

/// One training example: the two input vectors and the gold label.
struct MapExample {
  std::span<const float> hypo;
  std::span<const float> hyper;
  bool label = false;
};

struct MapGradient {
  double loss = 0.0;
  Matrix<double> d_weights;
  double d_bias = 0.0;
};

/// Mean logistic loss of sigmoid(score + bias) against the labels, plus the
/// L2 penalty on the distance from the identity, with its gradient.
inline MapGradient map_loss_and_grad(const LinearMap& map, std::span<const MapExample> data, double l2) {
  MapGradient g{0.0, Matrix<double>(map.d_out(), map.d_in()), 0.0};
  const double inv_n = 1.0 / static_cast<double>(data.size());
  std::vector<double> d_y(map.d_out()), d_x(map.d_out());
  for (const auto& ex : data) {
    const std::vector<double> y = map.apply(ex.hypo);
    const std::vector<double> x = map.apply(ex.hyper);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double unknown = ExactMath::sigmoid(-y[i]);
      const double log_off = ExactMath::log_sigmoid(-x[i]);
      s += unknown * log_off;
      d_y[i] = -unknown * (1.0 - unknown) * log_off;
      d_x[i] = -unknown * ExactMath::sigmoid(x[i]);
    }
    const double z = s + map.bias;
    g.loss -= inv_n * (ex.label ? ExactMath::log_sigmoid(z) : ExactMath::log_sigmoid(-z));
    const double dz = inv_n * (ExactMath::sigmoid(z) - (ex.label ? 1.0 : 0.0));
    g.d_bias += dz;
    for (std::size_t r = 0; r < map.d_out(); ++r) {
      auto row = g.d_weights.row(r);
      const double a = dz * d_y[r];
      const double b = dz * d_x[r];
      for (std::size_t c = 0; c < map.d_in(); ++c) {
        row[c] += a * ex.hypo[c] + b * ex.hyper[c];
      }
    }
  }
  if (l2 > 0) {
    for (std::size_t r = 0; r < map.d_out(); ++r) {
      for (std::size_t c = 0; c < map.d_in(); ++c) {
        const double off = map.weights(r, c) - (r == c ? 1.0 : 0.0);
        g.loss += 0.5 * l2 * off * off;
        g.d_weights(r, c) += l2 * off;
      }
    }
  }
  return g;
}

struct MapFit {
  LinearMap map;
  std::vector<double> loss_history;  // accepted losses, starting at the initial map
  std::size_t dropped_oov = 0;
};

/// Full-batch descent with backtracking from a given start map. The loss
/// sequence is non-increasing: a step that raises it is halved and retried.
inline MapFit fit_map(LinearMap start, std::span<const MapExample> data, const MapConfig& cfg,
                      bool fit_weights = true) {
  if (data.empty()) throw EvalError("train_map: no training examples");
  MapFit fit{std::move(start), {}, 0};
  MapGradient cur = map_loss_and_grad(fit.map, data, cfg.l2);
  fit.loss_history.push_back(cur.loss);
  double step = cfg.lr;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      LinearMap trial = fit.map;
      if (fit_weights) {
        auto w = trial.weights.data();
        auto dw = cur.d_weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * dw[i];
      }
      trial.bias -= step * cur.d_bias;
      MapGradient next = map_loss_and_grad(trial, data, cfg.l2);
      if (std::isfinite(next.loss) && next.loss <= cur.loss) {
        fit.map = std::move(trial);
        const double change = std::abs(cur.loss - next.loss) / std::max(std::abs(cur.loss), 1e-12);
        cur = std::move(next);
        fit.loss_history.push_back(cur.loss);
        accepted = true;
        step *= 1.25;
        if (change < cfg.tolerance) return fit;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
  }
  return fit;
}

/// Fits a map (identity start, zero bias) on the in-vocabulary pairs.
inline MapFit train_map(std::span<const LabeledPair> train_pairs, const Embeddings& emb, const MapConfig& cfg) {
  std::vector<MapExample> data;
  std::size_t dropped = 0;
  bool any_pos = false, any_neg = false;
  for (const auto& p : train_pairs) {
    auto y = emb.find(p.hypo);
    auto x = emb.find(p.hyper);
    if (!y || !x) {
      ++dropped;
      continue;
    }
    data.push_back({*y, *x, p.label});
    (p.label ? any_pos : any_neg) = true;
  }
  if (!any_pos || !any_neg) {
    throw EvalError("train_map needs both positive and negative training examples");
  }
  MapFit fit = fit_map(LinearMap::identity(emb.dim(), cfg.d_out.value_or(emb.dim())), data, cfg);
  fit.dropped_oov = dropped;
  return fit;
}

// --- cross-validation ----------------------------------------------------------------

struct FoldResult {
  EvalReport report;
  std::size_t train_size = 0;
  std::size_t removed = 0;
  bool fitted = true;  // false: single-class training set, identity map used
  double final_loss = 0.0;
};

struct CvReport {
  std::vector<FoldResult> folds;
  double acc50 = 0.0;  // per-fold acc50, weighted by test-fold size
  double ap = 0.0;     // over the union of positives from all test folds
  std::size_t skipped_oov = 0;
};

/// k-fold lexically disjoint cross-validation of train_map. Test pairs are
/// scored without the bias; a fold without test positives reports AP as
/// NaN but still contributes to acc50. A fold whose filtered training set holds only
/// one class keeps the identity map and is flagged as not fitted.
inline CvReport evaluate_cv(std::span<const LabeledPair> pairs, const Embeddings& emb, std::size_t k,
                            const MapConfig& cfg, std::uint64_t seed) {
  CvReport cv;
  std::vector<LabeledPair> usable;
  for (const auto& p : pairs) {
    if (emb.contains(p.hypo) && emb.contains(p.hyper)) {
      usable.push_back(p);
    } else {
      ++cv.skipped_oov;
    }
  }
  if (usable.empty()) throw EvalError("no scorable pairs");
  const FoldPlan plan = make_folds(usable, k, seed);

  std::vector<double> precisions;
  std::size_t weighted_n = 0;
  for (const Fold& fold : plan.folds) {
    std::vector<LabeledPair> train;
    for (std::size_t i : fold.train) train.push_back(usable[i]);
    std::vector<LabeledPair> test;
    for (std::size_t i : fold.test) test.push_back(usable[i]);

    FoldResult result;
    result.train_size = train.size();
    result.removed = fold.removed;
    const bool has_pos = std::any_of(train.begin(), train.end(), [](const auto& p) { return p.label; });
    const bool has_neg = std::any_of(train.begin(), train.end(), [](const auto& p) { return !p.label; });
    LinearMap map = LinearMap::identity(emb.dim(), cfg.d_out.value_or(emb.dim()));
    if (has_pos && has_neg) {
      MapFit fit = train_map(train, emb, cfg);
      result.final_loss = fit.loss_history.back();
      map = std::move(fit.map);
    } else {
      result.fitted = false;
    }
    std::vector<ScoredPair> scored;
    for (const auto& p : test) scored.push_back({p, map.score(*emb.find(p.hypo), *emb.find(p.hyper))});
    result.report.ranked = rank_pairs(std::move(scored));
    const auto labels = labels_of(result.report.ranked);
    const auto fold_precisions = positive_precisions(labels);
    result.report.acc50 = accuracy_at_half(labels);
    result.report.ap = fold_precisions.empty() ? std::nan("")
                                               : 100.0 * std::accumulate(fold_precisions.begin(),
                                                                         fold_precisions.end(), 0.0) /
                                                     static_cast<double>(fold_precisions.size());
    precisions.insert(precisions.end(), fold_precisions.begin(), fold_precisions.end());
    cv.acc50 += result.report.acc50 * static_cast<double>(labels.size());
    weighted_n += labels.size();
    cv.folds.push_back(std::move(result));
  }
  cv.acc50 /= static_cast<double>(weighted_n);
  if (precisions.empty()) throw EvalError("cross-validation: no positive test examples");
  cv.ap = 100.0 * std::accumulate(precisions.begin(), precisions.end(), 0.0) /
          static_cast<double>(precisions.size());
  return cv;
}

/// Per-fold rows, then the pooled summary.
inline void write_cv_report(std::ostream& out, const CvReport& cv) {
  char buf[128];
  out << "# fold\ttest\ttrain\tremoved\tfitted\tacc50\tap\n";
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    const auto& r = cv.folds[f];
    if (std::isnan(r.report.ap)) {
      std::snprintf(buf, sizeof buf, "%.2f\tNA", r.report.acc50);
    } else {
      std::snprintf(buf, sizeof buf, "%.2f\t%.2f", r.report.acc50, r.report.ap);
    }
    out << f + 1 << '\t' << r.report.ranked.size() << '\t' << r.train_size << '\t' << r.removed << '\t'
        << (r.fitted ? "yes" : "no") << '\t' << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.2f", cv.acc50);
  out << "# pooled_acc50\t" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", cv.ap);
  out << "# pooled_ap\t" << buf << '\n';
  out << "# skipped_oov\t" << cv.skipped_oov << '\n';
  out << "# note\tacc50 thresholded per fold and averaged weighted by fold size; "
         "map objective is a logistic-loss reconstruction\n";
}

}  // namespace w2h
