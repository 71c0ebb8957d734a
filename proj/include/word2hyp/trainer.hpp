#pragma once

// Word2Hyp training: Word2Vec's Skipgram/CBOW negative-sampling loops with
// the dot product replaced by the entailment pair score.
//
// Step functions are generic over a Scorer, which owns the per-pair forward
// pass, the logistic gain and the backward update. EntailmentScorer is the
// model; DotScorer is the classic Word2Vec dot product and exists as the
// regression and throughput baseline.
//
// Concurrency: train() runs Hogwild workers that update the shared matrices
// without locks. Only single-worker runs are reproducible.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "corpus.hpp"
#include "entailment.hpp"
#include "model.hpp"
#include "random.hpp"

namespace w2h {

/// alpha0 * max(1 - progress, 1e-4).
inline double lr_schedule(double progress, double alpha0) {
  return alpha0 * std::max(1.0 - progress, 1e-4);
}

/// Pair score with role assignment by mode: in posterior mode the emitted
/// row is X_p and the context row X'_e, in evidence mode the reverse.
template <class Math = LutMath>
class EntailmentScorer {
 public:
  using Accum = double;

  EntailmentScorer(Mode mode, std::size_t dim) : mode_(mode), slope_(dim), gate_(dim) {}

  Mode mode() const { return mode_; }

  template <class E, class C>
  double forward(std::span<const E> emit, std::span<const C> ctx) {
    const std::size_t n = emit.size();
    const bool emit_is_posterior = mode_ == Mode::posterior;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xe = emit_is_posterior ? static_cast<double>(ctx[i]) : static_cast<double>(emit[i]);
      const double xp = emit_is_posterior ? static_cast<double>(emit[i]) : static_cast<double>(ctx[i]);
      double sp, gate;
      Math::softplus_sigmoid(xe, sp, gate);
      const double y = sp + xp;
      const double unknown = Math::sigmoid(-y);
      s -= unknown * y;
      slope_[i] = unknown * (y * (1.0 - unknown) - 1.0);
      gate_[i] = gate;
    }
    return s;
  }

  double gain(int label, double score, double lr) const {
    return (label - Math::sigmoid(score)) * lr;
  }

  /// Accumulates the emit-side update into `emit_grad` and applies the
  /// ctx-side update in place, using the partials cached by forward().
  template <class E, class C>
  void backward(std::span<const E> /*emit*/, std::span<C> ctx, double g, std::span<Accum> emit_grad) {
    const std::size_t n = ctx.size();
    if (mode_ == Mode::posterior) {
      for (std::size_t i = 0; i < n; ++i) {
        emit_grad[i] += g * slope_[i];
        ctx[i] = static_cast<C>(ctx[i] + g * slope_[i] * gate_[i]);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        emit_grad[i] += g * slope_[i] * gate_[i];
        ctx[i] = static_cast<C>(ctx[i] + g * slope_[i]);
      }
    }
  }

  static double loss(int label, double score) {
    return label ? -Math::log_sigmoid(score) : -Math::log_sigmoid(-score);
  }

 private:
  Mode mode_;
  std::vector<double> slope_;  // d score / d Y_i
  std::vector<double> gate_;   // sigmoid(X'_e,i) = d Y_i / d X'_e,i
};

/// The sigmoid table of the reference Word2Vec tool, reproduced exactly:
/// single-precision entries, no interpolation, and its integer-division bin
/// width of (1000 / 6 / 2) = 83 bins per unit.
class ClassicExpTable {
 public:
  static constexpr int kSize = 1000;
  static constexpr int kMaxExp = 6;

  static const ClassicExpTable& instance() {
    static const ClassicExpTable table;
    return table;
  }

  float operator[](int i) const { return table_[static_cast<std::size_t>(i)]; }

  /// (label - sigmoid(f)) * alpha with the reference saturation rules.
  float gain(int label, float f, float alpha) const {
    if (f > kMaxExp) return (static_cast<float>(label) - 1) * alpha;
    if (f < -kMaxExp) return (static_cast<float>(label) - 0) * alpha;
    return (static_cast<float>(label) - table_[static_cast<std::size_t>(
                                            static_cast<int>((f + kMaxExp) * (kSize / kMaxExp / 2)))]) *
           alpha;
  }

 private:
  ClassicExpTable() {
    for (int i = 0; i < kSize; ++i) {
      // exp() in double, as the C original does, stored in single precision.
      const float arg = (static_cast<float>(i) / static_cast<float>(kSize) * 2 - 1) * kMaxExp;
      const float e = static_cast<float>(std::exp(static_cast<double>(arg)));
      table_[static_cast<std::size_t>(i)] = e / (e + 1);
    }
  }

  std::array<float, kSize + 1> table_{};
};

/// Classic Word2Vec negative-sampling update in single precision.
class DotScorer {
 public:
  using Accum = float;

  DotScorer(Mode /*mode*/, std::size_t /*dim*/) {}

  template <class E, class C>
  double forward(std::span<const E> emit, std::span<const C> ctx) {
    float f = 0;
    for (std::size_t i = 0; i < emit.size(); ++i) f += static_cast<float>(emit[i]) * static_cast<float>(ctx[i]);
    return f;
  }

  double gain(int label, double score, double lr) const {
    return ClassicExpTable::instance().gain(label, static_cast<float>(score), static_cast<float>(lr));
  }

  template <class E, class C>
  void backward(std::span<const E> emit, std::span<C> ctx, double g, std::span<Accum> emit_grad) {
    const float gf = static_cast<float>(g);
    for (std::size_t i = 0; i < ctx.size(); ++i) emit_grad[i] += gf * static_cast<float>(ctx[i]);
    for (std::size_t i = 0; i < ctx.size(); ++i) ctx[i] = static_cast<C>(ctx[i] + gf * static_cast<float>(emit[i]));
  }

  static double loss(int label, double score) {
    return label ? -ExactMath::log_sigmoid(score) : -ExactMath::log_sigmoid(-score);
  }
};

/// Per-worker scratch buffers for the step functions.
template <class Scorer>
struct StepWorkspace {
  StepWorkspace(Scorer s, std::size_t dim) : scorer(std::move(s)), emit_grad(dim), hidden(dim) {}

  Scorer scorer;
  std::vector<typename Scorer::Accum> emit_grad;
  std::vector<typename Scorer::Accum> hidden;
};

template <class Scorer>
StepWorkspace<Scorer> make_workspace(Mode mode, std::size_t dim) {
  return StepWorkspace<Scorer>(Scorer(mode, dim), dim);
}

/// One skip-gram negative-sampling update: the emit row of `input` is
/// scored against the ctx rows of `output` (label 1) and each negative
/// (label 0). Context rows are updated as they are visited; the emit row
/// is updated once at the end. Returns the step loss.
template <class Scorer, class Real>
double skipgram_step(StepWorkspace<Scorer>& ws, ModelParams<Real>& params, WordId input, WordId output,
                     std::span<const WordId> negatives, double lr) {
  auto emit = params.emit.row(static_cast<std::size_t>(input));
  std::span<const Real> emit_c(emit);
  std::fill(ws.emit_grad.begin(), ws.emit_grad.end(), typename Scorer::Accum{});
  double loss = 0.0;
  auto visit = [&](WordId target, int label) {
    auto ctx = params.ctx.row(static_cast<std::size_t>(target));
    const double s = ws.scorer.forward(emit_c, std::span<const Real>(ctx));
    loss += Scorer::loss(label, s);
    ws.scorer.backward(emit_c, ctx, ws.scorer.gain(label, s, lr), std::span(ws.emit_grad));
  };
  visit(output, 1);
  for (WordId neg : negatives) visit(neg, 0);
  for (std::size_t i = 0; i < emit.size(); ++i) emit[i] = static_cast<Real>(emit[i] + ws.emit_grad[i]);
  return loss;
}

/// One CBOW update: the mean of the context words' emit rows is scored
/// against the ctx rows of `center` and the negatives; the emit-side
/// update is split equally over the context rows. Returns nullopt (and
/// touches nothing) when `contexts` is empty.
template <class Scorer, class Real>
std::optional<double> cbow_step(StepWorkspace<Scorer>& ws, ModelParams<Real>& params,
                                std::span<const WordId> contexts, WordId center,
                                std::span<const WordId> negatives, double lr) {
  if (contexts.empty()) return std::nullopt;
  using Accum = typename Scorer::Accum;
  std::fill(ws.hidden.begin(), ws.hidden.end(), Accum{});
  for (WordId c : contexts) {
    auto row = params.emit.row(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < row.size(); ++i) ws.hidden[i] += static_cast<Accum>(row[i]);
  }
  const Accum inv = Accum{1} / static_cast<Accum>(contexts.size());
  for (auto& h : ws.hidden) h *= inv;

  std::fill(ws.emit_grad.begin(), ws.emit_grad.end(), Accum{});
  std::span<const Accum> hidden(ws.hidden);
  double loss = 0.0;
  auto visit = [&](WordId target, int label) {
    auto ctx = params.ctx.row(static_cast<std::size_t>(target));
    const double s = ws.scorer.forward(hidden, std::span<const Real>(ctx));
    loss += Scorer::loss(label, s);
    ws.scorer.backward(hidden, ctx, ws.scorer.gain(label, s, lr), std::span(ws.emit_grad));
  };
  visit(center, 1);
  for (WordId neg : negatives) visit(neg, 0);
  for (WordId c : contexts) {
    auto row = params.emit.row(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = static_cast<Real>(row[i] + ws.emit_grad[i] * inv);
  }
  return loss;
}

struct TrainStats {
  std::int64_t tokens_processed = 0;  // raw tokens, all epochs
  std::int64_t steps = 0;
  std::int64_t skipped_contexts = 0;   // CBOW positions with no context word
  std::int64_t skipped_negatives = 0;  // negatives dropped after 3 collisions
  std::vector<double> epoch_loss;      // mean step loss per epoch
  double seconds = 0.0;

  double tokens_per_second() const { return seconds > 0 ? tokens_processed / seconds : 0.0; }
};

struct TrainResult {
  ModelParams<float> params;
  TrainStats stats;
};

namespace detail {

struct WorkerTally {
  std::int64_t steps = 0;
  std::int64_t skipped_contexts = 0;
  std::int64_t skipped_negatives = 0;
  std::vector<double> loss_sum;
  std::vector<std::int64_t> loss_steps;
};

template <class Scorer>
void train_worker(int worker, const TrainConfig& cfg, std::span<const WordId> corpus,
                  const NegativeTable& table, std::span<const double> keep, ModelParams<float>& params,
                  std::atomic<std::int64_t>& word_count, WorkerTally& tally,
                  std::chrono::steady_clock::time_point start) {
  constexpr std::size_t kMaxSentence = 1000;
  constexpr std::int64_t kSyncEvery = 10000;
  const std::size_t n = corpus.size();
  const std::size_t begin = n * static_cast<std::size_t>(worker) / static_cast<std::size_t>(cfg.workers);
  const std::size_t end = n * static_cast<std::size_t>(worker + 1) / static_cast<std::size_t>(cfg.workers);
  const double total = static_cast<double>(cfg.epochs) * static_cast<double>(n) + 1.0;
  const double alpha0 = cfg.initial_alpha();
  const bool subsample = cfg.sample > 0;

  Rng rng(cfg.seed, static_cast<std::uint64_t>(worker) + 1);
  auto ws = make_workspace<Scorer>(cfg.mode, cfg.dim);
  std::vector<WordId> sentence;
  std::vector<WordId> negatives;
  std::vector<WordId> contexts;
  sentence.reserve(kMaxSentence);
  negatives.reserve(static_cast<std::size_t>(cfg.negative));
  contexts.reserve(static_cast<std::size_t>(2 * cfg.window));

  tally.loss_sum.assign(static_cast<std::size_t>(cfg.epochs), 0.0);
  tally.loss_steps.assign(static_cast<std::size_t>(cfg.epochs), 0);

  double alpha = alpha0;
  std::int64_t since_sync = 0;
  std::int64_t since_report = 0;
  double running_loss = 0.0;
  std::int64_t running_steps = 0;

  auto draw_negatives = [&](WordId positive) {
    negatives.clear();
    for (int k = 0; k < cfg.negative; ++k) {
      WordId neg = positive;
      for (int attempt = 0; attempt < 3 && neg == positive; ++attempt) neg = table.sample(rng);
      if (neg == positive) {
        ++tally.skipped_negatives;
        continue;
      }
      negatives.push_back(neg);
    }
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::size_t pos = begin;
    while (pos < end) {
      sentence.clear();
      std::int64_t raw = 0;
      while (pos < end && sentence.size() < kMaxSentence) {
        const WordId w = corpus[pos++];
        ++raw;
        if (subsample && keep[static_cast<std::size_t>(w)] < rng.uniform()) continue;
        sentence.push_back(w);
      }
      since_sync += raw;
      since_report += raw;
      if (since_sync >= kSyncEvery || pos >= end) {
        const std::int64_t done = word_count.fetch_add(since_sync) + since_sync;
        since_sync = 0;
        alpha = lr_schedule(std::min(1.0, static_cast<double>(done) / total), alpha0);
        if (worker == 0 && cfg.report_every > 0 && since_report >= cfg.report_every) {
          since_report = 0;
          const double secs =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          std::fprintf(stderr, "alpha %.6f  progress %5.1f%%  tokens/sec %.0f  loss %.4f\n", alpha,
                       100.0 * done / total, secs > 0 ? done / secs : 0.0,
                       running_steps ? running_loss / running_steps : 0.0);
          running_loss = 0.0;
          running_steps = 0;
        }
      }

      const int len = static_cast<int>(sentence.size());
      for (int p = 0; p < len; ++p) {
        const int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.window)));
        const int lo = std::max(0, p - (cfg.window - b));
        const int hi = std::min(len - 1, p + (cfg.window - b));
        const WordId center = sentence[static_cast<std::size_t>(p)];
        double step_loss = 0.0;
        std::int64_t step_count = 0;
        if (cfg.arch == Architecture::skipgram) {
          for (int c = lo; c <= hi; ++c) {
            if (c == p) continue;
            draw_negatives(center);
            step_loss += skipgram_step(ws, params, sentence[static_cast<std::size_t>(c)], center, negatives, alpha);
            ++step_count;
          }
        } else {
          contexts.clear();
          for (int c = lo; c <= hi; ++c) {
            if (c != p) contexts.push_back(sentence[static_cast<std::size_t>(c)]);
          }
          if (contexts.empty()) {
            ++tally.skipped_contexts;
            continue;
          }
          draw_negatives(center);
          step_loss += *cbow_step(ws, params, contexts, center, negatives, alpha);
          ++step_count;
        }
        tally.steps += step_count;
        tally.loss_sum[static_cast<std::size_t>(epoch)] += step_loss;
        tally.loss_steps[static_cast<std::size_t>(epoch)] += step_count;
        running_loss += step_loss;
        running_steps += step_count;
      }
    }
  }
}

}  // namespace detail

/// Trains with an explicit scorer type over an encoded corpus.
template <class Scorer>
TrainResult train_with(const Vocabulary& vocab, std::span<const WordId> corpus, const TrainConfig& cfg) {
  cfg.validate();
  if (vocab.empty()) throw CorpusError("cannot train on an empty vocabulary");
  TrainResult result{init_params<float>(vocab.size(), cfg.dim, cfg.mode, cfg.arch, cfg.seed), {}};
  const NegativeTable table(vocab, cfg.power, std::max(cfg.table_size, vocab.size()));
  const std::vector<double> keep = keep_probabilities(vocab, cfg.sample);

  std::atomic<std::int64_t> word_count{0};
  std::vector<detail::WorkerTally> tallies(static_cast<std::size_t>(cfg.workers));
  const auto start = std::chrono::steady_clock::now();

  if (cfg.workers == 1) {
    detail::train_worker<Scorer>(0, cfg, corpus, table, keep, result.params, word_count, tallies[0], start);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    for (int w = 0; w < cfg.workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          detail::train_worker<Scorer>(w, cfg, corpus, table, keep, result.params, word_count,
                                       tallies[static_cast<std::size_t>(w)], start);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  auto& stats = result.stats;
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  stats.tokens_processed = word_count.load();
  std::vector<double> loss(static_cast<std::size_t>(cfg.epochs), 0.0);
  std::vector<std::int64_t> steps(static_cast<std::size_t>(cfg.epochs), 0);
  for (const auto& t : tallies) {
    stats.steps += t.steps;
    stats.skipped_contexts += t.skipped_contexts;
    stats.skipped_negatives += t.skipped_negatives;
    for (std::size_t e = 0; e < loss.size(); ++e) {
      loss[e] += t.loss_sum[e];
      steps[e] += t.loss_steps[e];
    }
  }
  for (std::size_t e = 0; e < loss.size(); ++e) {
    stats.epoch_loss.push_back(steps[e] ? loss[e] / static_cast<double>(steps[e]) : 0.0);
  }
  return result;
}

inline TrainResult train(const Vocabulary& vocab, std::span<const WordId> corpus, const TrainConfig& cfg) {
  if (cfg.scoring == Scoring::dot) return train_with<DotScorer>(vocab, corpus, cfg);
  return train_with<EntailmentScorer<LutMath>>(vocab, corpus, cfg);
}

/// Builds the vocabulary from the corpus files, then trains.
struct CorpusTrainResult {
  Vocabulary vocab;
  TrainResult result;
};

inline CorpusTrainResult train_files(std::span<const std::string> paths, const TrainConfig& cfg) {
  cfg.validate();
  Vocabulary vocab = build_vocab(paths, cfg.min_count);
  const std::vector<WordId> ids = encode_corpus(paths, vocab);
  TrainResult r = train(vocab, ids, cfg);
  return {std::move(vocab), std::move(r)};
}

/// The emitted rows with the vocabulary's words; their role is params.mode.
template <class Real>
Embeddings extract_embeddings(const ModelParams<Real>& params, const Vocabulary& vocab) {
  Matrix<float> m(params.emit.rows(), params.emit.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) m.data()[i] = static_cast<float>(params.emit.data()[i]);
  std::vector<std::string> words;
  words.reserve(vocab.size());
  for (const auto& e : vocab.entries()) words.push_back(e.word);
  return Embeddings(std::move(words), std::move(m));
}

}  // namespace w2h
