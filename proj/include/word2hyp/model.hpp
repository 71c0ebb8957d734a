#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "random.hpp"

namespace w2h {

/// Dense row-major matrix; one row per word.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Which role the emitted array plays: posterior vectors X_p or evidence
/// vectors X_e. The other array holds the opposite role.
enum class Mode { evidence, posterior };
enum class Architecture { skipgram, cbow };

inline std::string_view to_string(Mode m) { return m == Mode::evidence ? "evidence" : "posterior"; }
inline std::string_view to_string(Architecture a) {
  return a == Architecture::skipgram ? "skipgram" : "cbow";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "evidence") return Mode::evidence;
  if (s == "posterior") return Mode::posterior;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

inline Architecture parse_architecture(std::string_view s) {
  if (s == "skipgram") return Architecture::skipgram;
  if (s == "cbow") return Architecture::cbow;
  throw std::invalid_argument("unknown architecture '" + std::string(s) + "'");
}

template <class Real = float>
struct ModelParams {
  Matrix<Real> emit;  // rows returned as embeddings
  Matrix<Real> ctx;   // negative-sampled role
  Mode mode = Mode::posterior;
  Architecture arch = Architecture::skipgram;

  std::size_t dim() const { return emit.cols(); }
  std::size_t vocab_size() const { return emit.rows(); }
};

/// emit ~ U(-0.5/d, 0.5/d), ctx = 0.
template <class Real = float>
ModelParams<Real> init_params(std::size_t vocab_size, std::size_t dim, Mode mode, Architecture arch,
                              std::uint64_t seed) {
  ModelParams<Real> p{Matrix<Real>(vocab_size, dim), Matrix<Real>(vocab_size, dim), mode, arch};
  Rng rng(seed, 0);
  const double half = 0.5 / static_cast<double>(dim);
  for (auto& v : p.emit.data()) v = static_cast<Real>(rng.uniform(-half, half));
  return p;
}

/// How a (emit, ctx) pair is scored during training.
enum class Scoring {
  entailment,  // pair score, LUT math
  dot          // classic Word2Vec dot product (baseline)
};

struct TrainConfig {
  Architecture arch = Architecture::skipgram;
  Mode mode = Mode::posterior;
  Scoring scoring = Scoring::entailment;
  std::size_t dim = 200;
  int window = 5;
  int negative = 5;
  int epochs = 5;
  std::optional<double> alpha0;  // default 0.025 skipgram, 0.05 cbow
  std::int64_t min_count = 5;
  double sample = 1e-3;
  double power = 0.75;
  std::size_t table_size = 100'000'000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::int64_t report_every = 100'000;  // tokens between progress lines; 0 = silent

  double initial_alpha() const {
    return alpha0.value_or(arch == Architecture::skipgram ? 0.025 : 0.05);
  }

  void validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (negative < 1) throw std::invalid_argument("negative must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (initial_alpha() <= 0) throw std::invalid_argument("alpha must be > 0");
    if (min_count < 1) throw std::invalid_argument("min-count must be >= 1");
    if (sample < 0) throw std::invalid_argument("sample must be >= 0");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (table_size < 1) throw std::invalid_argument("table size must be >= 1");
  }
};

/// Word vectors aligned with a word list, as read from or written to disk.
class Embeddings {
 public:
  Embeddings() = default;
  Embeddings(std::vector<std::string> words, Matrix<float> vectors)
      : words_(std::move(words)), vectors_(std::move(vectors)) {
    if (words_.size() != vectors_.rows()) {
      throw std::invalid_argument("embeddings: word count does not match matrix rows");
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (!index_.emplace(words_[i], i).second) {
        throw std::invalid_argument("embeddings: duplicate word '" + words_[i] + "'");
      }
    }
  }

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return vectors_.cols(); }
  const std::vector<std::string>& words() const { return words_; }
  const Matrix<float>& vectors() const { return vectors_; }

  std::optional<std::span<const float>> find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return vectors_.row(it->second);
  }

  bool contains(std::string_view word) const { return index_.contains(std::string(word)); }

  friend bool operator==(const Embeddings& a, const Embeddings& b) {
    return a.words_ == b.words_ && a.vectors_ == b.vectors_;
  }

 private:
  std::vector<std::string> words_;
  Matrix<float> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace w2h
