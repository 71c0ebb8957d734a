#pragma once

// From-scratch step losses for the training updates, shared by the unit
// tests and the acceptance run.

#include <random>
#include <vector>

#include "oracles.hpp"
#include "word2hyp/model.hpp"

namespace oracle {

using w2h::Matrix;
using w2h::Mode;
using w2h::ModelParams;
using Vec = std::vector<double>;

template <class Real>
ModelParams<Real> random_params(std::size_t v, std::size_t d, Mode mode, std::mt19937_64& gen, double range = 2.0) {
  std::uniform_real_distribution<double> u(-range, range);
  ModelParams<Real> p{Matrix<Real>(v, d), Matrix<Real>(v, d), mode, w2h::Architecture::skipgram};
  for (auto& x : p.emit.data()) x = static_cast<Real>(u(gen));
  for (auto& x : p.ctx.data()) x = static_cast<Real>(u(gen));
  return p;
}

inline Vec row_of(const Matrix<double>& m, std::size_t r) {
  auto s = m.row(r);
  return Vec(s.begin(), s.end());
}

// Pair score of an emitted vector against a context vector, roles by mode.
inline double role_score(Mode mode, const Vec& emit, const Vec& ctx) {
  return mode == Mode::posterior ? pair_score(ctx, emit) : pair_score(emit, ctx);
}

// Step loss from scratch: emitted side `hidden` against ctx rows.
inline double step_loss(Mode mode, const Vec& hidden, const std::vector<Vec>& ctx_rows) {
  double loss = logistic_loss(true, role_score(mode, hidden, ctx_rows[0]));
  for (std::size_t j = 1; j < ctx_rows.size(); ++j) {
    loss += logistic_loss(false, role_score(mode, hidden, ctx_rows[j]));
  }
  return loss;
}

inline Vec delta(const Matrix<double>& after, const Matrix<double>& before, std::size_t r) {
  Vec d(after.cols());
  for (std::size_t c = 0; c < d.size(); ++c) d[c] = -(after(r, c) - before(r, c));  // lr = 1: -delta = grad
  return d;
}

}  // namespace oracle
