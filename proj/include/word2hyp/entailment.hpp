#pragma once

// Entailment-vector arithmetic over log-odds vectors.
//
// A log-odds vector X parameterises independent binary features with
// P(x_i = 1) = sigmoid(X_i). The entailment operator
//
//     Y (>) X  =  sum_i sigmoid(-Y_i) * log sigmoid(-X_i)
//
// approximates log P(y => x). Every function is templated on a math policy:
// ExactMath evaluates the transcendentals with libm, LutMath with the
// interpolated lookup tables below. Sums are always accumulated in double.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace w2h {

template <class R>
concept RealRange = std::ranges::contiguous_range<R> && std::ranges::sized_range<R> &&
                    std::is_floating_point_v<std::remove_cv_t<std::ranges::range_value_t<R>>>;

namespace detail {

inline void check_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

template <RealRange R>
auto as_span(const R& r) {
  return std::span<const std::remove_cv_t<std::ranges::range_value_t<R>>>(std::ranges::data(r),
                                                                          std::ranges::size(r));
}

}  // namespace detail

struct ExactMath {
  static double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }
  static double log_sigmoid(double x) {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
  }
  static double softplus(double x) { return -log_sigmoid(-x); }
  /// softplus(x) and sigmoid(x) together.
  static void softplus_sigmoid(double x, double& sp, double& sig) {
    sp = softplus(x);
    sig = sigmoid(x);
  }
};

/// Piecewise-linear tables for sigmoid and softplus = -log sigmoid(-x) on
/// [-kMaxExp, kMaxExp], sharing one grid. Outside the range sigmoid
/// saturates to 0/1, softplus to 0/x, and so log-sigmoid to x/0.
class SigmoidTables {
 public:
  static constexpr double kMaxExp = 6.0;
  static constexpr int kSize = 1000;

  static const SigmoidTables& instance() {
    static const SigmoidTables tables;
    return tables;
  }

  double sigmoid(double x) const {
    const Knot& k = knot(x);
    const double v = k.sig + k.frac * k.sig_slope;
    return x > kMaxExp ? 1.0 : (x < -kMaxExp ? 0.0 : v);
  }

  double softplus(double x) const {
    const Knot& k = knot(x);
    const double v = k.sp + k.frac * k.sp_slope;
    return x > kMaxExp ? x : (x < -kMaxExp ? 0.0 : v);
  }

  double log_sigmoid(double x) const { return -softplus(-x); }

  void softplus_sigmoid(double x, double& sp, double& sig) const {
    const Knot& k = knot(x);
    const double v_sp = k.sp + k.frac * k.sp_slope;
    const double v_sig = k.sig + k.frac * k.sig_slope;
    sp = x > kMaxExp ? x : (x < -kMaxExp ? 0.0 : v_sp);
    sig = x > kMaxExp ? 1.0 : (x < -kMaxExp ? 0.0 : v_sig);
  }

 private:
  static constexpr double kScale = kSize / (2 * kMaxExp);

  struct Entry {
    double sig, sig_slope, sp, sp_slope;
  };
  struct Knot {
    double sig, sig_slope, sp, sp_slope, frac;
  };

  SigmoidTables() {
    for (int i = 0; i <= kSize; ++i) {
      const double x = -kMaxExp + i / kScale;
      table_[i].sig = ExactMath::sigmoid(x);
      table_[i].sp = ExactMath::softplus(x);
    }
    for (int i = 0; i < kSize; ++i) {
      table_[i].sig_slope = table_[i + 1].sig - table_[i].sig;
      table_[i].sp_slope = table_[i + 1].sp - table_[i].sp;
    }
  }

  Knot knot(double x) const {
    const double pos = std::clamp((x + kMaxExp) * kScale, 0.0, static_cast<double>(kSize));
    const int i = static_cast<int>(pos);
    const Entry& e = table_[i];
    return {e.sig, e.sig_slope, e.sp, e.sp_slope, pos - i};
  }

  std::array<Entry, kSize + 1> table_{};
};

struct LutMath {
  static double sigmoid(double x) { return SigmoidTables::instance().sigmoid(x); }
  static double log_sigmoid(double x) { return SigmoidTables::instance().log_sigmoid(x); }
  static double softplus(double x) { return SigmoidTables::instance().softplus(x); }
  static void softplus_sigmoid(double x, double& sp, double& sig) {
    SigmoidTables::instance().softplus_sigmoid(x, sp, sig);
  }
};

inline double fast_sigmoid(double x) { return LutMath::sigmoid(x); }
inline double fast_log_sigmoid(double x) { return LutMath::log_sigmoid(x); }

/// -log sigmoid(-x), the non-negative transform used both in latent
/// inference and inside the entailment operator.
template <class Math = ExactMath>
double softplus(double x) {
  return Math::softplus(x);
}

template <class Math = ExactMath, RealRange R>
std::vector<double> softplus_transform(const R& x) {
  std::vector<double> out;
  out.reserve(std::ranges::size(x));
  for (double v : detail::as_span(x)) out.push_back(softplus<Math>(v));
  return out;
}

template <class Math = ExactMath, RealRange RY, RealRange RX>
double entailment_operator(const RY& y, const RX& x) {
  const auto ys = detail::as_span(y);
  const auto xs = detail::as_span(x);
  detail::check_same_dim(ys.size(), xs.size(), "entailment_operator");
  double sum = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    sum += Math::sigmoid(-static_cast<double>(ys[i])) * Math::log_sigmoid(-static_cast<double>(xs[i]));
  }
  return sum;
}

/// Latent phrase vector Y = softplus(Xe') + Xp.
template <class Math = ExactMath, RealRange RE, RealRange RP>
std::vector<double> infer_latent(const RE& evidence, const RP& posterior) {
  const auto es = detail::as_span(evidence);
  const auto ps = detail::as_span(posterior);
  detail::check_same_dim(es.size(), ps.size(), "infer_latent");
  std::vector<double> y(es.size());
  for (std::size_t i = 0; i < es.size(); ++i) y[i] = softplus<Math>(es[i]) + ps[i];
  return y;
}

struct ScoreBreakdown {
  double total = 0.0;
  double entail_term = 0.0;  // Y (>) Xe'
  double prior_term = 0.0;   // -sigmoid(-Y) . Xp
  std::vector<double> latent;
};

/// Score of a (evidence, posterior) pair, evaluated term by term:
/// Y (>) Xe' + (-sigmoid(-Y)) . Xp with Y from infer_latent.
template <class Math = ExactMath, RealRange RE, RealRange RP>
ScoreBreakdown pair_score(const RE& evidence, const RP& posterior) {
  const auto es = detail::as_span(evidence);
  const auto ps = detail::as_span(posterior);
  detail::check_same_dim(es.size(), ps.size(), "pair_score");
  ScoreBreakdown out;
  out.latent = infer_latent<Math>(es, ps);
  for (std::size_t i = 0; i < es.size(); ++i) {
    const double unknown = Math::sigmoid(-out.latent[i]);
    out.entail_term += unknown * Math::log_sigmoid(-static_cast<double>(es[i]));
    out.prior_term -= unknown * ps[i];
  }
  out.total = out.entail_term + out.prior_term;
  return out;
}

/// Same total as pair_score, via the collapsed form -sum sigmoid(-Y_i) Y_i.
template <class Math = ExactMath, RealRange RE, RealRange RP>
double pair_score_total(const RE& evidence, const RP& posterior) {
  const auto es = detail::as_span(evidence);
  const auto ps = detail::as_span(posterior);
  detail::check_same_dim(es.size(), ps.size(), "pair_score_total");
  double sum = 0.0;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const double y = softplus<Math>(es[i]) + ps[i];
    sum -= Math::sigmoid(-y) * y;
  }
  return sum;
}

/// Per-component partial of the pair score with respect to Y.
/// d/dY [-sigmoid(-Y) Y] = sigmoid(-Y) (Y sigmoid(Y) - 1).
template <class Math = ExactMath>
double score_slope(double y) {
  const double unknown = Math::sigmoid(-y);
  return unknown * (y * (1.0 - unknown) - 1.0);
}

/// Returns (d total / d Xe', d total / d Xp).
template <class Math = ExactMath, RealRange RE, RealRange RP>
std::pair<std::vector<double>, std::vector<double>> pair_score_grad(const RE& evidence,
                                                                    const RP& posterior) {
  const auto es = detail::as_span(evidence);
  const auto ps = detail::as_span(posterior);
  detail::check_same_dim(es.size(), ps.size(), "pair_score_grad");
  std::vector<double> d_evidence(es.size());
  std::vector<double> d_posterior(es.size());
  for (std::size_t i = 0; i < es.size(); ++i) {
    const double y = softplus<Math>(es[i]) + ps[i];
    const double slope = score_slope<Math>(y);
    d_posterior[i] = slope;
    d_evidence[i] = slope * Math::sigmoid(es[i]);
  }
  return {std::move(d_evidence), std::move(d_posterior)};
}

}  // namespace w2h
