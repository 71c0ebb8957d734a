#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "word2hyp/corpus.hpp"

using namespace w2h;

namespace {

Vocabulary vocab_of(std::vector<std::int64_t> counts) {
  std::vector<VocabEntry> entries;
  for (std::size_t i = 0; i < counts.size(); ++i) entries.push_back({"w" + std::to_string(i), counts[i]});
  return Vocabulary(std::move(entries));
}

}  // namespace

TEST(BuildVocab, SmallExamples) {
  std::istringstream in("a a b");
  const Vocabulary v = build_vocab(in, 1);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v.find("a"), 0);
  EXPECT_EQ(v.find("b"), 1);
  EXPECT_EQ(v.count(0), 2);
  EXPECT_EQ(v.count(1), 1);
  EXPECT_EQ(v.total_tokens(), 3);
  EXPECT_EQ(v.find("c"), -1);

  std::istringstream in2("a a b");
  const Vocabulary v2 = build_vocab(in2, 2);
  ASSERT_EQ(v2.size(), 1u);
  EXPECT_EQ(v2.word(0), "a");
  EXPECT_EQ(v2.total_tokens(), 2);
}

TEST(BuildVocab, TiesKeepFirstOccurrence) {
  std::istringstream in("z y x y z x q");
  const Vocabulary v = build_vocab(in, 1);
  EXPECT_EQ(v.word(0), "z");
  EXPECT_EQ(v.word(1), "y");
  EXPECT_EQ(v.word(2), "x");
  EXPECT_EQ(v.word(3), "q");
}

TEST(BuildVocab, CountsMatchDirectTally) {
  std::mt19937_64 gen(3);
  std::vector<std::string> tokens;
  std::map<std::string, std::int64_t> tally;
  for (int i = 0; i < 1000; ++i) {
    std::string w = "t" + std::to_string(gen() % 10);
    ++tally[w];
    tokens.push_back(w);
  }
  const Vocabulary v = build_vocab_from_tokens(tokens, 5);
  EXPECT_EQ(v.size(), 10u);
  EXPECT_EQ(v.total_tokens(), 1000);
  for (const auto& [w, c] : tally) {
    ASSERT_GE(v.find(w), 0);
    EXPECT_EQ(v.count(v.find(w)), c);
  }
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GE(v.count(static_cast<WordId>(i - 1)), v.count(static_cast<WordId>(i)));
}

TEST(BuildVocab, Errors) {
  std::istringstream empty("   \n ");
  EXPECT_THROW(build_vocab(empty, 1), CorpusError);
  std::istringstream rare("a b c");
  EXPECT_THROW(build_vocab(rare, 2), CorpusError);
  std::istringstream any("a");
  EXPECT_THROW(build_vocab(any, 0), CorpusError);
}

TEST(BuildVocab, NewlinesAreOrdinaryBoundaries) {
  std::istringstream in("a\nb\n\na\tb  a");
  const Vocabulary v = build_vocab(in, 1);
  EXPECT_EQ(v.count(v.find("a")), 3);
  EXPECT_EQ(v.count(v.find("b")), 2);
}

TEST(KeepProbability, Examples) {
  const double t = 1e-3;
  const std::int64_t total = 1'000'000;
  EXPECT_EQ(keep_probability(1000, total, t), 1.0);          // f = t
  EXPECT_NEAR(keep_probability(100000, total, t), 0.11, 1e-12);  // f = 100 t
  EXPECT_EQ(keep_probability(250, total, t), 1.0);           // f = t / 4
}

TEST(KeepProbability, DisabledWhenSampleIsZero) {
  const auto p = keep_probabilities(vocab_of({100, 1}), 0.0);
  EXPECT_EQ(p, (std::vector<double>{1.0, 1.0}));
}

TEST(KeepProbability, MonteCarloRetention) {
  const double p = keep_probability(100000, 1'000'000, 1e-3);
  Rng rng(4);
  int kept = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) kept += !(p < rng.uniform());
  EXPECT_NEAR(static_cast<double>(kept) / n, p, 0.005);
}

TEST(NegativeTable, SharesFollowPower) {
  const NegativeTable table(vocab_of({8, 1}), 0.75, 1'000'000);
  const auto slots = table.slots();
  const double share0 = static_cast<double>(std::count(slots.begin(), slots.end(), 0)) / slots.size();
  const double expected = std::pow(8.0, 0.75) / (std::pow(8.0, 0.75) + 1.0);
  EXPECT_NEAR(share0, 0.826, 0.001);
  EXPECT_NEAR(share0, expected, 1.0 / slots.size());
  EXPECT_NEAR(1 - share0, 0.174, 0.001);
}

TEST(NegativeTable, SymmetricCounts) {
  for (double power : {0.0, 0.5, 0.75, 1.0}) {
    const NegativeTable table(vocab_of({1, 1}), power, 1001);
    const auto slots = table.slots();
    const auto zeros = std::count(slots.begin(), slots.end(), 0);
    EXPECT_LE(std::abs(static_cast<double>(zeros) - 500.5), 1.0);
  }
}

TEST(NegativeTable, SingleWord) {
  const NegativeTable table(vocab_of({5}), 0.75, 100);
  EXPECT_EQ(table.size(), 100u);
  for (WordId w : table.slots()) EXPECT_EQ(w, 0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_negative(table, rng), 0);
}

TEST(NegativeTable, SlotsWithinOneOfProportion) {
  const Vocabulary v = vocab_of({1000, 300, 77, 12, 5, 5, 1});
  const NegativeTable table(v, 0.75, 12345);
  double norm = 0;
  for (std::size_t i = 0; i < v.size(); ++i) norm += std::pow(v.count(static_cast<WordId>(i)), 0.75);
  const auto slots = table.slots();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double want = std::pow(v.count(static_cast<WordId>(i)), 0.75) / norm * 12345;
    const auto got = std::count(slots.begin(), slots.end(), static_cast<WordId>(i));
    EXPECT_LE(std::abs(static_cast<double>(got) - want), 1.0) << "word " << i;
  }
}

TEST(NegativeTable, MonteCarloDraws) {
  const NegativeTable table(vocab_of({8, 1}), 0.75, 1'000'000);
  Rng rng(2);
  const int n = 1'000'000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_negative(table, rng) == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.826, 0.01);
}

TEST(NegativeTable, FixedSeedIsReproducible) {
  const NegativeTable table(vocab_of({10, 7, 3, 1}), 0.75, 1000);
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(table.sample(a), table.sample(b));
}

TEST(NegativeTable, Errors) {
  EXPECT_THROW(NegativeTable(Vocabulary{}, 0.75, 10), CorpusError);
  EXPECT_THROW(NegativeTable(vocab_of({1, 1, 1}), 0.75, 2), CorpusError);
}

TEST(Rng, StreamsDiffer) {
  Rng a(1, 0), b(1, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next() == b.next();
  EXPECT_LT(same, 2);
}

TEST(Rng, RangesHold) {
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
  }
}
