#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "word2hyp/hyponymy.hpp"

using namespace w2h;

namespace {

Embeddings make_embeddings(const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  const std::size_t d = rows.empty() ? 0 : rows[0].second.size();
  Matrix<float> m(rows.size(), d);
  std::vector<std::string> words;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    words.push_back(rows[r].first);
    for (std::size_t c = 0; c < d; ++c) m(r, c) = rows[r].second[c];
  }
  return Embeddings(std::move(words), std::move(m));
}

}  // namespace

TEST(ReadPairs, Examples) {
  std::istringstream pos("cat\tanimal\tTrue\n");
  const auto p = read_pairs(pos);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], (LabeledPair{"cat", "animal", true}));

  std::istringstream neg("animal\tcat\tFalse\n");
  const auto n = read_pairs(neg);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_FALSE(n[0].label);

  std::istringstream bad("cat animal\n");
  try {
    read_pairs(bad, "pairs.tsv");
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("pairs.tsv:1"), std::string::npos);
  }
}

TEST(ReadPairs, CommentsBlankLinesAndNumericLabels) {
  std::istringstream in("# header\n\na\tb\t1\r\nc\td\t0\n");
  const auto p = read_pairs(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_TRUE(p[0].label);
  EXPECT_FALSE(p[1].label);
  std::istringstream bad("a\tb\tyes\n");
  EXPECT_THROW(read_pairs(bad), EvalError);
}

TEST(ReadPairs, WriteReadRoundTrip) {
  const std::vector<LabeledPair> pairs{{"a", "b", true}, {"c", "d", false}};
  std::stringstream ss;
  write_pairs(ss, pairs);
  EXPECT_EQ(read_pairs(ss), pairs);
}

TEST(ScorePair, Examples) {
  EXPECT_NEAR(*score_pair(make_embeddings({{"x", {0}}, {"y", {0}}}), {"x", "y", true}), 0.5 * std::log(0.5), 1e-12);
  const auto perfect = make_embeddings({{"h", {30, 30, 30}}, {"H", {-30, -30, -30}}});
  EXPECT_NEAR(*score_pair(perfect, {"h", "H", true}), 0.0, 1e-9);
  const auto violation = make_embeddings({{"h", {-30}}, {"H", {30}}});
  EXPECT_NEAR(*score_pair(violation, {"h", "H", true}), -30.0, 1e-6);
  EXPECT_FALSE(score_pair(violation, {"h", "missing", true}).has_value());
}

TEST(Metrics, AccuracyExamples) {
  EXPECT_DOUBLE_EQ(accuracy_at_half({true, true, false, false}), 100.0);
  EXPECT_DOUBLE_EQ(accuracy_at_half({false, true, true, false}), 50.0);
  EXPECT_NEAR(accuracy_at_half({true, false, true}), 200.0 / 3, 1e-12);
}

TEST(Metrics, AveragePrecisionExamples) {
  EXPECT_NEAR(average_precision({true, false, true}), 100.0 * (1.0 + 2.0 / 3) / 2, 1e-12);
  EXPECT_DOUBLE_EQ(average_precision({true, true, false, false, false}), 100.0);
  EXPECT_DOUBLE_EQ(average_precision({false, true}), 50.0);
  EXPECT_THROW(average_precision({false, false}), EvalError);
  EXPECT_THROW(accuracy_at_half({}), EvalError);
}

TEST(Metrics, AgreeWithBruteForceOracles) {
  std::mt19937_64 gen(31);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + gen() % 50;
    std::vector<bool> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = gen() % 2;
    labels[gen() % n] = true;
    EXPECT_EQ(accuracy_at_half(labels), oracle::acc50(labels));
    EXPECT_EQ(average_precision(labels), oracle::average_precision(labels));
  }
}

TEST(Ranking, StableDescending) {
  const std::vector<ScoredPair> in{{{"a", "b", true}, -1.0}, {{"c", "d", false}, -0.5}, {{"e", "f", true}, -1.0}};
  const auto r = rank_pairs(in);
  EXPECT_EQ(r[0].pair.hypo, "c");
  EXPECT_EQ(r[1].pair.hypo, "a");
  EXPECT_EQ(r[2].pair.hypo, "e");
}

TEST(EvaluatePairs, SkipsOovAndScoresRest) {
  const auto emb = make_embeddings({{"cat", {2, 2}}, {"animal", {-2, -2}}, {"rock", {1, -3}}});
  const std::vector<LabeledPair> pairs{
      {"cat", "animal", true}, {"animal", "cat", false}, {"cat", "unicorn", true}, {"rock", "animal", false}};
  const EvalReport rep = evaluate_pairs(emb, pairs);
  EXPECT_EQ(rep.skipped_oov, 1u);
  ASSERT_EQ(rep.ranked.size(), 3u);
  EXPECT_EQ(rep.ranked[0].pair.hypo, "cat");
  for (std::size_t i = 1; i < rep.ranked.size(); ++i) EXPECT_GE(rep.ranked[i - 1].score, rep.ranked[i].score);
  EXPECT_DOUBLE_EQ(rep.ap, 100.0);

  const std::vector<LabeledPair> oov{{"x", "y", true}};
  EXPECT_THROW(evaluate_pairs(emb, oov), EvalError);
}

TEST(EvaluatePairs, OrderOfPairFileDoesNotChangeScores) {
  std::mt19937_64 gen(32);
  std::uniform_real_distribution<float> u(-3, 3);
  std::vector<std::pair<std::string, std::vector<float>>> rows;
  for (int i = 0; i < 12; ++i) rows.push_back({"w" + std::to_string(i), {u(gen), u(gen), u(gen)}});
  const auto emb = make_embeddings(rows);
  std::vector<LabeledPair> pairs;
  for (int i = 0; i < 30; ++i) {
    pairs.push_back({"w" + std::to_string(gen() % 12), "w" + std::to_string(gen() % 12), gen() % 2 == 0});
  }
  pairs[0].label = true;
  auto shuffled = pairs;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  const auto a = evaluate_pairs(emb, pairs);
  const auto b = evaluate_pairs(emb, shuffled);
  for (const auto& p : pairs) {
    auto find = [&](const EvalReport& r) {
      for (const auto& s : r.ranked)
        if (s.pair == p) return s.score;
      return std::nan("");
    };
    EXPECT_EQ(find(a), find(b));
  }
}

TEST(Report, ContainsRowsAndSummary) {
  const auto emb = make_embeddings({{"cat", {2}}, {"animal", {-2}}});
  const std::vector<LabeledPair> pairs{{"cat", "animal", true}, {"animal", "cat", false}, {"cat", "dog", false}};
  std::ostringstream out;
  write_report(out, evaluate_pairs(emb, pairs));
  const std::string s = out.str();
  EXPECT_NE(s.find("cat\tanimal\t"), std::string::npos);
  EXPECT_NE(s.find("\tTrue\t1\n"), std::string::npos);
  EXPECT_NE(s.find("# acc50\t100.00"), std::string::npos);
  EXPECT_NE(s.find("# ap\t100.00"), std::string::npos);
  EXPECT_NE(s.find("# skipped_oov\t1"), std::string::npos);
}

TEST(Abstractness, Examples) {
  EXPECT_NEAR(abstractness_score(std::vector<double>{0, 0}), std::log(0.5), 1e-12);
  EXPECT_NEAR(abstractness_score(std::vector<double>(5, -30)), 0.0, 1e-9);
  EXPECT_LT(abstractness_score(std::vector<double>{10}), abstractness_score(std::vector<double>{-10}));
}

TEST(Abstractness, RankingFiltersAndOrders) {
  const auto emb = make_embeddings({{"general", {-1}}, {"specific", {3}}, {"rare", {-9}}, {"tie", {-1}}});
  const Vocabulary counts({{"specific", 900}, {"general", 500}, {"tie", 400}, {"rare", 10}, {"noemb", 1000}});
  const auto ranked = rank_abstractness(emb, counts, 300);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].word, "general");
  EXPECT_EQ(ranked[1].word, "tie");
  EXPECT_EQ(ranked[2].word, "specific");
  EXPECT_TRUE(rank_abstractness(emb, counts, 5000).empty());
  EXPECT_EQ(rank_abstractness(emb, counts, 0).size(), 4u);
}

TEST(Abstractness, HigherScoreRanksFirst) {
  // 0.5 log sigma(-X) = -k  <=>  X = log(e^{2k} - 1)
  const float x1 = static_cast<float>(std::log(std::exp(2.0) - 1));
  const float x2 = static_cast<float>(std::log(std::exp(4.0) - 1));
  const auto emb = make_embeddings({{"b", {x2}}, {"a", {x1}}});
  const Vocabulary counts({{"b", 10}, {"a", 10}});
  const auto ranked = rank_abstractness(emb, counts, 0);
  EXPECT_NEAR(ranked[0].score, -1.0, 1e-5);
  EXPECT_EQ(ranked[0].word, "a");
  EXPECT_NEAR(ranked[1].score, -2.0, 1e-5);
}
