#pragma once

// Synthetic corpora with a planted hypernym tree.
//
// Every node of a complete tree owns a handful of topic words. A corpus
// block is built around one leaf: the leaf word, its ancestors' words with
// a probability growing with their distance, and topic words drawn from the
// leaf's whole ancestor chain with more weight on general ancestors. An
// ancestor word therefore occurs in the union of its descendants' contexts.

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hyponymy.hpp"
#include "random.hpp"

namespace w2h {

struct TaxonomyNode {
  std::string name;
  int level = 0;
  int parent = -1;
  std::vector<int> children;
  std::vector<std::string> topics;
};

struct Taxonomy {
  int levels = 0;
  int branching = 0;
  std::vector<TaxonomyNode> nodes;  // breadth-first, root at 0
  std::vector<int> leaves;
  std::vector<double> leaf_weight;  // relative sampling rate per leaf

  /// Ancestors of `node`, nearest first.
  std::vector<int> ancestors(int node) const {
    std::vector<int> out;
    for (int p = nodes[static_cast<std::size_t>(node)].parent; p >= 0; p = nodes[static_cast<std::size_t>(p)].parent) {
      out.push_back(p);
    }
    return out;
  }

  std::vector<std::string> node_words() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) out.push_back(n.name);
    return out;
  }
};

struct TaxonomyConfig {
  int topics_per_node = 10;
  double ancestor_rate = 0.05;  // per level of distance from the leaf
  int block_size = 10;          // tokens per emitted block
};

/// Complete tree of the given depth; node words are "n<level>_<i>_<j>..."
/// after their path from the root (root "n0"), topic words "t<level>_<path>w<k>".
inline Taxonomy generate_taxonomy(int levels, int branching, std::uint64_t seed,
                                  const TaxonomyConfig& cfg = {}) {
  if (levels < 2) throw std::invalid_argument("taxonomy needs at least 2 levels");
  if (branching < 2) throw std::invalid_argument("taxonomy needs branching >= 2");
  Taxonomy tax{levels, branching, {}, {}, {}};
  tax.nodes.push_back({"n0", 0, -1, {}, {}});
  std::vector<std::string> paths{""};
  for (std::size_t i = 0; i < tax.nodes.size(); ++i) {
    if (tax.nodes[i].level + 1 >= levels) continue;
    for (int b = 0; b < branching; ++b) {
      const int level = tax.nodes[i].level + 1;
      std::string path = paths[i] + "_" + std::to_string(b);
      tax.nodes[i].children.push_back(static_cast<int>(tax.nodes.size()));
      tax.nodes.push_back({"n" + std::to_string(level) + path, level, static_cast<int>(i), {}, {}});
      paths.push_back(std::move(path));
    }
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < tax.nodes.size(); ++i) {
    auto& n = tax.nodes[i];
    for (int k = 0; k < cfg.topics_per_node; ++k) {
      n.topics.push_back("t" + std::to_string(n.level) + paths[i] + "w" + std::to_string(k));
    }
    if (n.children.empty()) {
      tax.leaves.push_back(static_cast<int>(i));
      tax.leaf_weight.push_back(rng.uniform(0.5, 1.5));
    }
  }
  return tax;
}

/// Writes at least n_tokens tokens, one block per line.
inline std::size_t generate_corpus(const Taxonomy& tax, std::size_t n_tokens, std::uint64_t seed,
                                   std::ostream& out, const TaxonomyConfig& cfg = {}) {
  Rng rng(seed, 1);
  std::vector<double> cumulative;
  double total = 0.0;
  for (double w : tax.leaf_weight) cumulative.push_back(total += w);

  // Topic depth weights: the root gets `levels`, a leaf gets 1.
  std::vector<double> depth_cumulative;
  double depth_total = 0.0;
  for (int d = 0; d < tax.levels; ++d) depth_cumulative.push_back(depth_total += tax.levels - d);

  std::size_t written = 0;
  std::vector<const std::string*> block;
  while (written < n_tokens) {
    const double u = rng.uniform() * total;
    const std::size_t li = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const int leaf = tax.leaves[std::min(li, tax.leaves.size() - 1)];
    std::vector<int> chain = tax.ancestors(leaf);  // nearest first
    block.clear();
    block.push_back(&tax.nodes[static_cast<std::size_t>(leaf)].name);
    for (std::size_t k = 0; k < chain.size(); ++k) {
      if (rng.uniform() < cfg.ancestor_rate * static_cast<double>(k + 1)) {
        block.push_back(&tax.nodes[static_cast<std::size_t>(chain[k])].name);
      }
    }
    std::reverse(chain.begin(), chain.end());  // root first
    chain.push_back(leaf);
    while (block.size() < static_cast<std::size_t>(cfg.block_size)) {
      const double v = rng.uniform() * depth_total;
      const std::size_t d = static_cast<std::size_t>(
          std::upper_bound(depth_cumulative.begin(), depth_cumulative.end(), v) - depth_cumulative.begin());
      const auto& topics = tax.nodes[static_cast<std::size_t>(chain[std::min(d, chain.size() - 1)])].topics;
      if (topics.empty()) break;
      block.push_back(&topics[rng.below(topics.size())]);
    }
    for (std::size_t i = block.size(); i > 1; --i) std::swap(block[i - 1], block[rng.below(i)]);
    for (std::size_t i = 0; i < block.size(); ++i) out << (i ? " " : "") << *block[i];
    out << '\n';
    written += block.size();
  }
  return written;
}

inline std::vector<std::string> generate_corpus_tokens(const Taxonomy& tax, std::size_t n_tokens,
                                                       std::uint64_t seed, const TaxonomyConfig& cfg = {}) {
  std::ostringstream out;
  generate_corpus(tax, n_tokens, seed, out, cfg);
  std::istringstream in(out.str());
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(std::move(t));
  return tokens;
}

/// Positives are every (descendant, ancestor) pair. Negatives match their
/// count, drawn a third each from reversed positives, sibling pairs and
/// unrelated pairs; a short category is topped up from the others.
inline std::vector<LabeledPair> planted_pairs(const Taxonomy& tax, std::uint64_t seed) {
  std::vector<LabeledPair> positives;
  std::set<std::pair<int, int>> related;
  for (std::size_t i = 0; i < tax.nodes.size(); ++i) {
    for (int a : tax.ancestors(static_cast<int>(i))) {
      positives.push_back({tax.nodes[i].name, tax.nodes[static_cast<std::size_t>(a)].name, true});
      related.insert({static_cast<int>(i), a});
      related.insert({a, static_cast<int>(i)});
    }
  }
  std::vector<std::pair<int, int>> reversed, siblings, unrelated;
  for (std::size_t i = 0; i < tax.nodes.size(); ++i) {
    for (int a : tax.ancestors(static_cast<int>(i))) reversed.push_back({a, static_cast<int>(i)});
  }
  const int n = static_cast<int>(tax.nodes.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || related.contains({i, j})) continue;
      const auto& a = tax.nodes[static_cast<std::size_t>(i)];
      const auto& b = tax.nodes[static_cast<std::size_t>(j)];
      if (a.parent >= 0 && a.parent == b.parent) {
        siblings.push_back({i, j});
      } else {
        unrelated.push_back({i, j});
      }
    }
  }

  Rng rng(seed, 2);
  auto shuffle = [&](auto& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  };
  shuffle(reversed);
  shuffle(siblings);
  shuffle(unrelated);

  const std::size_t want = positives.size();
  std::array<std::vector<std::pair<int, int>>*, 3> pools{&reversed, &siblings, &unrelated};
  std::array<std::size_t, 3> quota{want / 3, want / 3, want - 2 * (want / 3)};
  std::array<std::size_t, 3> taken{};
  for (std::size_t c = 0; c < 3; ++c) taken[c] = std::min(quota[c], pools[c]->size());
  std::size_t missing = want - (taken[0] + taken[1] + taken[2]);
  for (std::size_t c = 0; c < 3 && missing > 0; ++c) {
    const std::size_t extra = std::min(missing, pools[c]->size() - taken[c]);
    taken[c] += extra;
    missing -= extra;
  }

  std::vector<LabeledPair> out = positives;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < taken[c]; ++i) {
      const auto [a, b] = (*pools[c])[i];
      out.push_back({tax.nodes[static_cast<std::size_t>(a)].name, tax.nodes[static_cast<std::size_t>(b)].name, false});
    }
  }
  return out;
}

}  // namespace w2h
