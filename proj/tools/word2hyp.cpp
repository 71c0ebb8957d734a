// word2hyp: train entailment-vector embeddings and evaluate them on
// hyponymy detection.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "word2hyp/word2hyp.hpp"

namespace {

struct TrainArgs {
  std::vector<std::string> corpus;
  std::string out;
  std::string arch = "skipgram";
  std::string mode = "posterior";
  std::string scoring = "entailment";
  std::size_t dim = 200;
  int window = 5;
  int negative = 5;
  double sample = 1e-3;
  std::int64_t min_count = 5;
  int epochs = 5;
  double alpha = 0.0;
  std::uint64_t seed = 1;
  int workers = 1;
  bool binary = false;
  std::size_t table_size = 100'000'000;
  std::int64_t report_every = 100'000;
  std::string checkpoint;
};

struct EvalArgs {
  std::string embeddings;
  std::string pairs;
  std::string report;
};

struct CvArgs {
  std::string embeddings;
  std::string pairs;
  std::string report;
  std::string save_map;
  std::size_t folds = 10;
  int epochs = 500;
  double lr = 1.0;
  double l2 = 0.0;
  std::size_t d_out = 0;
  std::uint64_t seed = 1;
};

struct AbstractArgs {
  std::string embeddings;
  std::string counts;
  std::int64_t min_freq = 300;
  std::size_t top = 10;
};

struct GenArgs {
  int levels = 3;
  int branching = 5;
  std::size_t tokens = 1'000'000;
  std::uint64_t seed = 1;
  std::string out_corpus;
  std::string out_pairs;
  int topics = 10;
  double ancestor_rate = 0.05;
};

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int cmd_train(const TrainArgs& a) {
  w2h::TrainConfig cfg;
  cfg.arch = w2h::parse_architecture(a.arch);
  cfg.mode = w2h::parse_mode(a.mode);
  cfg.scoring = a.scoring == "dot" ? w2h::Scoring::dot : w2h::Scoring::entailment;
  cfg.dim = a.dim;
  cfg.window = a.window;
  cfg.negative = a.negative;
  cfg.sample = a.sample;
  cfg.min_count = a.min_count;
  cfg.epochs = a.epochs;
  if (a.alpha > 0) cfg.alpha0 = a.alpha;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  cfg.table_size = a.table_size;
  cfg.report_every = a.report_every;

  auto [vocab, result] = w2h::train_files(a.corpus, cfg);
  const w2h::Embeddings emb = w2h::extract_embeddings(result.params, vocab);
  if (a.binary) {
    w2h::save_binary(emb, a.out);
  } else {
    w2h::save_text(emb, a.out);
  }
  w2h::save_counts(vocab, a.out + ".counts");
  w2h::Metadata meta{
      {"format", a.binary ? "binary" : "text"},
      {"mode", std::string(w2h::to_string(cfg.mode))},
      {"arch", std::string(w2h::to_string(cfg.arch))},
      {"scoring", a.scoring},
      {"dim", std::to_string(cfg.dim)},
      {"window", std::to_string(cfg.window)},
      {"negative", std::to_string(cfg.negative)},
      {"epochs", std::to_string(cfg.epochs)},
      {"alpha", fmt(cfg.initial_alpha(), "%g")},
      {"min_count", std::to_string(cfg.min_count)},
      {"sample", fmt(cfg.sample, "%g")},
      {"seed", std::to_string(cfg.seed)},
      {"workers", std::to_string(cfg.workers)},
      {"vocab_size", std::to_string(vocab.size())},
      {"corpus_tokens", std::to_string(vocab.total_tokens())},
      {"emitted_role", cfg.mode == w2h::Mode::posterior ? "X_p" : "X_e"},
  };
  w2h::save_meta(meta, w2h::meta_path(a.out));
  if (!a.checkpoint.empty()) w2h::save_checkpoint(result.params, vocab, a.checkpoint);

  const auto& s = result.stats;
  std::cout << "vocab_size\t" << vocab.size() << '\n'
            << "corpus_tokens\t" << vocab.total_tokens() << '\n'
            << "tokens_processed\t" << s.tokens_processed << '\n'
            << "steps\t" << s.steps << '\n'
            << "seconds\t" << fmt(s.seconds, "%.3f") << '\n'
            << "tokens_per_second\t" << fmt(s.tokens_per_second(), "%.0f") << '\n'
            << "first_epoch_loss\t" << fmt(s.epoch_loss.front(), "%.6f") << '\n'
            << "final_epoch_loss\t" << fmt(s.epoch_loss.back(), "%.6f") << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  const w2h::Embeddings emb = w2h::load_embeddings(a.embeddings);
  const auto pairs = w2h::load_pairs(a.pairs);
  const w2h::EvalReport report = w2h::evaluate_pairs(emb, pairs);
  std::ostringstream text;
  w2h::write_report(text, report);
  std::cout << text.str();
  if (!a.report.empty()) {
    std::ofstream out(a.report);
    if (!out) throw std::runtime_error("cannot open report file '" + a.report + "'");
    out << text.str();
  }
  return 0;
}

int cmd_cv(const CvArgs& a) {
  const w2h::Embeddings emb = w2h::load_embeddings(a.embeddings);
  const auto pairs = w2h::load_pairs(a.pairs);
  w2h::MapConfig cfg;
  cfg.epochs = a.epochs;
  cfg.lr = a.lr;
  cfg.l2 = a.l2;
  if (a.d_out > 0) cfg.d_out = a.d_out;
  const w2h::CvReport cv = w2h::evaluate_cv(pairs, emb, a.folds, cfg, a.seed);
  std::ostringstream text;
  w2h::write_cv_report(text, cv);
  std::cout << text.str();
  if (!a.report.empty()) {
    std::ofstream out(a.report);
    if (!out) throw std::runtime_error("cannot open report file '" + a.report + "'");
    out << text.str();
  }
  if (!a.save_map.empty()) {
    const w2h::MapFit fit = w2h::train_map(pairs, emb, cfg);
    w2h::save_map(fit.map, a.save_map);
    std::cerr << "map fitted on all pairs saved to " << a.save_map << '\n';
  }
  return 0;
}

int cmd_abstract(const AbstractArgs& a) {
  const w2h::Embeddings emb = w2h::load_embeddings(a.embeddings);
  const w2h::Vocabulary counts = w2h::load_counts(a.counts);
  const auto ranked = w2h::rank_abstractness(emb, counts, a.min_freq);
  if (ranked.empty()) {
    std::cout << "# no words with frequency > " << a.min_freq << '\n';
    return 0;
  }
  auto emit = [&](const char* label, std::size_t from, std::size_t to) {
    std::cout << "# " << label << '\n';
    for (std::size_t i = from; i < to; ++i) {
      std::cout << i + 1 << '\t' << ranked[i].word << '\t' << fmt(ranked[i].score, "%.6f") << '\t'
                << ranked[i].count << '\n';
    }
  };
  const std::size_t n = std::min(a.top, ranked.size());
  emit("most abstract", 0, n);
  emit("least abstract", ranked.size() - n, ranked.size());
  return 0;
}

int cmd_gen(const GenArgs& a) {
  w2h::TaxonomyConfig cfg;
  cfg.topics_per_node = a.topics;
  cfg.ancestor_rate = a.ancestor_rate;
  const w2h::Taxonomy tax = w2h::generate_taxonomy(a.levels, a.branching, a.seed, cfg);
  std::ofstream corpus(a.out_corpus);
  if (!corpus) throw std::runtime_error("cannot open '" + a.out_corpus + "' for writing");
  const std::size_t written = w2h::generate_corpus(tax, a.tokens, a.seed, corpus, cfg);
  std::ofstream pairs_out(a.out_pairs);
  if (!pairs_out) throw std::runtime_error("cannot open '" + a.out_pairs + "' for writing");
  const auto pairs = w2h::planted_pairs(tax, a.seed);
  w2h::write_pairs(pairs_out, pairs);
  std::cout << "nodes\t" << tax.nodes.size() << '\n'
            << "tokens\t" << written << '\n'
            << "pairs\t" << pairs.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entailment-vector embeddings: training and hyponymy evaluation"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "train embeddings on a whitespace-tokenized corpus");
  tr->add_option("--corpus", train.corpus, "corpus file(s)")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", train.out, "output embedding file")->required();
  tr->add_option("--arch", train.arch)->check(CLI::IsMember({"skipgram", "cbow"}))->capture_default_str();
  tr->add_option("--mode", train.mode, "role of the emitted vectors")
      ->check(CLI::IsMember({"evidence", "posterior"}))
      ->capture_default_str();
  tr->add_option("--scoring", train.scoring, "pair score (dot = Word2Vec baseline)")
      ->check(CLI::IsMember({"entailment", "dot"}))
      ->capture_default_str();
  tr->add_option("--dim", train.dim)->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--window", train.window)->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--negative", train.negative)->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--sample", train.sample)->check(CLI::NonNegativeNumber)->capture_default_str();
  tr->add_option("--min-count", train.min_count)->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--alpha", train.alpha, "initial learning rate (default 0.025 skipgram, 0.05 cbow)")
      ->check(CLI::PositiveNumber);
  tr->add_option("--seed", train.seed)->capture_default_str();
  tr->add_option("--workers", train.workers)->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_flag("--binary", train.binary, "write the binary format");
  tr->add_option("--table-size", train.table_size, "negative-sampling table slots")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tr->add_option("--report-every", train.report_every, "tokens between progress lines, 0 = silent")
      ->capture_default_str();
  tr->add_option("--checkpoint", train.checkpoint, "also write both arrays to this file");

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "unsupervised hyponymy detection");
  ev->add_option("--embeddings", eval.embeddings)->required()->check(CLI::ExistingFile);
  ev->add_option("--pairs", eval.pairs)->required()->check(CLI::ExistingFile);
  ev->add_option("--report", eval.report, "also write the report to this file");

  CvArgs cv;
  auto* cvc = app.add_subcommand("cv", "semi-supervised hyponymy detection with a learned linear map");
  cvc->add_option("--embeddings", cv.embeddings)->required()->check(CLI::ExistingFile);
  cvc->add_option("--pairs", cv.pairs)->required()->check(CLI::ExistingFile);
  cvc->add_option("--folds", cv.folds)->check(CLI::Range(2, 1000))->capture_default_str();
  cvc->add_option("--epochs", cv.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  cvc->add_option("--lr", cv.lr)->check(CLI::PositiveNumber)->capture_default_str();
  cvc->add_option("--l2", cv.l2)->check(CLI::NonNegativeNumber)->capture_default_str();
  cvc->add_option("--d-out", cv.d_out, "mapped dimension (default: input dimension)");
  cvc->add_option("--seed", cv.seed)->capture_default_str();
  cvc->add_option("--report", cv.report, "also write the report to this file");
  cvc->add_option("--save-map", cv.save_map, "fit a map on all pairs and save it");

  AbstractArgs ab;
  auto* abc = app.add_subcommand("abstract", "rank words by abstractness");
  abc->add_option("--embeddings", ab.embeddings)->required()->check(CLI::ExistingFile);
  abc->add_option("--counts", ab.counts, "vocabulary counts written by train")
      ->required()
      ->check(CLI::ExistingFile);
  abc->add_option("--min-freq", ab.min_freq)->check(CLI::NonNegativeNumber)->capture_default_str();
  abc->add_option("--top", ab.top)->check(CLI::PositiveNumber)->capture_default_str();

  GenArgs gen;
  auto* gc = app.add_subcommand("gen", "generate a synthetic taxonomy corpus and pair file");
  gc->add_option("--levels", gen.levels)->check(CLI::Range(2, 12))->capture_default_str();
  gc->add_option("--branching", gen.branching)->check(CLI::Range(2, 1000))->capture_default_str();
  gc->add_option("--tokens", gen.tokens)->check(CLI::PositiveNumber)->capture_default_str();
  gc->add_option("--seed", gen.seed)->capture_default_str();
  gc->add_option("--out-corpus", gen.out_corpus)->required();
  gc->add_option("--out-pairs", gen.out_pairs)->required();
  gc->add_option("--topics", gen.topics, "topic words per node")->check(CLI::PositiveNumber)->capture_default_str();
  gc->add_option("--ancestor-rate", gen.ancestor_rate, "ancestor-word rate per level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*tr) return cmd_train(train);
    if (*ev) return cmd_eval(eval);
    if (*cvc) return cmd_cv(cv);
    if (*abc) return cmd_abstract(ab);
    if (*gc) return cmd_gen(gen);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
