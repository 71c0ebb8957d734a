#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "word2hyp/model_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(W2H_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int st = pclose(pipe);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("w2h_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
    const Result g = run("gen --levels 3 --branching 3 --tokens 30000 --seed 3 --out-corpus " + f("c.txt") +
                      " --out-pairs " + f("p.tsv"));
    ASSERT_EQ(g.status, 0) << g.out;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string f(const std::string& name) { return (dir_ / name).string(); }
  static std::string train_args(const std::string& out) {
    return "train --corpus " + f("c.txt") + " --out " + out +
           " --dim 8 --epochs 1 --min-count 1 --table-size 100000 --report-every 0";
  }

  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, MissingCorpusIsAUsageError) {
  const Result r = run("train --out " + f("x.txt"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("--corpus"), std::string::npos) << r.out;
}

TEST_F(Cli, UnknownFlagIsAUsageError) { EXPECT_EQ(run("eval --bogus 1").status, 2); }

TEST_F(Cli, GenPrintsSizes) {
  const Result r = run("gen --levels 2 --branching 2 --tokens 100 --out-corpus " + f("g.txt") + " --out-pairs " +
                    f("g.tsv"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("nodes\t3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("pairs\t4"), std::string::npos) << r.out;
}

TEST_F(Cli, EveryArchitectureAndModeWritesLoadableModels) {
  for (const char* arch : {"skipgram", "cbow"}) {
    for (const char* mode : {"posterior", "evidence"}) {
      const std::string out = f(std::string(arch) + "_" + mode + ".bin");
      const Result r = run(train_args(out) + " --arch " + arch + " --mode " + mode + " --binary");
      ASSERT_EQ(r.status, 0) << r.out;
      const w2h::Embeddings emb = w2h::load_embeddings(out);
      EXPECT_EQ(emb.dim(), 8u);
      EXPECT_GT(emb.size(), 30u);
      EXPECT_TRUE(fs::exists(out + ".meta"));
      EXPECT_TRUE(fs::exists(out + ".counts"));
    }
  }
}

TEST_F(Cli, SingleWorkerTrainingIsReproducible) {
  ASSERT_EQ(run(train_args(f("r1.txt")) + " --workers 1 --seed 7").status, 0);
  ASSERT_EQ(run(train_args(f("r2.txt")) + " --workers 1 --seed 7").status, 0);
  ASSERT_EQ(run(train_args(f("r3.txt")) + " --workers 1 --seed 8").status, 0);
  EXPECT_EQ(slurp(f("r1.txt")), slurp(f("r2.txt")));
  EXPECT_NE(slurp(f("r1.txt")), slurp(f("r3.txt")));
}

TEST_F(Cli, EvalReportFileMatchesStdout) {
  ASSERT_EQ(run(train_args(f("e.txt"))).status, 0);
  const Result r = run("eval --embeddings " + f("e.txt") + " --pairs " + f("p.tsv") + " --report " + f("e.report"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out, slurp(f("e.report")));
  EXPECT_NE(r.out.find("# acc50\t"), std::string::npos);
}

TEST_F(Cli, AllOovPairsFail) {
  ASSERT_EQ(run(train_args(f("o.txt"))).status, 0);
  std::ofstream(f("oov.tsv")) << "nosuch\twords\tTrue\n";
  const Result r = run("eval --embeddings " + f("o.txt") + " --pairs " + f("oov.tsv"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("no scorable pairs"), std::string::npos) << r.out;
}

TEST_F(Cli, CrossValidationRunsAndIsDeterministic) {
  ASSERT_EQ(run(train_args(f("v.txt"))).status, 0);
  const std::string args = "cv --embeddings " + f("v.txt") + " --pairs " + f("p.tsv") + " --folds 10 --epochs 20";
  const Result a = run(args);
  const Result b = run(args);
  ASSERT_EQ(a.status, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("# pooled_acc50\t"), std::string::npos);
  EXPECT_EQ(run(args + " --folds 1").status, 2);
}

TEST_F(Cli, AbstractnessListing) {
  ASSERT_EQ(run(train_args(f("a.txt"))).status, 0);
  const Result none = run("abstract --embeddings " + f("a.txt") + " --counts " + f("a.txt.counts") + " --min-freq 100000000");
  ASSERT_EQ(none.status, 0);
  EXPECT_NE(none.out.find("# no words with frequency > 100000000"), std::string::npos) << none.out;
  const Result all = run("abstract --embeddings " + f("a.txt") + " --counts " + f("a.txt.counts") + " --min-freq 0 --top 3");
  ASSERT_EQ(all.status, 0);
  EXPECT_NE(all.out.find("# most abstract"), std::string::npos);
  EXPECT_NE(all.out.find("# least abstract"), std::string::npos);
}

TEST_F(Cli, MissingInputFileIsReported) {
  std::ofstream(f("bad.txt")) << "2 2\na 1 2\n";
  const Result r = run("eval --embeddings " + f("bad.txt") + " --pairs " + f("p.tsv"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("error:"), std::string::npos) << r.out;
}
