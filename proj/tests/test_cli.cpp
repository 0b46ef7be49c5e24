#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdl/cli.hpp"

using namespace qdl;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(QDL_DATA_DIR) + "/" + name; }

}  // namespace

TEST(Cli, Eval) {
  const auto r = run({"eval", "--query", "thr(4; 5*R(x1), R(x2), R(x3), R(x4), R(x5), -1*R(x6))", "--scenes",
                      data("threshold.scenes")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("row 1: witnessed true\n"), std::string::npos);
  EXPECT_NE(r.out.find("row 2: witnessed true\n"), std::string::npos);
  EXPECT_NE(r.out.find("row 3: residual"), std::string::npos);
}

TEST(Cli, ChainWorkedExample) {
  const auto r = run({"chain", "--kb", data("sculpture.kb"), "--query", "broken(sculpture)"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "1. crushed(sculpture) (hypothesis)\n"
            "2. fragile(sculpture) (hypothesis)\n"
            "3. broken(sculpture) (chaining, 1 & 2, crushed(X) & fragile(X) => broken(X) / X=sculpture)\n");

  const auto fail = run({"chain", "--kb", data("sculpture_hit.kb"), "--query", "broken(sculpture)"});
  EXPECT_EQ(fail.code, 1);
  EXPECT_EQ(fail.out, "Fail\n");

  const auto json = run({"chain", "--kb", data("sculpture.kb"), "--query", "broken(sculpture)", "--format", "json"});
  EXPECT_EQ(json.code, 0);
  EXPECT_NE(json.out.find("\"kind\": \"chaining\""), std::string::npos);
}

TEST(Cli, ChainLearning) {
  const auto r = run({"chain", "--kb", data("sculpture_partial.kb"), "--query", "broken(sculpture)", "--mode",
                      "credulous", "--scenes", data("fragile_seen.scenes")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("fragile(sculpture) (learned)"), std::string::npos);
  const auto sk = run({"chain", "--kb", data("sculpture_partial.kb"), "--query", "broken(sculpture)", "--mode",
                       "skeptical", "--scenes", data("fragile_seen.scenes")});
  EXPECT_EQ(sk.code, 1);
}

TEST(Cli, Resolve) {
  const auto r = run({"resolve", "--cnf", data("single.cnf"), "--scenes", data("single.scenes"), "--space", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "cut x: []\n  hyp: x\n  weaken #1: ~x\nlearned:\n  x\n");
  const auto none = run({"resolve", "--cnf", data("single.cnf"), "--scenes", data("single.scenes"), "--space", "1"});
  EXPECT_EQ(none.code, 1);
  EXPECT_EQ(none.out, "none\n");
  const auto weak = run({"resolve", "--cnf", data("implication.cnf"), "--clause", "~x1 | x2 | x3", "--scenes",
                         data("implication.scenes"), "--space", "1"});
  EXPECT_EQ(weak.code, 0) << weak.err;
  EXPECT_EQ(weak.out.substr(0, 7), "weaken ");
}

TEST(Cli, Conceal) {
  const auto fixed = run({"conceal", "--dist", data("two.dist"), "--mask", data("fixed_b.mask"), "--query", "b"});
  EXPECT_EQ(fixed.code, 0) << fixed.err;
  EXPECT_EQ(fixed.out, "eta 0\n");
  const auto seen = run({"conceal", "--dist", data("two.dist"), "--mask", data("fixed_b.mask"), "--query", "a"});
  EXPECT_EQ(seen.out, "eta 1\n");
  const auto coin = run({"conceal", "--dist", data("two.dist"), "--mask", data("coin_half.mask"), "--query", "a | b"});
  EXPECT_EQ(coin.out, "eta 1/4\n");
}

TEST(Cli, SampleSize) {
  EXPECT_EQ(run({"samplesize", "chain", "--atoms", "8", "--epsilon", "0.2", "--delta", "0.1", "--eta", "0.5"}).out,
            "190\n");
  EXPECT_EQ(
      run({"samplesize", "res", "--atoms", "4", "--space", "2", "--epsilon", "0.25", "--delta", "0.1", "--eta", "0.25"})
          .out,
      "126\n");
  const auto bad = run({"samplesize", "res", "--atoms", "1", "--space", "2"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.err.substr(0, 7), "error: ");
}

TEST(Cli, ExperimentIsDeterministic) {
  const auto a = run({"experiment", data("experiments/res_invalid.json")});
  const auto b = run({"experiment", data("experiments/res_invalid.json")});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto c = run({"experiment", data("experiments/res_invalid.json"), "--seed", "7"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, OutFile) {
  const auto path = std::filesystem::temp_directory_path() / "qdl_cli_out.txt";
  const auto r = run({"chain", "--kb", data("sculpture.kb"), "--query", "broken(sculpture)", "--out", path.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream got;
  got << in.rdbuf();
  EXPECT_EQ(got.str().substr(0, 3), "1. ");
  std::filesystem::remove(path);
}

TEST(Cli, Errors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"chain", "--query", "x"}).code, 2);
  const auto missing = run({"chain", "--kb", data("nope.kb"), "--query", "x"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(missing.err.substr(0, 7), "error: ");
  const auto unknown = run({"chain", "--kb", data("sculpture.kb"), "--query", "flying(sculpture)"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_EQ(run({"resolve", "--cnf", data("single.cnf")}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}
