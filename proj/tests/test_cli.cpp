#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pipeline.hpp"

#include <trieguide/trie.hpp>
#include <trieguide/util.hpp>
#include <trieguide/vocab.hpp>

#include <json.hpp>

using namespace trieguide;
namespace tt = trieguide::testing;
namespace fs = std::filesystem;

TEST_CASE("full pipeline") {
  const auto dir = tt::scratch_dir("cli_full");
  tt::PipelinePaths p;
  REQUIRE(tt::run_pipeline(dir, "3", p) == "");

  for (const char* f : {"train.jsonl", "validation.jsonl", "test.jsonl", "pool.tsv", "vocab.txt",
                        "ingest_report.tsv"}) {
    CHECK(fs::exists(p.data / f));
  }
  for (const auto& f : {p.trie, p.model, p.predictions, p.survivors, p.eval}) CHECK(fs::file_size(f) > 0);
  CHECK(fs::exists(fs::path(p.model.string() + ".loss.csv")));
  CHECK(fs::exists(fs::path(p.survivors.string() + ".report.tsv")));
  for (const auto& e : fs::recursive_directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");

  const auto eval = tt::slurp(p.eval);
  CHECK(eval.rfind("k\tedit\tshortfall\n1\t", 0) == 0);
  CHECK(eval.find("\navg\t") != std::string::npos);

  // every generated query is a stored query
  std::ifstream trie_in(p.trie);
  const auto entries = read_query_entries(trie_in).entries;
  std::set<std::string> stored;
  for (const auto& e : entries) stored.insert(e.query);
  std::ifstream pred(p.predictions);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(pred, line)) {
    const auto row = nlohmann::json::parse(line);
    CHECK(stored.count(row.at("query").get<std::string>()) == 1);
    CHECK(row.at("token_probs").size() == utf8_decode(row.at("query").get<std::string>()).size());
    ++rows;
  }
  CHECK(rows > 0);

  // the loss trace goes down
  std::ifstream loss(p.model.string() + ".loss.csv");
  std::getline(loss, line);
  CHECK(line == "epoch,loss");
  std::vector<double> trace;
  while (std::getline(loss, line)) trace.push_back(std::stod(line.substr(line.find(',') + 1)));
  REQUIRE(trace.size() == 61);
  CHECK(trace.back() < trace.front());

  SUBCASE("no-filter keeps every candidate") {
    const auto all = dir / "all.jsonl";
    REQUIRE(tt::cli({"filter", "--input", p.predictions.string(), "--output", all.string(), "--no-filter"}).code == 0);
    CHECK(tt::slurp(all) == tt::slurp(p.predictions));
  }
  SUBCASE("alpha override") {
    const auto m = dir / "m0.ckpt";
    REQUIRE(tt::cli({"train", "--input", (p.data / "train.jsonl").string(), "--trie", p.trie.string(), "--output",
                     m.string(), "--config", p.config.string(), "--alpha", "0", "--nttp-variant", "set-mass"})
                .code == 0);
    CHECK(tt::slurp(m) != tt::slurp(p.model));
  }
}

TEST_CASE("usage errors") {
  CHECK(tt::cli({}).code != 0);
  CHECK(tt::cli({"frobnicate"}).code != 0);
  CHECK(tt::cli({"eval", "--input", "x", "--output", "y", "--bogus"}).code != 0);
  CHECK(tt::cli({"generate", "--input", "x", "--output", "y"}).code != 0);  // no checkpoint
  CHECK(tt::cli({"train", "--input", "x", "--output", "y", "--trie", "t", "--nttp-variant", "both"}).code != 0);
  CHECK(tt::cli({"filter", "--input", "x", "--output", "y", "--theta-g", "2"}).code != 0);
  CHECK(tt::cli({"--help"}).code == 0);
}

TEST_CASE("missing and malformed inputs name the file") {
  const auto dir = tt::scratch_dir("cli_errors");
  const auto missing = (dir / "nope.jsonl").string();
  const auto r = tt::cli({"eval", "--input", missing, "--output", (dir / "e.tsv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find(missing) != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "e.tsv"));

  const auto bad = dir / "bad.jsonl";
  tt::spit(bad, "{\"query\": \"a\", \"predictions\": [\"a\"]}\n{\"query\": \"a\", \"predi\n");
  const auto b = tt::cli({"eval", "--input", bad.string(), "--output", (dir / "e.tsv").string()});
  CHECK(b.code == 1);
  CHECK(b.err.find(bad.string()) != std::string::npos);
  CHECK(b.err.find("line 2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "e.tsv"));
  CHECK_FALSE(fs::exists(dir / "e.tsv.tmp"));

  const auto logs = dir / "logs.tsv";
  tt::spit(logs, "caption\tocr_cover\tquery\texposure\tclicks\tsimilarity\ttimestamp\na\tb\tc\t1\n");
  const auto i = tt::cli({"ingest", "--input", logs.string(), "--output", (dir / "out").string()});
  CHECK(i.code == 1);
  CHECK(i.err.find("logs.tsv: line 2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "train.jsonl"));
}

TEST_CASE("exact predictions score zero") {
  const auto dir = tt::scratch_dir("cli_eval");
  const auto in = dir / "exact.jsonl";
  tt::spit(in,
           "{\"query\": \"café\", \"predictions\": [\"café\", \"café\"]}\n"
           "{\"query\": \"nba\", \"predictions\": [\"nba\"]}\n");
  const auto out = dir / "eval.tsv";
  REQUIRE(tt::cli({"eval", "--input", in.string(), "--output", out.string()}).code == 0);
  CHECK(tt::slurp(out) ==
        "k\tedit\tshortfall\n1\t0.0000\t0\n5\t0.0000\t2\n10\t0.0000\t2\n20\t0.0000\t2\navg\t0.0000\t-\n");
}

TEST_CASE("build-trie merges and evicts") {
  const auto dir = tt::scratch_dir("cli_trie");
  const auto pool1 = dir / "p1.tsv", pool2 = dir / "p2.tsv", t1 = dir / "t1.txt", t2 = dir / "t2.txt";
  tt::spit(pool1, "TRIE v1 window=15\nold\t2024-05-01\t1\nkept\t2024-05-10\t2\n");
  tt::spit(pool2, "TRIE v1 window=15\nnew\t2024-05-20\t1\n");
  REQUIRE(tt::cli({"build-trie", "--input", pool1.string(), "--output", t1.string()}).code == 0);
  CHECK(tt::slurp(t1) == "TRIE v1 window=15\nkept\t2024-05-10\t2\nold\t2024-05-01\t1\n");
  REQUIRE(tt::cli({"build-trie", "--input", pool2.string(), "--trie", t1.string(), "--output", t2.string()}).code == 0);
  CHECK(tt::slurp(t2) == "TRIE v1 window=15\nkept\t2024-05-10\t2\nnew\t2024-05-20\t1\n");
  REQUIRE(tt::cli({"build-trie", "--input", pool2.string(), "--trie", t1.string(), "--output", t2.string(),
                   "--window-days", "30"})
              .code == 0);
  CHECK(tt::slurp(t2) == "TRIE v1 window=30\nkept\t2024-05-10\t2\nnew\t2024-05-20\t1\nold\t2024-05-01\t1\n");
}

TEST_CASE("no-trie generation") {
  const auto dir = tt::scratch_dir("cli_notrie");
  tt::PipelinePaths p;
  REQUIRE(tt::run_pipeline(dir, "3", p) == "");
  const auto free = dir / "free.jsonl";
  REQUIRE(tt::cli({"generate", "--checkpoint", p.model.string(), "--input", (p.data / "test.jsonl").string(),
                   "--output", free.string(), "--no-trie", "--config", p.config.string()})
              .code == 0);
  CHECK(fs::file_size(free) > 0);
  // without --no-trie a trie is required
  CHECK(tt::cli({"generate", "--checkpoint", p.model.string(), "--input", (p.data / "test.jsonl").string(),
                 "--output", (dir / "x.jsonl").string()})
            .code != 0);
}
