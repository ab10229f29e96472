#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <trieguide/train.hpp>

#include <limits>

using namespace trieguide;
namespace tt = trieguide::testing;

namespace {

Date day0() { return Date{std::chrono::days{19000}}; }

}  // namespace

TEST_CASE("render prompt") {
  const auto text = render_prompt("nba finals", "game 7");
  const auto cap = text.find("nba finals"), ocr = text.find("game 7");
  REQUIRE(cap != std::string::npos);
  REQUIRE(ocr != std::string::npos);
  CHECK(cap < ocr);
  CHECK(text.find(kDefaultInstruction) != std::string::npos);
  CHECK(text == "User: " + std::string(kDefaultInstruction) + "\nnba finals, game 7\nAssistant: ");

  const auto only_caption = render_prompt("nba finals", "");
  CHECK(only_caption.find("\nnba finals\nAssistant") != std::string::npos);
  CHECK(render_prompt("", "game 7").find("\ngame 7\n") != std::string::npos);

  CHECK_THROWS_AS(render_prompt("a", "b", "User: <Instruction> <Input Item>"), InvalidArgument);
  CHECK_THROWS_AS(render_prompt("a", "b", "<Input Item> <Output>"), InvalidArgument);
  CHECK_THROWS_AS(render_prompt("a", "b", "<Instruction> <Output>"), InvalidArgument);
}

TEST_CASE("build prompt and example") {
  const std::string tmpl = "<Instruction>|<Input Item>|<Output>";
  const auto vocab = Vocabulary::build(std::vector<std::string>{"abc, |", std::string(kDefaultInstruction)});
  const auto p = build_prompt(vocab, "ab", "c", tmpl);
  CHECK(vocab.detokenize(p.item_tokens) == std::string(kDefaultInstruction) + "|ab, c|");
  CHECK_THROWS_AS(build_prompt(vocab, "abz", "", tmpl), Error);
  const auto lossy = build_prompt(vocab, "abz", "", tmpl, true);
  CHECK(vocab.detokenize(lossy.item_tokens) == std::string(kDefaultInstruction) + "|ab|");

  const auto ex = make_example(vocab, "a", "", "cab", tmpl);
  CHECK(ex.target == TokenSeq{vocab.find(U'c').value(), vocab.find(U'a').value(), vocab.find(U'b').value(), vocab.eos()});
}

TEST_CASE("nttp variant names") {
  CHECK(parse_nttp_variant("per-child") == NttpVariant::per_child_sum);
  CHECK(parse_nttp_variant("set-mass") == NttpVariant::set_mass);
  CHECK(to_string(NttpVariant::set_mass) == "set-mass");
  CHECK_THROWS_AS(parse_nttp_variant("sum"), InvalidArgument);
}

TEST_CASE("closed-form losses") {
  // three tokens plus end-of-sequence
  const auto uniform = tt::ConstantScorer::uniform(4);
  const TrainingExample two{{}, {0, 3}};
  CHECK(ntp_loss(uniform, two) == doctest::Approx(1.386294).epsilon(1e-6));

  // one position with child set {a, b}
  QueryTrie trie;
  trie.insert(TokenSeq{0}, day0());
  trie.insert(TokenSeq{1}, day0());
  const TrainingExample one{{}, {0}};
  CHECK(nttp_loss(uniform, one, trie, {0.1, NttpVariant::per_child_sum}) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(nttp_loss(uniform, one, trie, {0.1, NttpVariant::set_mass}) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(combined_loss(uniform, one, trie, {0.1, NttpVariant::per_child_sum}) ==
        doctest::Approx(1.524923).epsilon(1e-6));
  // unnormalized per-child form sums over both children
  CHECK(nttp_loss(uniform, one, trie, {0.1, NttpVariant::per_child_sum, false}) ==
        doctest::Approx(2 * std::log(4.0)));

  // only the root position is on a trie path; later positions are skipped, not averaged in
  QueryTrie other;
  other.insert(TokenSeq{2, 2}, day0());
  CHECK(nttp_loss(uniform, TrainingExample{{}, {0, 1, 3}}, other, {}) == doctest::Approx(std::log(4.0)));
  CHECK(nttp_loss(uniform, one, QueryTrie{}, {}) == 0.0);

  Distribution onehot = Distribution::Zero(4);
  onehot[0] = 1.0;
  CHECK(ntp_loss(tt::ConstantScorer(onehot), one) == 0.0);
  CHECK(ntp_loss(tt::ConstantScorer(onehot), TrainingExample{{}, {1}}) == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(ntp_loss(uniform, TrainingExample{{}, {}}), InvalidArgument);

  // more mass on the target lowers the loss
  Distribution lo(4), hi(4);
  lo << 0.3, 0.3, 0.2, 0.2;
  hi << 0.6, 0.2, 0.1, 0.1;
  CHECK(ntp_loss(tt::ConstantScorer(hi), one) < ntp_loss(tt::ConstantScorer(lo), one));
}

TEST_CASE("loss properties on random scorers") {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 200; ++round) {
    const auto queries = tt::random_queries(rng, 1 + rng() % 20, 4, 5);
    const auto trie = tt::trie_of(queries);
    const std::vector<TokenSeq> pool(queries.begin(), queries.end());
    const tt::HashScorer scorer(5, rng());
    for (const auto& ex : tt::random_examples(rng, 5, 4, pool)) {
      for (auto variant : {NttpVariant::per_child_sum, NttpVariant::set_mass}) {
        const LossSpec spec{0.1, variant};
        CHECK(nttp_loss(scorer, ex, trie, spec) >= 0.0);
        CHECK(combined_loss(scorer, ex, trie, LossSpec{0.0, variant}) == ntp_loss(scorer, ex));
        CHECK(combined_loss(scorer, ex, trie, spec) ==
              doctest::Approx(ntp_loss(scorer, ex) + 0.1 * nttp_loss(scorer, ex, trie, spec)));
      }
      // set mass never exceeds per-child cost (log of sum >= mean of logs)
      CHECK(nttp_loss(scorer, ex, trie, {0.1, NttpVariant::set_mass}) <=
            nttp_loss(scorer, ex, trie, {0.1, NttpVariant::per_child_sum}) + 1e-12);
    }
  }
}

namespace {

struct Corpus {
  QueryTrie trie;
  std::vector<TrainingExample> examples;
};

Corpus synthetic(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  const auto queries = tt::random_queries(rng, 30, 6, 5);
  Corpus c{tt::trie_of(queries), {}};
  c.examples = tt::random_examples(rng, count, 6, std::vector<TokenSeq>(queries.begin(), queries.end()));
  return c;
}

}  // namespace

TEST_CASE("training lowers the loss and is deterministic") {
  const auto c = synthetic(4, 200);
  const auto init = random_tiny_lm(7, 8, 3, 9);
  const LossSpec spec;
  const TrainConfig cfg{0.1, 16, 20, 5};
  const auto a = train_loop(init, c.examples, c.trie, spec, cfg);
  REQUIRE(a.epoch_loss.size() == 20);
  const TinyLmScorer after(a.model);
  CHECK(combined_loss(after, c.examples, c.trie, spec) < a.initial_loss);
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());

  const auto b = train_loop(init, c.examples, c.trie, spec, cfg);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(a.model.embedding == b.model.embedding);
  CHECK(a.model.output == b.model.output);

  const auto other = train_loop(init, c.examples, c.trie, spec, TrainConfig{0.1, 16, 20, 6});
  CHECK(other.epoch_loss != a.epoch_loss);
}

TEST_CASE("zero learning rate leaves the model unchanged") {
  const auto c = synthetic(8, 40);
  const auto init = random_tiny_lm(7, 4, 2, 1);
  const auto r = train_loop(init, c.examples, c.trie, LossSpec{}, TrainConfig{0.0, 7, 3, 1});
  CHECK(r.model.embedding == init.embedding);
  CHECK(r.model.output == init.output);
  CHECK(r.model.bias == init.bias);
  const TinyLmScorer s(init);
  const double full = combined_loss(s, c.examples, c.trie, LossSpec{});
  CHECK(r.initial_loss == doctest::Approx(full).epsilon(1e-12));
  for (double l : r.epoch_loss) CHECK(l == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("training errors") {
  const auto c = synthetic(8, 40);
  const auto init = random_tiny_lm(7, 4, 2, 1, 3.0);
  try {
    train_loop(init, c.examples, c.trie, LossSpec{}, TrainConfig{1e200, 8, 5, 1});
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.epoch() >= 1);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
  CHECK_THROWS_AS(train_loop(init, std::vector<TrainingExample>{}, c.trie, LossSpec{}, TrainConfig{}), InvalidArgument);
  CHECK_THROWS_AS(train_loop(init, c.examples, c.trie, LossSpec{}, TrainConfig{0.1, 0, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(train_loop(init, c.examples, c.trie, LossSpec{-1.0}, TrainConfig{}), InvalidArgument);
}

TEST_CASE("nttp raises trie-child mass") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto c = synthetic(seed + 30, 200);
    const auto init = random_tiny_lm(7, 8, 3, seed);
    const TrainConfig cfg{0.1, 16, 10, seed};
    const auto with = train_loop(init, c.examples, c.trie, LossSpec{0.1}, cfg);
    const auto without = train_loop(init, c.examples, c.trie, LossSpec{0.0}, cfg);
    const TinyLmScorer a(with.model), b(without.model);
    wins += trie_child_mass(a, c.examples, c.trie) > trie_child_mass(b, c.examples, c.trie);
  }
  CHECK(wins == 3);
}
