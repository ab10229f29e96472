#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <trieguide/errors.hpp>
#include <trieguide/util.hpp>
#include <trieguide/vocab.hpp>

#include <random>
#include <sstream>

using namespace trieguide;

TEST_CASE("build assigns ids in codepoint order") {
  const std::vector<std::string> ab{"ab", "ba"};
  const auto v = Vocabulary::build(ab);
  CHECK(v.size() == 2);
  CHECK(v.find(U'a') == 0);
  CHECK(v.find(U'b') == 1);

  const std::vector<std::string> aaa{"aaa"};
  CHECK(Vocabulary::build(aaa).entries() == std::vector<char32_t>{U'a'});

  const std::vector<std::string> abc{"ab", "abc"};
  CHECK(Vocabulary::build(abc).entries() == std::vector<char32_t>{U'a', U'b', U'c'});

  CHECK_THROWS_AS(Vocabulary::build(std::vector<std::string>{}), InvalidArgument);
  CHECK_THROWS_AS(Vocabulary(std::vector<char32_t>{U'a', U'a'}), InvalidArgument);
}

TEST_CASE("tokenize and detokenize") {
  const Vocabulary v({U'a', U'b'});
  CHECK(v.tokenize("aba") == TokenSeq{0, 1, 0});
  CHECK(v.tokenize("").empty());
  try {
    v.tokenize("ax");
    FAIL("expected out-of-vocabulary error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
  CHECK(v.detokenize(TokenSeq{0, 1, 0}) == "aba");
  CHECK(v.detokenize(TokenSeq{}).empty());
  CHECK_THROWS_AS(v.detokenize(TokenSeq{5}), InvalidArgument);
  CHECK(v.eos() == 2);
  CHECK(v.symbol_count() == 3);

  std::size_t dropped = 0;
  CHECK(v.tokenize_lossy("axb", &dropped) == TokenSeq{0, 1});
  CHECK(dropped == 1);
}

TEST_CASE("round trip, length and determinism over random multilingual strings") {
  const std::u32string alphabet = U"ab cé中文\U0001F600\t\n\\";
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 20);
  std::vector<std::string> corpus;
  for (int i = 0; i < 200; ++i) {
    std::u32string s(len(rng), U' ');
    for (auto& c : s) c = alphabet[pick(rng)];
    corpus.push_back(utf8_encode(s));
  }
  const auto v1 = Vocabulary::build(corpus);
  const auto v2 = Vocabulary::build(corpus);
  CHECK(v1 == v2);
  for (const auto& s : corpus) {
    const auto ids = v1.tokenize(s);
    CHECK(ids.size() == utf8_decode(s).size());
    CHECK(v1.detokenize(ids) == s);
  }

  std::stringstream file;
  v1.save(file);
  CHECK(Vocabulary::load(file) == v1);
}

TEST_CASE("vocabulary file errors") {
  std::istringstream two_chars("a\nbc\n");
  CHECK_THROWS_AS(Vocabulary::load(two_chars), ParseError);
  std::istringstream dup("a\na\n");
  CHECK_THROWS_AS(Vocabulary::load(dup), ParseError);
}
