#pragma once
// Independent reference implementations used only by tests.

#include <trieguide/lm.hpp>
#include <trieguide/train.hpp>
#include <trieguide/trie.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace trieguide::testing {

/// Fixed distribution regardless of context.
class ConstantScorer final : public NextTokenScorer {
 public:
  explicit ConstantScorer(Distribution p) : p_(std::move(p)) {}
  static ConstantScorer uniform(std::size_t symbols) {
    return ConstantScorer(Distribution::Constant(static_cast<Eigen::Index>(symbols), 1.0 / static_cast<double>(symbols)));
  }
  std::size_t symbol_count() const override { return static_cast<std::size_t>(p_.size()); }
  Distribution score(std::span<const TokenId>, const PromptContext&) const override { return p_; }

 private:
  Distribution p_;
};

/// Looks up the distribution by exact context; falls back to `fallback`.
class TableScorer final : public NextTokenScorer {
 public:
  TableScorer(std::size_t symbols, Distribution fallback) : symbols_(symbols), fallback_(std::move(fallback)) {}
  void set(TokenSeq context, Distribution p) { table_[std::move(context)] = std::move(p); }
  std::size_t symbol_count() const override { return symbols_; }
  Distribution score(std::span<const TokenId> context, const PromptContext&) const override {
    const auto it = table_.find(TokenSeq(context.begin(), context.end()));
    return it == table_.end() ? fallback_ : it->second;
  }

 private:
  std::size_t symbols_;
  Distribution fallback_;
  std::map<TokenSeq, Distribution> table_;
};

/// Random distributions that depend deterministically on the context (hash-seeded).
class HashScorer final : public NextTokenScorer {
 public:
  HashScorer(std::size_t symbols, std::uint64_t seed, double spread = 3.0)
      : symbols_(symbols), seed_(seed), spread_(spread) {}
  std::size_t symbol_count() const override { return symbols_; }
  Distribution score(std::span<const TokenId> context, const PromptContext& prompt) const override {
    std::uint64_t h = seed_ * 0x9E3779B97F4A7C15ull + 1;
    for (TokenId t : prompt.item_tokens) h = (h ^ static_cast<std::uint64_t>(t + 7)) * 0x100000001B3ull;
    h ^= 0xABCDEFull;
    for (TokenId t : context) h = (h ^ static_cast<std::uint64_t>(t + 1)) * 0x100000001B3ull;
    std::mt19937_64 rng(h);
    std::normal_distribution<double> normal(0.0, spread_);
    vector_t logits(static_cast<Eigen::Index>(symbols_));
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits[i] = normal(rng);
    return softmax(logits);
  }

 private:
  std::size_t symbols_;
  std::uint64_t seed_;
  double spread_;
};

/// Random set of nonempty token sequences over `alphabet` symbols.
inline std::set<TokenSeq> random_queries(std::mt19937_64& rng, std::size_t count, int alphabet, std::size_t max_len) {
  std::uniform_int_distribution<int> tok(0, alphabet - 1);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::set<TokenSeq> out;
  while (out.size() < count) {
    TokenSeq q(len(rng));
    for (auto& t : q) t = tok(rng);
    out.insert(q);
  }
  return out;
}

inline QueryTrie trie_of(const std::set<TokenSeq>& queries, Date seen = Date{std::chrono::days{19000}}) {
  QueryTrie trie;
  for (const auto& q : queries) trie.insert(q, seen);
  return trie;
}

/// Complete paths with the score a decoder should assign: sum of log p(token) then log p(eos),
/// accumulated left to right.
struct ScoredPath {
  TokenSeq tokens;
  double log_prob;
};

inline std::vector<ScoredPath> enumerate_paths(const NextTokenScorer& scorer, const PromptContext& prompt,
                                               const std::set<TokenSeq>& queries) {
  std::vector<ScoredPath> out;
  for (const auto& q : queries) {
    double lp = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      lp += std::log(scorer.score(std::span<const TokenId>(q).first(i), prompt)[q[i]]);
    }
    lp += std::log(scorer.score(q, prompt)[scorer.eos()]);
    out.push_back({q, lp});
  }
  std::sort(out.begin(), out.end(), [](const ScoredPath& a, const ScoredPath& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.tokens < b.tokens;
  });
  return out;
}

/// Plain recursive edit distance (exponential; short strings only).
inline std::size_t edit_distance_recursive(std::u32string_view a, std::u32string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t sub = edit_distance_recursive(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
  const std::size_t del = edit_distance_recursive(a.substr(1), b) + 1;
  const std::size_t ins = edit_distance_recursive(a, b.substr(1)) + 1;
  return std::min({sub, del, ins});
}

/// The same recursion as above with suffix-pair memoization, for exhaustive sweeps.
inline std::size_t edit_distance_memo(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> memo((a.size() + 1) * (b.size() + 1), SIZE_MAX);
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto& slot = memo[i * (b.size() + 1) + j];
    if (slot != SIZE_MAX) return slot;
    slot = std::min({go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1), go(i + 1, j) + 1, go(i, j + 1) + 1});
    return slot;
  };
  return go(0, 0);
}

/// Central finite differences of `loss` over every TinyLm parameter.
inline TinyLmGradient finite_difference(TinyLm m, const std::function<double(const TinyLm&)>& loss,
                                        double eps = 1e-6) {
  TinyLmGradient g = TinyLmGradient::zeros_like(m);
  auto probe = [&](double* param, double* out) {
    const double saved = *param;
    *param = saved + eps;
    const double up = loss(m);
    *param = saved - eps;
    const double down = loss(m);
    *param = saved;
    *out = (up - down) / (2 * eps);
  };
  for (Eigen::Index i = 0; i < m.embedding.size(); ++i) probe(m.embedding.data() + i, g.embedding.data() + i);
  for (Eigen::Index i = 0; i < m.output.size(); ++i) probe(m.output.data() + i, g.output.data() + i);
  for (Eigen::Index i = 0; i < m.bias.size(); ++i) probe(m.bias.data() + i, g.bias.data() + i);
  return g;
}

inline vector_t flatten(const TinyLmGradient& g) {
  vector_t v(g.embedding.size() + g.output.size() + g.bias.size());
  v << Eigen::Map<const vector_t>(g.embedding.data(), g.embedding.size()),
      Eigen::Map<const vector_t>(g.output.data(), g.output.size()), g.bias;
  return v;
}

/// ||a - b|| / max(||a||, ||b||).
inline double relative_error(const TinyLmGradient& a, const TinyLmGradient& b) {
  const vector_t va = flatten(a), vb = flatten(b);
  const double scale = std::max(va.norm(), vb.norm());
  return scale == 0 ? 0.0 : (va - vb).norm() / scale;
}

/// Random examples over `vocab` real tokens with prompts; targets are EOS-terminated.
inline std::vector<TrainingExample> random_examples(std::mt19937_64& rng, std::size_t count, int vocab,
                                                    const std::vector<TokenSeq>& pool) {
  std::uniform_int_distribution<int> tok(0, vocab - 1);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), plen(0, 4);
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < count; ++i) {
    TrainingExample ex;
    ex.prompt.item_tokens.resize(plen(rng));
    for (auto& t : ex.prompt.item_tokens) t = tok(rng);
    ex.target = pool[pick(rng)];
    ex.target.push_back(vocab);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace trieguide::testing
