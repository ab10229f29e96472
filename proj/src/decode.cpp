#include <trieguide/decode.hpp>
#include <trieguide/errors.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

namespace trieguide {

namespace {

struct BeamState {
  TokenSeq prefix;
  scalar_t log_prob = 0;
  std::vector<scalar_t> token_probs;
  QueryTrie::NodeId node = QueryTrie::kRoot;
  bool finished = false;
  scalar_t eos_prob = 1.0;
};

struct Candidate {
  TokenId token;
  scalar_t prob;
};

/// End-of-sequence first (when allowed), then children ascending.
std::vector<Candidate> trie_candidates(const QueryTrie& trie, QueryTrie::NodeId node, const Distribution& p,
                                       TokenId eos, bool renormalize) {
  std::vector<Candidate> out;
  if (trie.is_terminal(node)) out.push_back({eos, p[eos]});
  for (const auto& [token, _] : trie.child_map(node)) {
    if (token >= eos) throw InvalidArgument(fmt::format("trie token {} outside the scorer's vocabulary", token));
    out.push_back({token, p[token]});
  }
  if (renormalize) {
    scalar_t mass = 0;
    for (const auto& c : out) mass += c.prob;
    if (mass > 0) {
      for (auto& c : out) c.prob /= mass;
    }
  }
  return out;
}

ScoredQuery to_scored(BeamState&& s) {
  ScoredQuery q;
  q.tokens = std::move(s.prefix);
  q.token_probs = std::move(s.token_probs);
  q.eos_prob = s.eos_prob;
  q.log_prob = s.log_prob;
  return q;
}

scalar_t ranking_score(const BeamState& s, scalar_t length_penalty) {
  if (length_penalty == 0) return s.log_prob;
  return s.log_prob / std::pow(static_cast<scalar_t>(std::max<std::size_t>(1, s.prefix.size())), length_penalty);
}

bool better(const BeamState& a, scalar_t sa, const BeamState& b, scalar_t sb) {
  if (sa != sb) return sa > sb;
  return a.prefix < b.prefix;
}

void sort_states(std::vector<BeamState>& states, scalar_t length_penalty) {
  std::stable_sort(states.begin(), states.end(), [&](const BeamState& a, const BeamState& b) {
    return better(a, ranking_score(a, length_penalty), b, ranking_score(b, length_penalty));
  });
}

void check_options(const DecodeOptions& o) {
  if (o.k < 1) throw InvalidArgument("k must be >= 1");
  if (o.beam_width < o.k) throw InvalidArgument("beam width must be >= k");
}

/// Shared beam loop. `expand` appends the successors of a live state.
template <typename Expand>
std::vector<ScoredQuery> run_beam(const DecodeOptions& options, Expand&& expand, bool close_at_max_len,
                                  const char* what) {
  std::vector<BeamState> live(1);
  std::vector<BeamState> finished;
  bool truncated = false;

  for (std::size_t step = 0; !live.empty(); ++step) {
    std::vector<BeamState> expansions;
    for (const auto& s : live) expand(s, expansions);
    sort_states(expansions, 0);
    if (expansions.size() > options.beam_width) expansions.resize(options.beam_width);

    live.clear();
    for (auto& s : expansions) {
      if (s.finished) {
        finished.push_back(std::move(s));
      } else if (s.prefix.size() >= options.max_len && close_at_max_len) {
        s.finished = true;
        finished.push_back(std::move(s));
      } else if (s.prefix.size() > options.max_len) {
        truncated = true;
      } else {
        live.push_back(std::move(s));
      }
    }

    // Scores only fall as hypotheses grow, so once k finished ones beat every live one we are done.
    if (options.length_penalty == 0 && finished.size() >= options.k && !live.empty()) {
      sort_states(finished, 0);
      const auto& kth = finished[options.k - 1];
      const auto& best_live = live.front();
      if (better(kth, kth.log_prob, best_live, best_live.log_prob)) break;
    }
  }

  if (finished.empty() && truncated) {
    throw Error(fmt::format("{}: no complete query within max_len={}", what, options.max_len));
  }
  sort_states(finished, options.length_penalty);
  if (finished.size() > options.k) finished.resize(options.k);
  std::vector<ScoredQuery> out;
  out.reserve(finished.size());
  for (auto& s : finished) out.push_back(to_scored(std::move(s)));
  return out;
}

}  // namespace

ScoredQuery constrained_greedy(const NextTokenScorer& scorer, const PromptContext& prompt, const QueryTrie& trie,
                               std::size_t max_len, bool renormalize) {
  if (trie.empty()) throw InvalidArgument("cannot decode against an empty trie");
  const TokenId eos = scorer.eos();
  BeamState s;
  while (true) {
    const auto p = scorer.score(s.prefix, prompt);
    const auto cands = trie_candidates(trie, s.node, p, eos, renormalize);
    std::size_t pick = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (cands[i].prob > cands[pick].prob) pick = i;
    }
    const auto [token, prob] = cands[pick];
    s.log_prob += std::log(prob);
    if (token == eos) {
      s.eos_prob = prob;
      return to_scored(std::move(s));
    }
    if (s.prefix.size() == max_len) {
      throw Error(fmt::format("greedy decode: no complete query within max_len={}", max_len));
    }
    s.prefix.push_back(token);
    s.token_probs.push_back(prob);
    s.node = *trie.child(s.node, token);
  }
}

std::vector<ScoredQuery> constrained_beam(const NextTokenScorer& scorer, const PromptContext& prompt,
                                          const QueryTrie& trie, const DecodeOptions& options) {
  check_options(options);
  if (trie.empty()) throw InvalidArgument("cannot decode against an empty trie");
  const TokenId eos = scorer.eos();
  auto expand = [&](const BeamState& s, std::vector<BeamState>& out) {
    const auto p = scorer.score(s.prefix, prompt);
    for (const auto& [token, prob] : trie_candidates(trie, s.node, p, eos, options.renormalize)) {
      BeamState next = s;
      next.log_prob += std::log(prob);
      if (token == eos) {
        next.finished = true;
        next.eos_prob = prob;
      } else {
        next.prefix.push_back(token);
        next.token_probs.push_back(prob);
        next.node = *trie.child(s.node, token);
      }
      out.push_back(std::move(next));
    }
  };
  return run_beam(options, expand, false, "constrained beam");
}

std::vector<ScoredQuery> unconstrained_beam(const NextTokenScorer& scorer, const PromptContext& prompt,
                                            const DecodeOptions& options) {
  check_options(options);
  const TokenId eos = scorer.eos();
  auto expand = [&](const BeamState& s, std::vector<BeamState>& out) {
    const auto p = scorer.score(s.prefix, prompt);
    // Only the best beam_width successors of one state can survive the global cut.
    std::vector<TokenId> order(static_cast<std::size_t>(p.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<TokenId>(i);
    // An empty query is not a query.
    if (s.prefix.empty()) order.pop_back();
    const std::size_t keep = std::min(order.size(), options.beam_width);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](TokenId a, TokenId b) {
                        if (p[a] != p[b]) return p[a] > p[b];
                        // same prefix: closing sorts before extending
                        if ((a == eos) != (b == eos)) return a == eos;
                        return a < b;
                      });
    order.resize(keep);
    for (TokenId token : order) {
      BeamState next = s;
      next.log_prob += std::log(p[token]);
      if (token == eos) {
        next.finished = true;
        next.eos_prob = p[token];
      } else {
        next.prefix.push_back(token);
        next.token_probs.push_back(p[token]);
      }
      out.push_back(std::move(next));
    }
  };
  return run_beam(options, expand, true, "unconstrained beam");
}

void attach_text(std::span<ScoredQuery> queries, const Tokenizer& tokenizer) {
  for (auto& q : queries) q.text = tokenizer.detokenize(q.tokens);
}

}  // namespace trieguide
