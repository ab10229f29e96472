#pragma once

#include <trieguide/lm.hpp>
#include <trieguide/trie.hpp>
#include <trieguide/vocab.hpp>

#include <span>
#include <string>
#include <vector>

namespace trieguide {

/// A generated query with the probabilities recorded while decoding it.
struct ScoredQuery {
  TokenSeq tokens;  // without end-of-sequence
  std::string text;
  std::vector<scalar_t> token_probs;  // one per token in `tokens`
  scalar_t eos_prob = 1.0;            // probability of the closing end-of-sequence
  /// Sum of log token_probs plus log eos_prob.
  scalar_t log_prob = 0;
};

struct DecodeOptions {
  std::size_t beam_width = 5;
  std::size_t k = 5;
  std::size_t max_len = 64;
  /// Record and rank by probabilities renormalized over the candidate set instead of the full vocabulary.
  bool renormalize = false;
  /// Finished hypotheses are ranked by log_prob / len^length_penalty. 0 disables.
  scalar_t length_penalty = 0;
};

/**
 * Greedy decoding restricted to trie paths. Candidates at each step are the children of the
 * current node, plus end-of-sequence when the node is terminal. A single candidate is taken
 * without consulting the scorer's ranking; otherwise the most probable one wins, ties going
 * to end-of-sequence and then the lowest token id.
 */
ScoredQuery constrained_greedy(const NextTokenScorer& scorer, const PromptContext& prompt, const QueryTrie& trie,
                               std::size_t max_len, bool renormalize = false);

/**
 * Beam search restricted to trie paths. Finished hypotheses compete on total log-probability
 * and ties go to the lexicographically smaller token sequence. Returns up to `k` complete
 * queries, best first.
 */
std::vector<ScoredQuery> constrained_beam(const NextTokenScorer& scorer, const PromptContext& prompt,
                                          const QueryTrie& trie, const DecodeOptions& options);

/// Plain beam search over the full vocabulary. Hypotheses reaching max_len are closed as they are.
std::vector<ScoredQuery> unconstrained_beam(const NextTokenScorer& scorer, const PromptContext& prompt,
                                            const DecodeOptions& options);

/// Fills `text` from `tokens`.
void attach_text(std::span<ScoredQuery> queries, const Tokenizer& tokenizer);

}  // namespace trieguide
