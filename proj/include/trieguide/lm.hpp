#pragma once

#include <trieguide/types.hpp>
#include <trieguide/vocab.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace trieguide {

/** Probability vector over the vocabulary plus end-of-sequence (last entry). */
using Distribution = vector_t;

/** Tokens of the filled-in prompt the scorer conditions on. May be empty. */
struct PromptContext {
  TokenSeq item_tokens;
};

/** Context -> next-symbol distribution. Implementations are deterministic and read-only. */
class NextTokenScorer {
 public:
  virtual ~NextTokenScorer() = default;
  /// Vocabulary size plus one for end-of-sequence.
  virtual std::size_t symbol_count() const = 0;
  virtual Distribution score(std::span<const TokenId> context, const PromptContext& prompt) const = 0;

  TokenId eos() const { return static_cast<TokenId>(symbol_count() - 1); }
};

/// Max-subtracted softmax.
Distribution softmax(const vector_t& logits);

/// True when entries are finite, nonnegative and sum to one within `tol`.
bool is_distribution(const Distribution& p, double tol = 1e-9);

/**
 * Additive-smoothed n-gram model. Sequences are left-padded with a start marker, so the
 * conditioning key is always the last `order - 1` symbols. Ignores the prompt.
 */
class NgramScorer final : public NextTokenScorer {
 public:
  /// Fits on `corpus` (sequences without end-of-sequence; one is appended to each).
  static NgramScorer fit(std::span<const TokenSeq> corpus, std::size_t vocab_size, int order, double alpha);

  std::size_t symbol_count() const override { return symbols_; }
  Distribution score(std::span<const TokenId> context, const PromptContext& prompt) const override;

  int order() const { return order_; }
  double alpha() const { return alpha_; }

  static constexpr TokenId kStart = -1;

 private:
  NgramScorer(std::size_t symbols, int order, double alpha) : symbols_(symbols), order_(order), alpha_(alpha) {}
  TokenSeq key_for(std::span<const TokenId> context) const;

  struct Counts {
    std::vector<double> next;
    double total = 0;
  };
  std::size_t symbols_;
  int order_;
  double alpha_;
  std::map<TokenSeq, Counts> counts_;
};

/**
 * Tiny trainable language model.
 *
 * The hidden state is the mean of the window elements: the mean prompt embedding (when the
 * prompt is nonempty) followed by the embeddings of the last `order` context tokens.
 * logits = output^T * hidden + bias.
 */
struct TinyLm {
  int order = 3;
  matrix_t embedding;  // symbols x dim
  matrix_t output;     // dim x symbols
  vector_t bias;       // symbols

  std::size_t symbols() const { return static_cast<std::size_t>(bias.size()); }
  int dim() const { return static_cast<int>(embedding.cols()); }
  std::size_t parameter_count() const {
    return static_cast<std::size_t>(embedding.size() + output.size() + bias.size());
  }
  bool all_finite() const { return embedding.allFinite() && output.allFinite() && bias.allFinite(); }
};

TinyLm zero_tiny_lm(std::size_t symbols, int dim, int order);
/// Parameters drawn from N(0, scale^2) with a seeded generator.
TinyLm random_tiny_lm(std::size_t symbols, int dim, int order, std::uint64_t seed, double scale = 0.1);

/// Same shape as TinyLm's parameters.
struct TinyLmGradient {
  matrix_t embedding;
  matrix_t output;
  vector_t bias;

  static TinyLmGradient zeros_like(const TinyLm& m);
  TinyLmGradient& operator+=(const TinyLmGradient& other);
  TinyLmGradient& operator*=(scalar_t s);
};

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardPass {
  TokenSeq window;  // context tokens inside the window
  bool has_prompt = false;
  vector_t hidden;
  vector_t logits;
  Distribution probs;
};

/// Mean embedding of the prompt tokens; zero vector for an empty prompt.
vector_t pool_prompt(const TinyLm& m, const PromptContext& prompt);

/// Throws on non-finite parameters.
ForwardPass tiny_forward(const TinyLm& m, std::span<const TokenId> context, const PromptContext& prompt);
/// Unchecked variant taking an already pooled prompt.
ForwardPass tiny_forward_pooled(const TinyLm& m, std::span<const TokenId> context, const PromptContext& prompt,
                                const vector_t& pooled_prompt);

/// Accumulates `weight * d(loss)/d(params)` given d(loss)/d(logits) at one position.
void backprop_position(const TinyLm& m, const ForwardPass& fwd, const PromptContext& prompt, const vector_t& dlogits,
                       scalar_t weight, TinyLmGradient& grad);

/// In-place `m -= learning_rate * grad`.
void sgd_step(TinyLm& m, const TinyLmGradient& grad, scalar_t learning_rate);

/// Scores with a TinyLm it does not own; the model must outlive the scorer.
class TinyLmScorer final : public NextTokenScorer {
 public:
  explicit TinyLmScorer(const TinyLm& model);
  std::size_t symbol_count() const override { return model_->symbols(); }
  Distribution score(std::span<const TokenId> context, const PromptContext& prompt) const override;

 private:
  const TinyLm* model_;
};

struct Checkpoint {
  TinyLm model;
  Vocabulary vocab;
};

// `TINYLM v1 vocab=<N> dim=<d> order=<n>` followed by [vocab], [embedding], [output] and [bias]
// sections. Matrices are row-major, one row per line, shortest round-trip decimal.
void save_checkpoint(std::ostream& out, const TinyLm& m, const Vocabulary& vocab);
Checkpoint load_checkpoint(std::istream& in);

}  // namespace trieguide
