#pragma once

#include <trieguide/errors.hpp>
#include <trieguide/lm.hpp>
#include <trieguide/trie.hpp>
#include <trieguide/vocab.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trieguide {

inline constexpr std::string_view kInstructionSlot = "<Instruction>";
inline constexpr std::string_view kItemSlot = "<Input Item>";
inline constexpr std::string_view kOutputSlot = "<Output>";

inline constexpr std::string_view kDefaultTemplate = "User: <Instruction>\n<Input Item>\nAssistant: <Output>";
inline constexpr std::string_view kDefaultInstruction =
    "Based on the content of the following video, generate one keyword that the user might be interested in.";

/// Fills the template: instruction text, then `caption, ocr_cover` (empty fields skipped), output left blank.
std::string render_prompt(std::string_view caption, std::string_view ocr_cover,
                          std::string_view tmpl = kDefaultTemplate, std::string_view instruction = kDefaultInstruction);

/// render_prompt followed by tokenization. With `lossy`, out-of-vocabulary characters are dropped.
PromptContext build_prompt(const Vocabulary& vocab, std::string_view caption, std::string_view ocr_cover,
                           std::string_view tmpl = kDefaultTemplate, bool lossy = false);

/// A prompt and its target query, terminated by end-of-sequence.
struct TrainingExample {
  PromptContext prompt;
  TokenSeq target;
};

TrainingExample make_example(const Vocabulary& vocab, std::string_view caption, std::string_view ocr_cover,
                             std::string_view query, std::string_view tmpl = kDefaultTemplate);

enum class NttpVariant {
  per_child_sum,  // -(1/|C|) * sum_{c in C} log p_c
  set_mass,       // -log sum_{c in C} p_c
};

NttpVariant parse_nttp_variant(std::string_view name);
std::string_view to_string(NttpVariant v);

struct LossSpec {
  scalar_t alpha = 0.1;
  NttpVariant variant = NttpVariant::per_child_sum;
  /// When false the per-child-sum term is not divided by |C|.
  bool normalize_children = true;
};

/// Probabilities are clamped to this before any log.
inline constexpr scalar_t kProbabilityFloor = 1e-12;

/// Mean over target positions of -log p(target_i | prompt, target_<i).
scalar_t ntp_loss(const NextTokenScorer& scorer, const TrainingExample& example);

/**
 * Trie auxiliary loss. At each target position the children of the already emitted prefix form
 * the candidate set C; positions whose prefix is not a trie path (or is a leaf) are skipped.
 * Returns the mean over contributing positions, 0 when there are none.
 */
scalar_t nttp_loss(const NextTokenScorer& scorer, const TrainingExample& example, const QueryTrie& trie,
                   const LossSpec& spec);

/// ntp_loss + alpha * nttp_loss. alpha == 0 returns ntp_loss unchanged.
scalar_t combined_loss(const NextTokenScorer& scorer, const TrainingExample& example, const QueryTrie& trie,
                       const LossSpec& spec);
/// Mean of combined_loss over `batch`.
scalar_t combined_loss(const NextTokenScorer& scorer, std::span<const TrainingExample> batch, const QueryTrie& trie,
                       const LossSpec& spec);

struct LossAndGradient {
  scalar_t loss = 0;
  TinyLmGradient gradient;
};

/// Batch-mean combined loss and its analytic gradient with respect to every TinyLm parameter.
LossAndGradient tiny_backward(const TinyLm& m, std::span<const TrainingExample> batch, const QueryTrie& trie,
                              const LossSpec& spec);

/// Mean of sum_{c in Trie(prefix)} p_c over all target positions with a nonempty child set.
scalar_t trie_child_mass(const NextTokenScorer& scorer, std::span<const TrainingExample> examples,
                         const QueryTrie& trie);

struct TrainConfig {
  scalar_t learning_rate = 0.1;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

struct TrainResult {
  TinyLm model;
  scalar_t initial_loss = 0;
  /// Mean pre-update batch loss per epoch.
  std::vector<scalar_t> epoch_loss;
};

/// Epoch and batch are 1-based.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch)
      : Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// Plain SGD over seeded shuffles of `dataset`. Deterministic for a fixed seed.
TrainResult train_loop(TinyLm model, std::span<const TrainingExample> dataset, const QueryTrie& trie,
                       const LossSpec& spec, const TrainConfig& config);

}  // namespace trieguide
