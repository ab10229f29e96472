#include <trieguide/train.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include <fmt/format.h>

namespace trieguide {

std::string render_prompt(std::string_view caption, std::string_view ocr_cover, std::string_view tmpl,
                          std::string_view instruction) {
  for (auto slot : {kInstructionSlot, kItemSlot, kOutputSlot}) {
    if (tmpl.find(slot) == std::string_view::npos) {
      throw InvalidArgument(fmt::format("prompt template is missing the {} placeholder", slot));
    }
  }
  std::string item;
  for (auto field : {caption, ocr_cover}) {
    if (field.empty()) continue;
    if (!item.empty()) item += ", ";
    item += field;
  }
  std::string out(tmpl);
  auto replace = [&out](std::string_view slot, std::string_view value) {
    for (auto pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos + value.size())) {
      out.replace(pos, slot.size(), value);
    }
  };
  replace(kOutputSlot, "");
  replace(kInstructionSlot, instruction);
  replace(kItemSlot, item);
  return out;
}

PromptContext build_prompt(const Vocabulary& vocab, std::string_view caption, std::string_view ocr_cover,
                           std::string_view tmpl, bool lossy) {
  const auto text = render_prompt(caption, ocr_cover, tmpl);
  return {lossy ? vocab.tokenize_lossy(text) : vocab.tokenize(text)};
}

TrainingExample make_example(const Vocabulary& vocab, std::string_view caption, std::string_view ocr_cover,
                             std::string_view query, std::string_view tmpl) {
  TrainingExample ex{build_prompt(vocab, caption, ocr_cover, tmpl), vocab.tokenize(query)};
  if (ex.target.empty()) throw InvalidArgument("training example has an empty query");
  ex.target.push_back(vocab.eos());
  return ex;
}

NttpVariant parse_nttp_variant(std::string_view name) {
  if (name == "per-child" || name == "per-child-sum") return NttpVariant::per_child_sum;
  if (name == "set-mass") return NttpVariant::set_mass;
  throw InvalidArgument(fmt::format("unknown NTTP variant '{}' (expected per-child or set-mass)", name));
}

std::string_view to_string(NttpVariant v) { return v == NttpVariant::set_mass ? "set-mass" : "per-child"; }

namespace {

scalar_t floored_log(scalar_t p) { return std::log(std::max(p, kProbabilityFloor)); }

/// Trie child sets along the target prefixes; empty where the prefix leaves the trie.
std::vector<std::vector<TokenId>> child_sets(const QueryTrie& trie, const TokenSeq& target) {
  std::vector<std::vector<TokenId>> sets(target.size());
  std::optional<QueryTrie::NodeId> node = QueryTrie::kRoot;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (node) {
      for (const auto& [token, _] : trie.child_map(*node)) sets[i].push_back(token);
      node = trie.child(*node, target[i]);
    }
  }
  return sets;
}

void check_target(const TrainingExample& ex) {
  if (ex.target.empty()) throw InvalidArgument("training example has an empty target");
}

scalar_t nttp_term(const Distribution& p, const std::vector<TokenId>& children, const LossSpec& spec) {
  if (spec.variant == NttpVariant::set_mass) {
    scalar_t mass = 0;
    for (TokenId c : children) mass += p[c];
    return -floored_log(mass);
  }
  scalar_t sum = 0;
  for (TokenId c : children) sum += floored_log(p[c]);
  const scalar_t scale = spec.normalize_children ? static_cast<scalar_t>(children.size()) : 1.0;
  return -sum / scale;
}

/// d(nttp_term)/d(logits), consistent with the probability floor.
vector_t nttp_dlogits(const Distribution& p, const std::vector<TokenId>& children, const LossSpec& spec) {
  vector_t d = vector_t::Zero(p.size());
  if (spec.variant == NttpVariant::set_mass) {
    scalar_t mass = 0;
    for (TokenId c : children) mass += p[c];
    if (mass < kProbabilityFloor) return d;
    d = p;
    for (TokenId c : children) d[c] -= p[c] / mass;
    return d;
  }
  const scalar_t scale = spec.normalize_children ? static_cast<scalar_t>(children.size()) : 1.0;
  for (TokenId c : children) {
    if (p[c] < kProbabilityFloor) continue;
    d += p / scale;
    d[c] -= 1.0 / scale;
  }
  return d;
}

struct ExampleTerms {
  scalar_t ntp_sum = 0;
  scalar_t nttp_sum = 0;
  std::size_t positions = 0;
  std::size_t nttp_positions = 0;

  scalar_t ntp() const { return ntp_sum / static_cast<scalar_t>(positions); }
  scalar_t nttp() const { return nttp_positions ? nttp_sum / static_cast<scalar_t>(nttp_positions) : 0.0; }
  scalar_t combined(scalar_t alpha) const { return alpha == 0 ? ntp() : ntp() + alpha * nttp(); }
};

ExampleTerms score_example(const NextTokenScorer& scorer, const TrainingExample& ex, const QueryTrie* trie,
                           const LossSpec& spec) {
  check_target(ex);
  ExampleTerms terms;
  terms.positions = ex.target.size();
  const auto sets = trie ? child_sets(*trie, ex.target) : std::vector<std::vector<TokenId>>(ex.target.size());
  const std::span<const TokenId> target{ex.target};
  for (std::size_t i = 0; i < ex.target.size(); ++i) {
    const auto p = scorer.score(target.first(i), ex.prompt);
    terms.ntp_sum -= floored_log(p[ex.target[i]]);
    if (!sets[i].empty()) {
      terms.nttp_sum += nttp_term(p, sets[i], spec);
      ++terms.nttp_positions;
    }
  }
  return terms;
}

/// Loss of one example; adds `weight * gradient` into `grad`.
scalar_t example_backward(const TinyLm& m, const TrainingExample& ex, const QueryTrie& trie, const LossSpec& spec,
                          scalar_t weight, TinyLmGradient& grad) {
  check_target(ex);
  const bool use_nttp = spec.alpha != 0;
  const auto sets = use_nttp ? child_sets(trie, ex.target) : std::vector<std::vector<TokenId>>(ex.target.size());
  const auto contributing =
      static_cast<std::size_t>(std::count_if(sets.begin(), sets.end(), [](const auto& s) { return !s.empty(); }));

  const auto positions = static_cast<scalar_t>(ex.target.size());
  const vector_t pooled = pool_prompt(m, ex.prompt);
  const std::span<const TokenId> target{ex.target};
  ExampleTerms terms;
  terms.positions = ex.target.size();
  terms.nttp_positions = contributing;

  for (std::size_t i = 0; i < ex.target.size(); ++i) {
    const auto fwd = tiny_forward_pooled(m, target.first(i), ex.prompt, pooled);
    const auto& p = fwd.probs;
    const TokenId gold = ex.target[i];

    terms.ntp_sum -= floored_log(p[gold]);
    vector_t dlogits = vector_t::Zero(p.size());
    if (p[gold] >= kProbabilityFloor) {
      dlogits = p / positions;
      dlogits[gold] -= 1.0 / positions;
    }
    if (!sets[i].empty()) {
      terms.nttp_sum += nttp_term(p, sets[i], spec);
      dlogits += (spec.alpha / static_cast<scalar_t>(contributing)) * nttp_dlogits(p, sets[i], spec);
    }
    backprop_position(m, fwd, ex.prompt, dlogits, weight, grad);
  }
  return terms.combined(spec.alpha);
}

}  // namespace

scalar_t ntp_loss(const NextTokenScorer& scorer, const TrainingExample& example) {
  return score_example(scorer, example, nullptr, LossSpec{}).ntp();
}

scalar_t nttp_loss(const NextTokenScorer& scorer, const TrainingExample& example, const QueryTrie& trie,
                   const LossSpec& spec) {
  return score_example(scorer, example, &trie, spec).nttp();
}

scalar_t combined_loss(const NextTokenScorer& scorer, const TrainingExample& example, const QueryTrie& trie,
                       const LossSpec& spec) {
  if (spec.alpha < 0) throw InvalidArgument("NTTP weight alpha must be nonnegative");
  if (spec.alpha == 0) return ntp_loss(scorer, example);
  return score_example(scorer, example, &trie, spec).combined(spec.alpha);
}

scalar_t combined_loss(const NextTokenScorer& scorer, std::span<const TrainingExample> batch, const QueryTrie& trie,
                       const LossSpec& spec) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  scalar_t total = 0;
  for (const auto& ex : batch) total += combined_loss(scorer, ex, trie, spec);
  return total / static_cast<scalar_t>(batch.size());
}

LossAndGradient tiny_backward(const TinyLm& m, std::span<const TrainingExample> batch, const QueryTrie& trie,
                              const LossSpec& spec) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  if (spec.alpha < 0) throw InvalidArgument("NTTP weight alpha must be nonnegative");
  if (!m.all_finite()) throw InvalidArgument("model has non-finite parameters");
  LossAndGradient out{0, TinyLmGradient::zeros_like(m)};
  const scalar_t weight = 1.0 / static_cast<scalar_t>(batch.size());
  for (const auto& ex : batch) out.loss += example_backward(m, ex, trie, spec, weight, out.gradient);
  out.loss *= weight;
  return out;
}

scalar_t trie_child_mass(const NextTokenScorer& scorer, std::span<const TrainingExample> examples,
                         const QueryTrie& trie) {
  scalar_t total = 0;
  std::size_t count = 0;
  for (const auto& ex : examples) {
    const auto sets = child_sets(trie, ex.target);
    const std::span<const TokenId> target{ex.target};
    for (std::size_t i = 0; i < ex.target.size(); ++i) {
      if (sets[i].empty()) continue;
      const auto p = scorer.score(target.first(i), ex.prompt);
      scalar_t mass = 0;
      for (TokenId c : sets[i]) mass += p[c];
      total += mass;
      ++count;
    }
  }
  return count ? total / static_cast<scalar_t>(count) : 0.0;
}

TrainResult train_loop(TinyLm model, std::span<const TrainingExample> dataset, const QueryTrie& trie,
                       const LossSpec& spec, const TrainConfig& config) {
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  if (config.batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (config.epochs == 0) throw InvalidArgument("epoch count must be positive");
  if (!(config.learning_rate >= 0) || !std::isfinite(config.learning_rate)) {
    throw InvalidArgument("learning rate must be a finite nonnegative number");
  }

  TrainResult result;
  {
    const TinyLmScorer scorer(model);
    result.initial_loss = combined_loss(scorer, dataset, trie, spec);
  }

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);
  std::vector<TrainingExample> batch;
  batch.reserve(config.batch_size);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    scalar_t epoch_total = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(dataset[order[i]]);
      auto step = tiny_backward(model, batch, trie, spec);
      if (!std::isfinite(step.loss)) throw TrainingDiverged(epoch + 1, batch_index + 1);
      epoch_total += step.loss * static_cast<scalar_t>(batch.size());
      sgd_step(model, step.gradient, config.learning_rate);
      if (!model.all_finite()) throw TrainingDiverged(epoch + 1, batch_index + 1);
    }
    result.epoch_loss.push_back(epoch_total / static_cast<scalar_t>(dataset.size()));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace trieguide
