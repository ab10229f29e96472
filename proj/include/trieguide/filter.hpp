#pragma once

#include <trieguide/decode.hpp>

#include <span>
#include <vector>

namespace trieguide {

struct FilterConfig {
  scalar_t theta_g = 0.2;
  scalar_t theta_l = 0.05;
  /// Append the end-of-sequence probability to the scored token probabilities.
  bool include_eos = false;
};

struct FilterReport {
  ScoredQuery query;
  scalar_t f_g = 0;
  scalar_t f_l = 0;
  bool passed_global = false;
  bool passed_local = false;  // only set for global survivors
};

/// Arithmetic mean of the token probabilities.
scalar_t global_score(std::span<const scalar_t> token_probs);
/// Minimum token probability.
scalar_t local_score(std::span<const scalar_t> token_probs);

scalar_t global_score(const ScoredQuery& q, bool include_eos = false);
scalar_t local_score(const ScoredQuery& q, bool include_eos = false);

struct FilterResult {
  std::vector<ScoredQuery> survivors;  // input order preserved
  std::vector<FilterReport> reports;   // one per input
};

/// Keeps queries with global score > theta_g, then of those, local score > theta_l.
FilterResult apply_filter(std::span<const ScoredQuery> queries, const FilterConfig& cfg);

}  // namespace trieguide
