#include <trieguide/errors.hpp>
#include <trieguide/filter.hpp>

#include <algorithm>
#include <cmath>

namespace trieguide {

scalar_t global_score(std::span<const scalar_t> token_probs) {
  if (token_probs.empty()) throw InvalidArgument("global score of a query with no token probabilities");
  scalar_t sum = 0;
  for (scalar_t p : token_probs) sum += p;
  return sum / static_cast<scalar_t>(token_probs.size());
}

scalar_t local_score(std::span<const scalar_t> token_probs) {
  if (token_probs.empty()) throw InvalidArgument("local score of a query with no token probabilities");
  return *std::min_element(token_probs.begin(), token_probs.end());
}

namespace {

std::vector<scalar_t> scored_probs(const ScoredQuery& q, bool include_eos) {
  std::vector<scalar_t> probs = q.token_probs;
  if (include_eos) probs.push_back(q.eos_prob);
  return probs;
}

}  // namespace

scalar_t global_score(const ScoredQuery& q, bool include_eos) { return global_score(scored_probs(q, include_eos)); }

scalar_t local_score(const ScoredQuery& q, bool include_eos) { return local_score(scored_probs(q, include_eos)); }

FilterResult apply_filter(std::span<const ScoredQuery> queries, const FilterConfig& cfg) {
  auto in_unit = [](scalar_t t) { return t >= 0 && t <= 1; };
  if (!in_unit(cfg.theta_g) || !in_unit(cfg.theta_l)) throw InvalidArgument("filter thresholds must lie in [0, 1]");

  FilterResult result;
  result.reports.reserve(queries.size());
  for (const auto& q : queries) {
    const auto probs = scored_probs(q, cfg.include_eos);
    FilterReport r{q, global_score(probs), local_score(probs), false, false};
    r.passed_global = r.f_g > cfg.theta_g;
    r.passed_local = r.passed_global && r.f_l > cfg.theta_l;
    if (r.passed_local) result.survivors.push_back(q);
    result.reports.push_back(std::move(r));
  }
  return result;
}

}  // namespace trieguide
