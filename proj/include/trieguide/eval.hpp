#pragma once

#include <trieguide/types.hpp>

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trieguide {

/// Levenshtein distance over Unicode scalars with unit costs.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);
/// UTF-8 overload.
std::size_t edit_distance(std::string_view a, std::string_view b);

struct EvalRecord {
  std::string ground_truth;
  std::vector<std::string> predictions;  // best first
};

struct EditAtK {
  double value = 0;
  std::size_t requested = 0;
  std::size_t used = 0;  // min(k, available)

  bool shortfall() const { return used < requested; }
};

/// Mean distance from the ground truth to the first min(k, available) predictions.
EditAtK edit_at_k(const EvalRecord& record, std::size_t k);

struct EvalSummary {
  std::vector<std::size_t> ks;
  std::map<std::size_t, double> edit_at;
  /// Records that had fewer than k predictions.
  std::map<std::size_t, std::size_t> shortfall;
  /// Unweighted mean of the per-k values.
  double average = 0;
  std::size_t records = 0;
};

EvalSummary evaluate(std::span<const EvalRecord> records, std::span<const std::size_t> ks);

/// `k\tedit\tshortfall` rows followed by an `avg` row.
void write_summary_tsv(std::ostream& out, const EvalSummary& summary);

}  // namespace trieguide
