#include <trieguide/errors.hpp>
#include <trieguide/eval.hpp>
#include <trieguide/util.hpp>

#include <algorithm>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

namespace trieguide {

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  // single rolling row over the shorter string
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(std::u32string_view{utf8_decode(a)}, std::u32string_view{utf8_decode(b)});
}

EditAtK edit_at_k(const EvalRecord& record, std::size_t k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (record.predictions.empty()) throw InvalidArgument("record for '" + record.ground_truth + "' has no predictions");
  EditAtK out;
  out.requested = k;
  out.used = std::min(k, record.predictions.size());
  const auto truth = utf8_decode(record.ground_truth);
  double total = 0;
  for (std::size_t i = 0; i < out.used; ++i) {
    total += static_cast<double>(edit_distance(truth, utf8_decode(record.predictions[i])));
  }
  out.value = total / static_cast<double>(out.used);
  return out;
}

EvalSummary evaluate(std::span<const EvalRecord> records, std::span<const std::size_t> ks) {
  if (records.empty()) throw InvalidArgument("nothing to evaluate: no records");
  if (ks.empty()) throw InvalidArgument("no k values requested");
  EvalSummary summary;
  summary.ks.assign(ks.begin(), ks.end());
  summary.records = records.size();
  for (std::size_t k : ks) {
    double total = 0;
    std::size_t shortfall = 0;
    for (const auto& r : records) {
      const auto e = edit_at_k(r, k);
      total += e.value;
      if (e.shortfall()) ++shortfall;
    }
    summary.edit_at[k] = total / static_cast<double>(records.size());
    summary.shortfall[k] = shortfall;
  }
  double sum = 0;
  for (std::size_t k : ks) sum += summary.edit_at[k];
  summary.average = sum / static_cast<double>(ks.size());
  return summary;
}

void write_summary_tsv(std::ostream& out, const EvalSummary& summary) {
  out << "k\tedit\tshortfall\n";
  for (std::size_t k : summary.ks) {
    out << fmt::format("{}\t{:.4f}\t{}\n", k, summary.edit_at.at(k), summary.shortfall.at(k));
  }
  out << fmt::format("avg\t{:.4f}\t-\n", summary.average);
}

}  // namespace trieguide
