#pragma once

#include <trieguide/trie.hpp>
#include <trieguide/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trieguide {

/// One video-query interaction row.
struct LogRecord {
  std::string caption;
  std::string ocr_cover;
  std::string query;
  std::uint64_t exposure = 0;
  std::uint64_t clicks = 0;
  double similarity = 0;  // in [0, 1]
  Timestamp timestamp{};

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// Video/query relevance in [0, 1].
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual double score(std::string_view caption, std::string_view ocr_cover, std::string_view query) const = 0;
};

/// Jaccard overlap of character-bigram sets; the video side is the union over caption and OCR text.
class BigramJaccardScorer final : public SimilarityScorer {
 public:
  double score(std::string_view caption, std::string_view ocr_cover, std::string_view query) const override;
};

struct CleaningConfig {
  std::uint64_t min_exposure = 1000;
  std::uint64_t min_clicks = 10;
  double min_similarity = 0.44;
  std::vector<std::string> blocklist;
};

/// Rejection counts; each rejected record is attributed to the first failing rule in field order.
struct RejectionReport {
  std::size_t exposure = 0;
  std::size_t clicks = 0;
  std::size_t similarity = 0;
  std::size_t blocklist = 0;

  std::size_t total() const { return exposure + clicks + similarity + blocklist; }
  friend bool operator==(const RejectionReport&, const RejectionReport&) = default;
};

struct CleanResult {
  std::vector<LogRecord> kept;
  RejectionReport rejected;
};

/// Keeps records with exposure >= min_exposure, clicks >= min_clicks, similarity >= min_similarity
/// and no blocklisted substring in caption, OCR text or query.
CleanResult clean(std::span<const LogRecord> records, const CleaningConfig& cfg);

struct DatasetSplit {
  std::vector<LogRecord> train;
  std::vector<LogRecord> validation;
  std::vector<LogRecord> test;
};

/// Oldest `train_count` records train; the next `holdout_count` are shuffled with `seed` and halved.
DatasetSplit chronological_split(std::span<const LogRecord> records, std::size_t train_count,
                                 std::size_t holdout_count, std::uint64_t seed);

/// One entry per distinct query among records seen within the window ending `today`.
std::vector<QueryEntry> build_query_pool(std::span<const LogRecord> records, Date today, int window_days);

/// Removes pool entries whose query is in `excluded` (manual review hook).
std::vector<QueryEntry> apply_exclusions(std::vector<QueryEntry> pool, const std::set<std::string>& excluded);

inline constexpr std::string_view kLogHeader = "caption\tocr_cover\tquery\texposure\tclicks\tsimilarity\ttimestamp";

/// Reads the log TSV. An empty similarity cell is filled by `fallback` when given, otherwise an error.
std::vector<LogRecord> read_log_tsv(std::istream& in, const SimilarityScorer* fallback = nullptr);
void write_log_tsv(std::ostream& out, std::span<const LogRecord> records);

}  // namespace trieguide
