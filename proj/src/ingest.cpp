#include <trieguide/errors.hpp>
#include <trieguide/ingest.hpp>
#include <trieguide/util.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include <fmt/format.h>

namespace trieguide {

namespace {

void add_bigrams(std::string_view text, std::set<std::u32string>& out) {
  const auto s = utf8_decode(text);
  if (s.size() == 1) out.insert(s);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) out.insert(s.substr(i, 2));
}

}  // namespace

double BigramJaccardScorer::score(std::string_view caption, std::string_view ocr_cover, std::string_view query) const {
  std::set<std::u32string> video, q;
  add_bigrams(caption, video);
  add_bigrams(ocr_cover, video);
  add_bigrams(query, q);
  if (video.empty() || q.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& g : q) shared += video.count(g);
  return static_cast<double>(shared) / static_cast<double>(video.size() + q.size() - shared);
}

CleanResult clean(std::span<const LogRecord> records, const CleaningConfig& cfg) {
  CleanResult out;
  auto blocked = [&](const LogRecord& r) {
    for (const auto& word : cfg.blocklist) {
      if (word.empty()) continue;
      if (r.caption.find(word) != std::string::npos || r.ocr_cover.find(word) != std::string::npos ||
          r.query.find(word) != std::string::npos) {
        return true;
      }
    }
    return false;
  };
  for (const auto& r : records) {
    if (r.exposure < cfg.min_exposure) {
      ++out.rejected.exposure;
    } else if (r.clicks < cfg.min_clicks) {
      ++out.rejected.clicks;
    } else if (r.similarity < cfg.min_similarity) {
      ++out.rejected.similarity;
    } else if (blocked(r)) {
      ++out.rejected.blocklist;
    } else {
      out.kept.push_back(r);
    }
  }
  return out;
}

DatasetSplit chronological_split(std::span<const LogRecord> records, std::size_t train_count,
                                 std::size_t holdout_count, std::uint64_t seed) {
  if (holdout_count % 2 != 0) throw InvalidArgument("holdout count must be even");
  if (train_count + holdout_count > records.size()) {
    throw InvalidArgument(fmt::format("split needs {} records but only {} are available", train_count + holdout_count,
                                      records.size()));
  }
  std::vector<LogRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LogRecord& a, const LogRecord& b) { return a.timestamp < b.timestamp; });

  DatasetSplit split;
  const auto train_end = sorted.begin() + static_cast<std::ptrdiff_t>(train_count);
  const auto holdout_end = train_end + static_cast<std::ptrdiff_t>(holdout_count);
  split.train.assign(sorted.begin(), train_end);
  std::vector<LogRecord> holdout(train_end, holdout_end);
  std::mt19937_64 rng(seed);
  std::shuffle(holdout.begin(), holdout.end(), rng);
  const auto half = holdout.begin() + static_cast<std::ptrdiff_t>(holdout_count / 2);
  split.validation.assign(holdout.begin(), half);
  split.test.assign(half, holdout.end());
  return split;
}

std::vector<QueryEntry> build_query_pool(std::span<const LogRecord> records, Date today, int window_days) {
  if (window_days <= 0) throw InvalidArgument("window must be a positive number of days");
  std::map<std::string, QueryEntry> pool;
  for (const auto& r : records) {
    const Date day = std::chrono::floor<std::chrono::days>(r.timestamp);
    if (!within_window(day, today, window_days)) continue;
    auto [it, inserted] = pool.try_emplace(r.query, QueryEntry{r.query, day, 0});
    it->second.last_seen = std::max(it->second.last_seen, day);
    ++it->second.count;
  }
  std::vector<QueryEntry> out;
  out.reserve(pool.size());
  for (auto& [_, e] : pool) out.push_back(std::move(e));
  return out;
}

std::vector<QueryEntry> apply_exclusions(std::vector<QueryEntry> pool, const std::set<std::string>& excluded) {
  std::erase_if(pool, [&](const QueryEntry& e) { return excluded.count(e.query) != 0; });
  return pool;
}

namespace {

template <typename T>
bool parse_number(std::string_view s, T& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<LogRecord> read_log_tsv(std::istream& in, const SimilarityScorer* fallback) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, 0, "missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLogHeader) throw ParseError(1, 0, fmt::format("expected header `{}`", escape_field(kLogHeader)));

  std::vector<LogRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 7) throw ParseError(lineno, line.size(), fmt::format("expected 7 fields, found {}", f.size()));
    std::vector<std::size_t> offsets(7, 0);
    for (std::size_t i = 1; i < 7; ++i) offsets[i] = offsets[i - 1] + f[i - 1].size() + 1;

    LogRecord r;
    std::string* text[] = {&r.caption, &r.ocr_cover, &r.query};
    for (std::size_t i = 0; i < 3; ++i) {
      auto v = unescape_field(f[i]);
      if (!v) throw ParseError(lineno, offsets[i], "bad escape sequence");
      *text[i] = std::move(*v);
    }
    if (r.query.empty()) throw ParseError(lineno, offsets[2], "empty query");
    if (!parse_number(f[3], r.exposure)) throw ParseError(lineno, offsets[3], "bad exposure");
    if (!parse_number(f[4], r.clicks)) throw ParseError(lineno, offsets[4], "bad clicks");
    if (r.clicks > r.exposure) throw ParseError(lineno, offsets[4], "clicks exceed exposure");
    if (f[5].empty()) {
      if (!fallback) throw ParseError(lineno, offsets[5], "missing similarity");
      r.similarity = fallback->score(r.caption, r.ocr_cover, r.query);
    } else if (!parse_number(f[5], r.similarity) || !(r.similarity >= 0 && r.similarity <= 1)) {
      throw ParseError(lineno, offsets[5], "similarity must be a number in [0, 1]");
    }
    const auto ts = parse_timestamp(f[6]);
    if (!ts) throw ParseError(lineno, offsets[6], "bad timestamp, expected ISO-8601");
    r.timestamp = *ts;
    records.push_back(std::move(r));
  }
  return records;
}

void write_log_tsv(std::ostream& out, std::span<const LogRecord> records) {
  out << kLogHeader << '\n';
  for (const auto& r : records) {
    out << escape_field(r.caption) << '\t' << escape_field(r.ocr_cover) << '\t' << escape_field(r.query) << '\t'
        << r.exposure << '\t' << r.clicks << '\t' << fmt::format("{}", r.similarity) << '\t'
        << format_timestamp(r.timestamp) << '\n';
  }
}

}  // namespace trieguide
