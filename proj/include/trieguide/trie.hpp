#pragma once

#include <trieguide/types.hpp>
#include <trieguide/vocab.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trieguide {

/// A stored query in token form.
struct QueryRecord {
  TokenSeq tokens;
  Date last_seen;
  std::uint32_t count = 1;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

/// A stored query in text form; the unit of pool and snapshot files.
struct QueryEntry {
  std::string query;
  Date last_seen;
  std::uint32_t count = 1;

  friend bool operator==(const QueryEntry&, const QueryEntry&) = default;
};

/**
 * Prefix tree over tokenized queries.
 *
 * Every leaf is terminal and the root never is. Interior nodes carry the most recent
 * `last_seen` of any query below them, which lets eviction drop whole subtrees.
 * Children are kept in token-id order, so every traversal is lexicographic.
 */
class QueryTrie {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kRoot = 0;
  static constexpr int kDefaultWindowDays = 15;

  explicit QueryTrie(int window_days = kDefaultWindowDays);

  /// Adds `query` (nonempty). Re-inserting keeps the later `seen` date; the count follows the newest insert.
  void insert(std::span<const TokenId> query, Date seen, std::uint32_t count = 1);

  /// Tokens that may follow `prefix`, ascending. Empty when `prefix` is not a path.
  std::vector<TokenId> children(std::span<const TokenId> prefix) const;
  bool is_complete(std::span<const TokenId> query) const;

  /// Queries last seen strictly before `today - window_days` are dropped.
  QueryTrie evict_expired(Date today) const;

  /// Stored queries in lexicographic token order.
  std::vector<QueryRecord> queries() const;

  // Cursor access for decoders.
  std::optional<NodeId> find(std::span<const TokenId> prefix) const;
  std::optional<NodeId> child(NodeId node, TokenId token) const;
  const std::map<TokenId, NodeId>& child_map(NodeId node) const { return nodes_[node].children; }
  bool is_terminal(NodeId node) const { return nodes_[node].terminal; }
  Date last_seen(NodeId node) const { return nodes_[node].last_seen; }
  std::uint32_t weight(NodeId node) const { return nodes_[node].weight; }

  int window_days() const { return window_days_; }
  std::size_t query_count() const { return query_count_; }
  std::size_t node_count() const { return nodes_.size(); }
  bool empty() const { return query_count_ == 0; }

 private:
  struct Node {
    std::map<TokenId, NodeId> children;
    bool terminal = false;
    Date last_seen = Date::min();   // max over this node's own query and all descendants
    Date query_seen = Date::min();  // own query, terminal nodes only
    std::uint32_t weight = 0;
    std::uint32_t count = 0;
  };

  NodeId copy_live(const QueryTrie& src, NodeId node, Date cutoff);
  void collect(NodeId node, TokenSeq& path, std::vector<QueryRecord>& out) const;

  std::vector<Node> nodes_;
  int window_days_;
  std::size_t query_count_ = 0;
};

/// True when `last_seen` is within `window_days` of `today`, boundary inclusive.
bool within_window(Date last_seen, Date today, int window_days);

// Snapshot / pool file: header `TRIE v1 window=<days>`, then `<escaped query>\t<YYYY-MM-DD>\t<count>` lines.
void write_query_entries(std::ostream& out, int window_days, std::span<const QueryEntry> entries);
struct QueryEntryFile {
  int window_days = QueryTrie::kDefaultWindowDays;
  std::vector<QueryEntry> entries;
};
QueryEntryFile read_query_entries(std::istream& in);

void save_snapshot(const QueryTrie& trie, const Tokenizer& tokenizer, std::ostream& out);
QueryTrie load_snapshot(std::istream& in, const Tokenizer& tokenizer);
QueryTrie build_trie(std::span<const QueryEntry> entries, const Tokenizer& tokenizer, int window_days);
std::vector<QueryEntry> to_entries(const QueryTrie& trie, const Tokenizer& tokenizer);

/// Holds the snapshot readers see. Writers build a new trie off to the side and publish it.
class TrieHandle {
 public:
  TrieHandle() : current_(std::make_shared<const QueryTrie>()) {}
  explicit TrieHandle(QueryTrie initial) : current_(std::make_shared<const QueryTrie>(std::move(initial))) {}

  std::shared_ptr<const QueryTrie> current() const {
    std::lock_guard lock(mu_);
    return current_;
  }
  void publish(QueryTrie next) {
    auto fresh = std::make_shared<const QueryTrie>(std::move(next));
    std::lock_guard lock(mu_);
    current_ = std::move(fresh);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const QueryTrie> current_;
};

}  // namespace trieguide
