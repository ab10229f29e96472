#include <trieguide/errors.hpp>
#include <trieguide/trie.hpp>
#include <trieguide/util.hpp>

#include <charconv>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace trieguide {

QueryTrie::QueryTrie(int window_days) : window_days_(window_days) {
  if (window_days <= 0) throw InvalidArgument("trie window must be a positive number of days");
  nodes_.emplace_back();
}

void QueryTrie::insert(std::span<const TokenId> query, Date seen, std::uint32_t count) {
  if (query.empty()) throw InvalidArgument("cannot insert an empty query into the trie");
  NodeId node = kRoot;
  for (TokenId t : query) {
    if (t < 0) throw InvalidArgument(fmt::format("negative token id {} in query", t));
    auto it = nodes_[node].children.find(t);
    if (it == nodes_[node].children.end()) {
      const auto fresh = static_cast<NodeId>(nodes_.size());
      nodes_.emplace_back();
      nodes_[node].children.emplace(t, fresh);
      node = fresh;
    } else {
      node = it->second;
    }
  }
  Node& leaf = nodes_[node];
  const bool is_new = !leaf.terminal;
  if (is_new) {
    leaf.terminal = true;
    leaf.query_seen = seen;
    leaf.count = count;
    ++query_count_;
  } else if (seen >= leaf.query_seen) {
    leaf.query_seen = seen;
    leaf.count = count;
  }

  NodeId walk = kRoot;
  auto touch = [&](NodeId n) {
    if (is_new) ++nodes_[n].weight;
    nodes_[n].last_seen = std::max(nodes_[n].last_seen, seen);
  };
  touch(walk);
  for (TokenId t : query) {
    walk = nodes_[walk].children.at(t);
    touch(walk);
  }
}

std::optional<QueryTrie::NodeId> QueryTrie::child(NodeId node, TokenId token) const {
  const auto& kids = nodes_[node].children;
  const auto it = kids.find(token);
  if (it == kids.end()) return std::nullopt;
  return it->second;
}

std::optional<QueryTrie::NodeId> QueryTrie::find(std::span<const TokenId> prefix) const {
  NodeId node = kRoot;
  for (TokenId t : prefix) {
    const auto next = child(node, t);
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

std::vector<TokenId> QueryTrie::children(std::span<const TokenId> prefix) const {
  std::vector<TokenId> out;
  if (const auto node = find(prefix)) {
    out.reserve(nodes_[*node].children.size());
    for (const auto& [token, _] : nodes_[*node].children) out.push_back(token);
  }
  return out;
}

bool QueryTrie::is_complete(std::span<const TokenId> query) const {
  const auto node = find(query);
  return node && nodes_[*node].terminal;
}

bool within_window(Date last_seen, Date today, int window_days) {
  return last_seen >= today - std::chrono::days{window_days};
}

QueryTrie QueryTrie::evict_expired(Date today) const {
  QueryTrie out(window_days_);
  const Date cutoff = today - std::chrono::days{window_days_};
  for (const auto& [token, kid] : nodes_[kRoot].children) {
    const NodeId copied = out.copy_live(*this, kid, cutoff);
    if (copied != kRoot) {
      out.nodes_[kRoot].children.emplace(token, copied);
      out.nodes_[kRoot].weight += out.nodes_[copied].weight;
      out.nodes_[kRoot].last_seen = std::max(out.nodes_[kRoot].last_seen, out.nodes_[copied].last_seen);
    }
  }
  return out;
}

// Copies the live part of `src`'s subtree at `node`. Returns kRoot when nothing survives.
QueryTrie::NodeId QueryTrie::copy_live(const QueryTrie& src, NodeId node, Date cutoff) {
  const Node& from = src.nodes_[node];
  if (from.last_seen < cutoff) return kRoot;

  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.emplace_back();
  if (from.terminal && from.query_seen >= cutoff) {
    Node& n = nodes_[id];
    n.terminal = true;
    n.query_seen = from.query_seen;
    n.count = from.count;
    n.weight = 1;
    n.last_seen = from.query_seen;
    ++query_count_;
  }
  for (const auto& [token, kid] : from.children) {
    const NodeId copied = copy_live(src, kid, cutoff);
    if (copied == kRoot) continue;
    Node& n = nodes_[id];
    n.children.emplace(token, copied);
    n.weight += nodes_[copied].weight;
    n.last_seen = std::max(n.last_seen, nodes_[copied].last_seen);
  }
  if (!nodes_[id].terminal && nodes_[id].children.empty()) {
    nodes_.pop_back();
    return kRoot;
  }
  return id;
}

void QueryTrie::collect(NodeId node, TokenSeq& path, std::vector<QueryRecord>& out) const {
  const Node& n = nodes_[node];
  if (n.terminal) out.push_back({path, n.query_seen, n.count});
  for (const auto& [token, kid] : n.children) {
    path.push_back(token);
    collect(kid, path, out);
    path.pop_back();
  }
}

std::vector<QueryRecord> QueryTrie::queries() const {
  std::vector<QueryRecord> out;
  out.reserve(query_count_);
  TokenSeq path;
  collect(kRoot, path, out);
  return out;
}

void write_query_entries(std::ostream& out, int window_days, std::span<const QueryEntry> entries) {
  out << "TRIE v1 window=" << window_days << '\n';
  for (const auto& e : entries) {
    out << escape_field(e.query) << '\t' << format_date(e.last_seen) << '\t' << e.count << '\n';
  }
}

QueryEntryFile read_query_entries(std::istream& in) {
  QueryEntryFile file;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, 0, "missing `TRIE v1 window=<days>` header");
  constexpr std::string_view kHeader = "TRIE v1 window=";
  if (line.rfind(kHeader, 0) != 0) throw ParseError(1, 0, "expected `TRIE v1 window=<days>` header");
  {
    const std::string_view days{line.data() + kHeader.size(), line.size() - kHeader.size()};
    auto [ptr, ec] = std::from_chars(days.data(), days.data() + days.size(), file.window_days);
    if (ec != std::errc() || ptr != days.data() + days.size() || file.window_days <= 0) {
      throw ParseError(1, kHeader.size(), "window must be a positive integer");
    }
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(lineno, line.size(), fmt::format("expected 3 tab-separated fields, found {}", fields.size()));
    }
    const std::size_t date_off = fields[0].size() + 1;
    const std::size_t count_off = date_off + fields[1].size() + 1;
    auto query = unescape_field(fields[0]);
    if (!query || query->empty()) throw ParseError(lineno, 0, "bad or empty query field");
    const auto date = parse_date(fields[1]);
    if (!date) throw ParseError(lineno, date_off, "bad date, expected YYYY-MM-DD");
    std::uint32_t count = 0;
    auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), count);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size() || fields[2].empty()) {
      throw ParseError(lineno, count_off, "bad count");
    }
    file.entries.push_back({std::move(*query), *date, count});
  }
  return file;
}

QueryTrie build_trie(std::span<const QueryEntry> entries, const Tokenizer& tokenizer, int window_days) {
  QueryTrie trie(window_days);
  for (const auto& e : entries) trie.insert(tokenizer.tokenize(e.query), e.last_seen, e.count);
  return trie;
}

std::vector<QueryEntry> to_entries(const QueryTrie& trie, const Tokenizer& tokenizer) {
  std::vector<QueryEntry> out;
  for (const auto& r : trie.queries()) out.push_back({tokenizer.detokenize(r.tokens), r.last_seen, r.count});
  return out;
}

void save_snapshot(const QueryTrie& trie, const Tokenizer& tokenizer, std::ostream& out) {
  write_query_entries(out, trie.window_days(), to_entries(trie, tokenizer));
}

QueryTrie load_snapshot(std::istream& in, const Tokenizer& tokenizer) {
  const auto file = read_query_entries(in);
  QueryTrie trie(file.window_days);
  std::size_t lineno = 1;
  for (const auto& e : file.entries) {
    ++lineno;
    try {
      trie.insert(tokenizer.tokenize(e.query), e.last_seen, e.count);
    } catch (const InvalidArgument& err) {
      throw ParseError(lineno, 0, err.what());
    }
  }
  return trie;
}

}  // namespace trieguide
