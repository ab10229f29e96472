#include <trieguide/errors.hpp>
#include <trieguide/util.hpp>
#include <trieguide/vocab.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

namespace trieguide {

namespace {

std::string describe(char32_t c) {
  return fmt::format("'{}' (U+{:04X})", escape_field(utf8_encode(c)), static_cast<std::uint32_t>(c));
}

}  // namespace

Vocabulary::Vocabulary(std::vector<char32_t> entries) : entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i], static_cast<TokenId>(i)).second) {
      throw InvalidArgument("duplicate vocabulary entry " + describe(entries_[i]));
    }
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> corpus) {
  if (corpus.empty()) throw InvalidArgument("cannot build a vocabulary from an empty corpus");
  std::set<char32_t> seen;
  for (const auto& s : corpus) {
    for (char32_t c : utf8_decode(s)) seen.insert(c);
  }
  return Vocabulary(std::vector<char32_t>(seen.begin(), seen.end()));
}

std::optional<TokenId> Vocabulary::find(char32_t c) const {
  const auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

char32_t Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entries_.size()) {
    throw InvalidArgument(fmt::format("token id {} out of range for vocabulary of size {}", id, entries_.size()));
  }
  return entries_[static_cast<std::size_t>(id)];
}

TokenSeq Vocabulary::tokenize(std::string_view text) const {
  TokenSeq ids;
  for (char32_t c : utf8_decode(text)) {
    const auto id = find(c);
    if (!id) throw InvalidArgument("out-of-vocabulary scalar " + describe(c));
    ids.push_back(*id);
  }
  return ids;
}

TokenSeq Vocabulary::tokenize_lossy(std::string_view text, std::size_t* dropped) const {
  TokenSeq ids;
  std::size_t missing = 0;
  for (char32_t c : utf8_decode(text)) {
    if (const auto id = find(c)) {
      ids.push_back(*id);
    } else {
      ++missing;
    }
  }
  if (dropped) *dropped = missing;
  return ids;
}

std::string Vocabulary::detokenize(std::span<const TokenId> ids) const {
  std::u32string out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token(id));
  return utf8_encode(out);
}

void Vocabulary::save(std::ostream& out) const {
  for (char32_t c : entries_) out << escape_field(utf8_encode(c)) << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<char32_t> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto raw = unescape_field(line);
    if (!raw) throw ParseError(lineno, 0, "bad escape in vocabulary entry");
    std::u32string scalars;
    try {
      scalars = utf8_decode(*raw);
    } catch (const InvalidArgument& e) {
      throw ParseError(lineno, 0, e.what());
    }
    if (scalars.size() != 1) throw ParseError(lineno, 0, "vocabulary entry must be exactly one Unicode scalar");
    entries.push_back(scalars.front());
  }
  try {
    return Vocabulary(std::move(entries));
  } catch (const InvalidArgument& e) {
    throw ParseError(lineno, 0, e.what());
  }
}

}  // namespace trieguide
