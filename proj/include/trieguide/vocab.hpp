#pragma once

#include <trieguide/types.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trieguide {

/// Text <-> token id mapping. Implementations must be deterministic and immutable once built.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual TokenSeq tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const TokenId> ids) const = 0;
  /// Number of surface tokens. The end-of-sequence id is `size()`.
  virtual std::size_t size() const = 0;

  TokenId eos() const { return static_cast<TokenId>(size()); }
  /// Surface tokens plus end-of-sequence.
  std::size_t symbol_count() const { return size() + 1; }
};

/// Character-level vocabulary: one token per Unicode scalar, ids assigned in codepoint order.
class Vocabulary final : public Tokenizer {
 public:
  Vocabulary() = default;
  /// Entries must be distinct; their order defines the ids.
  explicit Vocabulary(std::vector<char32_t> entries);

  /// Every distinct scalar of `corpus`, sorted by codepoint. Throws on an empty corpus.
  static Vocabulary build(std::span<const std::string> corpus);

  TokenSeq tokenize(std::string_view text) const override;
  /// Drops out-of-vocabulary scalars instead of throwing; `dropped` receives how many.
  TokenSeq tokenize_lossy(std::string_view text, std::size_t* dropped = nullptr) const;
  std::string detokenize(std::span<const TokenId> ids) const override;
  std::size_t size() const override { return entries_.size(); }

  std::optional<TokenId> find(char32_t c) const;
  char32_t token(TokenId id) const;
  const std::vector<char32_t>& entries() const { return entries_; }

  /// One escaped token per line; the line number is the id.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<char32_t> entries_;
  std::unordered_map<char32_t, TokenId> index_;
};

inline TokenSeq tokenize(const Tokenizer& t, std::string_view s) { return t.tokenize(s); }
inline std::string detokenize(const Tokenizer& t, std::span<const TokenId> ids) { return t.detokenize(ids); }

}  // namespace trieguide
