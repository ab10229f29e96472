#pragma once

#include <trieguide/types.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trieguide {

// UTF-8 <-> Unicode scalar values. Decoding rejects overlong forms, surrogates and truncation.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
std::string utf8_encode(char32_t c);

/// Backslash-escapes tab, newline, carriage return and backslash so a value fits in one TSV cell.
std::string escape_field(std::string_view s);
/// Inverse of escape_field. Returns nullopt on a dangling or unknown escape.
std::optional<std::string> unescape_field(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

/// `YYYY-MM-DD`.
std::optional<Date> parse_date(std::string_view s);
/// `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS` or the same with a trailing `Z`.
std::optional<Timestamp> parse_timestamp(std::string_view s);
std::string format_date(Date d);
std::string format_timestamp(Timestamp t);

/// Flat `key=value` configuration; `#` starts a comment line.
class Config {
 public:
  Config() = default;
  static Config parse(std::istream& in);
  static Config load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Writes to `<path>.tmp` and renames onto `path` on commit(); an uncommitted file is removed.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace trieguide
