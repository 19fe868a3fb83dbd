#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tpi {

// Stationing, in integer feet from the segment origin.
using Feet = std::int64_t;

// One line of a line-oriented document. Unquoted `key=value` tokens become
// attributes (the value may be quoted: key="a b"); everything else is
// positional, in order.
struct Record {
  std::string keyword;
  std::vector<std::string> fields;
  std::map<std::string, std::string> attrs;
  int line = 0;

  [[nodiscard]] const std::string& field(std::size_t i) const;
  [[nodiscard]] std::optional<std::string> attr(const std::string& key) const;
  [[nodiscard]] std::string attr_or(const std::string& key, std::string fallback) const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

// Domain failures (validation, interlocks, infeasible plans) that carry a
// stable kind string and the ids involved.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string kind, std::vector<std::string> participants, const std::string& detail);

  [[nodiscard]] const std::string& kind() const { return kind_; }
  [[nodiscard]] const std::vector<std::string>& participants() const { return participants_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }

 private:
  std::string kind_;
  std::vector<std::string> participants_;
  std::string detail_;
};

// Splits text into records. Blank lines and `#` comments are dropped.
std::vector<Record> parse_records(std::string_view text);

// Inverse of the tokenizer for one token: quotes when needed.
std::string quote_if_needed(std::string_view token);

std::int64_t parse_int(const Record& r, const std::string& token);
double parse_double(const Record& r, const std::string& token);
bool parse_flag(const Record& r, const std::string& token);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_file(const std::string& path);

}  // namespace tpi
