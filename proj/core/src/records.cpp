#include "tpi/records.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tpi {

const std::string& Record::field(std::size_t i) const {
  if (i >= fields.size()) {
    throw ParseError(line, "'" + keyword + "' record is missing field " + std::to_string(i + 1));
  }
  return fields[i];
}

std::optional<std::string> Record::attr(const std::string& key) const {
  auto it = attrs.find(key);
  if (it == attrs.end()) return std::nullopt;
  return it->second;
}

std::string Record::attr_or(const std::string& key, std::string fallback) const {
  auto it = attrs.find(key);
  return it == attrs.end() ? std::move(fallback) : it->second;
}

ParseError::ParseError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

DomainError::DomainError(std::string kind, std::vector<std::string> participants,
                         const std::string& detail)
    : std::runtime_error(kind + ": " + detail),
      kind_(std::move(kind)),
      participants_(std::move(participants)),
      detail_(detail) {}

namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    if (line[i] == '#') break;
    Token tok;
    auto read_quoted = [&] {
      ++i;
      while (i < line.size() && line[i] != '"') {
        if (line[i] == '\\' && i + 1 < line.size()) ++i;
        tok.text.push_back(line[i++]);
      }
      if (i >= line.size()) throw ParseError(line_no, "unterminated quoted string");
      ++i;
    };
    if (line[i] == '"') {
      tok.quoted = true;
      read_quoted();
    } else {
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
        // key="quoted value"
        if (line[i] == '"' && !tok.text.empty() && tok.text.back() == '=') {
          read_quoted();
          break;
        }
        tok.text.push_back(line[i++]);
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace

std::vector<Record> parse_records(std::string_view text) {
  std::vector<Record> records;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto tokens = tokenize(text.substr(pos, end - pos), line_no);
    if (!tokens.empty()) {
      Record r;
      r.line = line_no;
      r.keyword = tokens.front().text;
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        const auto& tok = tokens[t];
        auto eq = tok.text.find('=');
        if (!tok.quoted && eq != std::string::npos && eq > 0) {
          r.attrs[tok.text.substr(0, eq)] = tok.text.substr(eq + 1);
        } else {
          r.fields.push_back(tok.text);
        }
      }
      records.push_back(std::move(r));
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return records;
}

std::string quote_if_needed(std::string_view token) {
  bool needs = token.empty();
  for (char c : token) {
    if (c == ' ' || c == '\t' || c == '"' || c == '#' || c == '=') needs = true;
  }
  if (!needs) return std::string(token);
  std::string out = "\"";
  for (char c : token) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::int64_t parse_int(const Record& r, const std::string& token) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size()) {
    throw ParseError(r.line, "expected integer, got '" + token + "'");
  }
  return v;
}

double parse_double(const Record& r, const std::string& token) {
  try {
    std::size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError(r.line, "expected number, got '" + token + "'");
  }
}

bool parse_flag(const Record& r, const std::string& token) {
  if (token == "1" || token == "true" || token == "yes") return true;
  if (token == "0" || token == "false" || token == "no") return false;
  throw ParseError(r.line, "expected 0 or 1, got '" + token + "'");
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tpi
