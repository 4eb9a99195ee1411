#pragma once

// Minimal comma-separated reader for the fixed, unquoted formats used here.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "tcal/core.hpp"

namespace tcal::detail {

class CsvReader {
 public:
  CsvReader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  /// Next non-empty line split at commas; false at end of input.
  bool next(std::vector<std::string_view>& fields) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      fields.clear();
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  /// Consume the header line and require it to match exactly.
  void expect_header(std::string_view header) {
    std::vector<std::string_view> f;
    if (!next(f)) fail("empty file, expected header '" + std::string(header) + "'");
    std::string got;
    for (std::size_t i = 0; i < f.size(); ++i) got += (i ? "," : "") + std::string(f[i]);
    if (got != header) fail("expected header '" + std::string(header) + "', got '" + got + "'");
  }

  std::size_t line() const noexcept { return line_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(std::string(source_) + ":" + std::to_string(line_) + ": " + what);
  }

  double number(std::string_view field, const char* name) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
      fail(std::string("bad number for ") + name + ": '" + std::string(field) + "'");
    return v;
  }

  long long integer(std::string_view field, const char* name) const {
    long long v = 0;
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
      fail(std::string("bad integer for ") + name + ": '" + std::string(field) + "'");
    return v;
  }

 private:
  std::string_view text_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

}  // namespace tcal::detail
