#pragma once

// Helpers for reading JSON documents whose schema rejects unknown fields.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tcal/core.hpp"

namespace tcal::detail {

using json = nlohmann::json;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

/// Parse a JSON document, reporting syntax errors with a line number.
inline json parse_document(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError(std::string(source) + ":" + std::to_string(line) + ": " + e.what());
  }
}

/// Field reader over one JSON object; finish() rejects keys never read.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path, std::string_view source)
      : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    seen_.emplace_back(key);
    auto it = j_.find(key);
    if (it == j_.end()) fail(key, "missing field");
    return *it;
  }

  double number(const char* key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double number_or(const char* key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  long long integer(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  }
  long long integer_or(const char* key, long long fallback) {
    return has(key) ? integer(key) : mark(key, fallback);
  }

  std::string string(const char* key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const char* key, std::string fallback) {
    return has(key) ? string(key) : mark(key, std::move(fallback));
  }

  bool boolean(const char* key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }
  bool boolean_or(const char* key, bool fallback) { return has(key) ? boolean(key) : mark(key, fallback); }

  const json& array(const char* key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  std::string child_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string child_path(const char* key, std::size_t i) const {
    return child_path(key) + "[" + std::to_string(i) + "]";
  }
  std::string_view source() const { return source_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) fail(it.key(), "unknown field");
    }
  }

  [[noreturn]] void fail(std::string_view key, std::string_view what) const {
    std::string where = path_;
    if (!key.empty()) where += (where.empty() ? "" : ".") + std::string(key);
    throw ParseError(std::string(source_) + ": " + (where.empty() ? "<root>" : where) + ": " + std::string(what));
  }

 private:
  template <typename T>
  T mark(const char* key, T value) {
    seen_.emplace_back(key);
    return value;
  }

  const json& j_;
  std::string path_;
  std::string_view source_;
  std::vector<std::string> seen_;
};

}  // namespace tcal::detail
