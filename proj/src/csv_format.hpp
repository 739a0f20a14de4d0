#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>

namespace hifi {

// Shortest round-trip text for a double; identical bytes for identical bits.
inline std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Minimal RFC 4180 writer: comma separated, '\n' line ends, quotes on demand.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void Field(std::string_view s) {
    Separator();
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
      out_ << s;
      return;
    }
    out_ << '"';
    for (char c : s) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  void Number(double v) { Field(FormatNumber(v)); }
  void Integer(long long v) { Field(std::to_string(v)); }
  void EndRow() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void Separator() {
    if (!first_) out_ << ',';
    first_ = false;
  }

  std::ostream& out_;
  bool first_ = true;
};

}  // namespace hifi
