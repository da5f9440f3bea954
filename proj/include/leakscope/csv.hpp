#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "leakscope/errors.hpp"

namespace leakscope::csv {

/// Shortest text that reads back to 17 significant digits; "." separator.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto const [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, end);
}

inline std::string format_index(std::size_t i) { return std::to_string(i); }

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Comma-delimited, LF-terminated rows with a fixed header.
class Writer {
 public:
  Writer(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
    write(header);
  }

  void row(std::vector<std::string> const& fields) {
    if (fields.size() != columns_) throw Error("csv row width does not match header");
    write(fields);
  }

 private:
  void write(std::vector<std::string> const& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_;
};

inline std::ofstream open_output(std::string const& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  return out;
}

}  // namespace leakscope::csv
