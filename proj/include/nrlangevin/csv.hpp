#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "nrlangevin/errors.hpp"

namespace nrlangevin {

// Minimal RFC-4180 writer: CRLF line endings, quoting only when a field
// contains a comma, quote, or newline.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw DataError("CsvWriter: cannot open " + path + " for writing");
    out_ << std::setprecision(17);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << "\r\n";
  }

  static std::string field(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
  }
  static std::string field(long v) { return std::to_string(v); }
  static std::string field(int v) { return std::to_string(v); }
  static std::string field(std::size_t v) { return std::to_string(v); }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += "\"\"";
      else quoted += c;
    }
    quoted += '"';
    return quoted;
  }

  std::ofstream out_;
};

}  // namespace nrlangevin
