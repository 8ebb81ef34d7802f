// Minimal CSV helpers shared by the table and chain readers. Numeric
// fields are never quoted, so a plain comma split is enough.
#ifndef PGMETA_SRC_CSV_HPP
#define PGMETA_SRC_CSV_HPP

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "pgmeta/types.hpp"

namespace pgmeta::csv {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// Reads the next line that is neither blank nor a '#' comment.
inline bool next_record(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (line_no == 1 && body.substr(0, 3) == "\xEF\xBB\xBF") line = std::string(body.substr(3));
    return true;
  }
  return false;
}

inline std::int64_t parse_count(const std::string& field, std::size_t line_no,
                                const char* name) {
  std::int64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line_no, std::string("invalid ") + name + " '" + field + "'");
  }
  if (value < 0) throw ParseError(line_no, std::string("negative ") + name);
  return value;
}

inline double parse_real(const std::string& field, std::size_t line_no) {
  // strtod accepts "inf", "-inf" and "nan", which appear in chain files.
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw ParseError(line_no, "invalid number '" + field + "'");
  }
  return value;
}

}  // namespace pgmeta::csv

#endif  // PGMETA_SRC_CSV_HPP
