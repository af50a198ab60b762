#pragma once
// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, embedded
// newlines inside quotes, CRLF or LF line ends.

#include <string>
#include <string_view>
#include <vector>

namespace aok::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

/// Throws ParseError on an unterminated quote or stray characters after a
/// closing quote. Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace aok::csv
