// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cvecwe::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals_ascii(std::string_view a, std::string_view b);

struct Line {
    std::size_t number;  // 1-based
    std::size_t offset;  // byte offset of the line start in the source
    std::string_view text;  // without the trailing "\n" or "\r\n"
};

// Splits on LF, stripping a trailing CR. A final line without a newline is
// kept; a trailing empty line after the last LF is not reported.
std::vector<Line> split_lines(std::string_view source);

// RFC 4180 style: comma separated, fields optionally double-quoted with ""
// as an escaped quote. Returns false on an unterminated quote.
bool parse_csv_row(std::string_view row, std::vector<std::string>& fields);

// Quotes a field when it contains a comma, quote, CR, or LF.
std::string csv_escape(std::string_view field);

// Minimal XML entity decoding for attribute values (&amp; &lt; &gt; &quot;
// &apos; and numeric references).
std::string xml_unescape(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// printf "%.6g": 6 significant digits, as used in reports.
std::string format_sig6(double value);

}  // namespace cvecwe::text
