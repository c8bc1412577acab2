#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mcdrop {

using CsvRow = std::vector<std::string>;

// RFC 4180 style reader: quoted fields may contain delimiters, doubled quotes
// and newlines. A trailing '\r' is stripped from unquoted line ends.
std::vector<CsvRow> read_delimited(std::istream& in, char delim = ',');

// '\t' for .tsv/.tab files, ',' otherwise.
char delimiter_for(const std::filesystem::path& path);

// Quotes the field when it contains the delimiter, a quote or a newline.
std::string csv_field(std::string_view value, char delim = ',');

// Header lookup; throws InputError naming the file when the column is missing.
std::size_t column_index(const CsvRow& header, std::string_view name, std::string_view source);

}  // namespace mcdrop
