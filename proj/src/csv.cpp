#include "mcdrop/csv.hpp"

#include <algorithm>
#include <istream>

#include "mcdrop/error.hpp"

namespace mcdrop {

std::vector<CsvRow> read_delimited(std::istream& in, char delim)
{
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw InputError("unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

char delimiter_for(const std::filesystem::path& path)
{
  const auto ext = path.extension().string();
  return (ext == ".tsv" || ext == ".tab") ? '\t' : ',';
}

std::string csv_field(std::string_view value, char delim)
{
  if (value.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string_view::npos)
    return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::size_t column_index(const CsvRow& header, std::string_view name, std::string_view source)
{
  auto trimmed = [](std::string_view s) {
    if (s.starts_with("\xEF\xBB\xBF")) s.remove_prefix(3);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  auto it = std::find_if(header.begin(), header.end(),
                         [&](const std::string& h) { return trimmed(h) == name; });
  if (it == header.end())
    throw InputError(std::string(source) + ": missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace mcdrop
