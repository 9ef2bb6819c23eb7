#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace topemb {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
// Whole-field integer parse; throws CorruptPayload.
long long parse_int(std::string_view text);

std::string csv_escape(std::string_view field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws CorruptPayload
  const std::string& at(std::size_t row, std::string_view name) const;
  void require_columns(std::initializer_list<std::string_view> names) const;
};

// RFC-4180 style: quoted fields may contain commas, quotes and newlines.
CsvTable read_csv(std::istream& in);

}  // namespace topemb
