#include "topemb/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>

#include "topemb/error.hpp"

namespace topemb {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error(ErrorCode::CorruptPayload, "not a number: '" + std::string(text) + "'");
  return value;
}

long long parse_int(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorCode::CorruptPayload, "not an integer: '" + std::string(text) + "'");
  return value;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::CorruptPayload, "missing CSV column '" + std::string(name) + "'");
}

const std::string& CsvTable::at(std::size_t row, std::string_view name) const {
  return rows.at(row).at(column(name));
}

void CsvTable::require_columns(std::initializer_list<std::string_view> names) const {
  for (auto n : names) column(n);
}

CsvTable read_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    switch (c) {
      case '"': quoted = true; break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        break;
      case '\r': break;
      case '\n':
        record.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(record));
        record.clear();
        any = false;
        break;
      default: field += c;
    }
  }
  if (quoted) throw Error(ErrorCode::CorruptPayload, "unterminated quoted CSV field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  CsvTable table;
  if (records.empty()) throw Error(ErrorCode::CorruptPayload, "empty CSV");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw Error(ErrorCode::CorruptPayload, "CSV row " + std::to_string(r) + " has " +
                                                 std::to_string(records[r].size()) +
                                                 " fields, expected " +
                                                 std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

}  // namespace topemb
