#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fusedml/dataset.hpp"
#include "fusedml/errors.hpp"

namespace fusedml {

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

inline double parse_double(const std::string& field, std::size_t row) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw Error(ErrorKind::bad_input,
                "cannot parse '" + field + "' at data row " + std::to_string(row));
  }
  return value;
}

/// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    auto res = std::from_chars(buf, buf + std::string(buf).size(), back);
    if (res.ec == std::errc() && back == v) break;
  }
  return buf;
}

}  // namespace detail

inline RawTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::bad_input, "empty CSV input");
  }
  RawTable table;
  table.names = detail::split_line(line);
  table.columns.resize(table.names.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_line(line);
    if (fields.size() != table.names.size()) {
      throw Error(ErrorKind::bad_input,
                  "row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.names.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      table.columns[c].push_back(detail::parse_double(fields[c], row));
    }
    ++row;
  }
  return table;
}

inline RawTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::bad_input, "cannot open '" + path + "'");
  return read_csv(in);
}

inline Dataset read_dataset_csv(const std::string& path) {
  return validate_dataset(read_csv_file(path));
}

inline void write_csv(const RawTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    if (c > 0) out << ',';
    out << table.names[c];
  }
  out << '\n';
  const std::size_t n = table.columns.empty() ? 0 : table.columns[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c > 0) out << ',';
      out << detail::format_double(table.columns[c][i]);
    }
    out << '\n';
  }
}

inline void write_dataset_csv(const Dataset& data, std::ostream& out) {
  write_csv(to_table(data), out);
}

}  // namespace fusedml
