#include "tomograph/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tomograph {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& values, const std::vector<double>* index_column) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  if (!header.empty()) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out << ',';
      out << header[i];
    }
    out << '\n';
  }
  for (long r = 0; r < values.rows(); ++r) {
    if (index_column) out << format_value((*index_column)[r]) << ',';
    for (long c = 0; c < values.cols(); ++c) {
      if (c) out << ',';
      out << format_value(values(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path, bool has_header,
                  bool allow_empty_fields) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  CsvTable table;
  std::string line;
  long lineno = 0;
  std::vector<std::vector<double>> rows;
  size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && in.eof()) break;
    const auto fields = split_csv_line(line);
    if (lineno == 1 && has_header) {
      table.header = fields;
      width = fields.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw ParseError(path, lineno,
                       "expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    std::vector<bool> empty_row(fields.size(), false);
    for (size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].empty()) {
        if (!allow_empty_fields)
          throw ParseError(path, lineno, "empty field in column " + std::to_string(i + 1));
        row[i] = 0.0;
        empty_row[i] = true;
        continue;
      }
      size_t pos = 0;
      try {
        row[i] = std::stod(fields[i], &pos);
      } catch (const std::exception&) {
        throw ParseError(path, lineno, "not a number: '" + fields[i] + "'");
      }
      if (pos != fields[i].size())
        throw ParseError(path, lineno, "trailing junk in field: '" + fields[i] + "'");
    }
    rows.push_back(std::move(row));
    table.empties.push_back(std::move(empty_row));
  }
  table.values.resize(static_cast<long>(rows.size()), static_cast<long>(width));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < width; ++c) table.values(r, c) = rows[r][c];
  return table;
}

Matrix read_whitespace_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  long lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      size_t pos = 0;
      try {
        row.push_back(std::stod(tok, &pos));
      } catch (const std::exception&) {
        throw ParseError(path, lineno, "not a number: '" + tok + "'");
      }
      if (pos != tok.size()) throw ParseError(path, lineno, "trailing junk: '" + tok + "'");
    }
    if (row.empty()) continue;  // blank lines are tolerated
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path, lineno, "ragged row: expected " +
                                         std::to_string(rows.front().size()) + " fields, got " +
                                         std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, lineno, "empty matrix file");
  Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows.front().size(); ++c) m(r, c) = rows[r][c];
  return m;
}

}  // namespace tomograph
