#ifndef TOMOGRAPH_CSV_HPP
#define TOMOGRAPH_CSV_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "tomograph/netmodel.hpp"

namespace tomograph {

/// Parse failure carrying the offending file and 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::filesystem::path& path, long line, const std::string& what)
      : std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// One decimal value with 12 significant digits, the format of every CSV
/// this project writes.
std::string format_value(double v);

/// Split a CSV line on commas. Empty fields are preserved.
std::vector<std::string> split_csv_line(const std::string& line);

/// Whole-file readers/writers. `header` empty means no header row.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& values, const std::vector<double>* index_column = nullptr);

struct CsvTable {
  std::vector<std::string> header;  // empty when has_header was false
  Matrix values;
  std::vector<std::vector<bool>> empties;  // true where the field was empty
};

CsvTable read_csv(const std::filesystem::path& path, bool has_header,
                  bool allow_empty_fields = false);

/// Whitespace-separated numeric matrix (Abilene-style flat files).
Matrix read_whitespace_matrix(const std::filesystem::path& path);

}  // namespace tomograph

#endif
