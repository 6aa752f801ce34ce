#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ppca/linalg.hpp"

namespace ppca {

struct CsvTable {
  Matrix values;
  std::vector<std::string> header;  // empty when the file had none
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Numeric CSV reader. A first row containing any non-numeric field is taken
/// as a header. Errors name the file and 1-based line (InvalidInput).
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Writes values with an optional header row, using format_double().
void write_csv(const std::filesystem::path& path, const Matrix& values,
               const std::vector<std::string>& header = {});
std::string to_csv(const Matrix& values, const std::vector<std::string>& header = {});

/// "prefix1", "prefix2", ...
std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n);

}  // namespace ppca
