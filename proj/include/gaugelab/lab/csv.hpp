#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "gaugelab/core/errors.hpp"

namespace gaugelab {

/// Comma-separated output with round-trip precision for doubles.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path), width_(header.size()) {
    if (!os_) throw IoError("CsvWriter: cannot open " + path.string());
    os_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }

  template <class... T>
  void row(const T&... values) {
    if (sizeof...(T) != width_) throw InvalidInput("CsvWriter: row width does not match the header");
    std::size_t i = 0;
    ((os_ << (i++ ? "," : "") << values), ...);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
  std::size_t width_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column, or -1.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_csv: cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw IoError("read_csv: empty file " + path.string());
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw IoError("read_csv: ragged row in " + path.string());
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace gaugelab
