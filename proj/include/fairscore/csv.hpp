#pragma once

#include <string>
#include <vector>

namespace fairscore {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, -1 when absent.
  int column(const std::string& name) const;
};

CsvTable csv_read(const std::string& path);
CsvTable csv_parse(const std::string& text);

// RFC-4180 quoting: fields containing comma, quote or newline are quoted.
std::string csv_escape(const std::string& field);
void csv_write(const std::string& path, const CsvTable& table);

}  // namespace fairscore
