#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace ssatlas {

using ordered_json = nlohmann::ordered_json;

// x rounded to 15 significant digits; non-finite values pass through.
double round15(double x);

// JSON number rounded to 15 significant digits, null when not finite.
ordered_json number(double x);

// Text forms used in CSV cells.
std::string csv_value(double x);  // same digits as the JSON output, e.g. 1.0, 0.25, 1e-05
std::string csv_axis(double x);   // %.15g, e.g. 1, 0.25
std::string csv_escape(const std::string& cell);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // pre-formatted cells, short rows are padded

  std::string str() const;  // header then rows, \n line endings
};

}  // namespace ssatlas
