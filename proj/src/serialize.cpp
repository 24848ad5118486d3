#include "ssatlas/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ssatlas {

double round15(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.14e", x);
  return std::strtod(buf, nullptr);
}

ordered_json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round15(x);
}

std::string csv_value(double x) {
  if (!std::isfinite(x)) return "";
  return ordered_json(round15(x)).dump();
}

std::string csv_axis(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i > 0) out += ',';
      if (i < cells.size()) out += csv_escape(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

}  // namespace ssatlas
