#pragma once

#include <json.hpp>

#include "vbeam/config.hpp"

namespace vbeam {

// ordered_json keeps insertion order, so identical runs serialize to
// byte-identical reports (part of the determinism contract; also the reason
// reports carry no wall-clock timings).
using json = nlohmann::ordered_json;

inline json ini_to_json(const IniMap& ini) {
  json out = json::object();
  for (const auto& [section, entries] : ini) {
    json s = json::object();
    for (const auto& [key, value] : entries) s[key] = value;
    out[section] = s;
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open file for writing: " + path);
  os << text;
  if (!os) throw ConfigError("write failed: " + path);
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

/// Two-column CSV for curves (PSF profiles, beams).
inline void write_csv_curve(const std::string& path, const std::string& xname,
                            const std::string& yname, const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("CSV curve columns differ in length");
  std::ostringstream os;
  os.precision(17);
  os << xname << "," << yname << "\n";
  for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << "," << y[i] << "\n";
  write_text_file(path, os.str());
}

/// Fixed-width text table for run summaries.
inline std::string format_table(const std::vector<std::string>& headers,
                                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
  for (const auto& row : rows) {
    if (row.size() != headers.size()) throw ConfigError("table row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << row[c] << std::string(width[c] - row[c].size(), ' ');
      os << (c + 1 < row.size() ? "  " : "");
    }
    os << "\n";
  };
  emit(headers);
  std::vector<std::string> rule(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) rule[c] = std::string(width[c], '-');
  emit(rule);
  for (const auto& row : rows) emit(row);
  return os.str();
}

}  // namespace vbeam
