#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "manikde/common.hpp"

namespace manikde {

inline constexpr const char* kVersion = "0.1.0";

/// Resolved configuration of one CLI run. Serialized as a '#' comment header
/// at the top of every output file; the data section (non-'#' lines) is
/// byte-identical across reruns of the same manifest at any worker count.
struct RunManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;  // resolved, in fixed order
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double duration_seconds = 0.0;
  std::vector<std::string> outputs;

  std::string to_json() const {
    std::string s = "{\"subcommand\":\"" + subcommand + "\",\"version\":\"" + version + "\"";
    s += ",\"seed\":" + std::to_string(seed);
    s += ",\"config\":{";
    for (std::size_t i = 0; i < config.size(); ++i) {
      if (i) s += ",";
      s += "\"" + config[i].first + "\":\"" + config[i].second + "\"";
    }
    s += "},\"duration_seconds\":" + fmt17(duration_seconds);
    s += ",\"outputs\":[";
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (i) s += ",";
      s += "\"" + outputs[i] + "\"";
    }
    s += "]}";
    return s;
  }
};

/// Comma-separated values, '#'-prefixed header comments, LF endings, numbers
/// at 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw config_error("cannot open output file '" + path + "'");
  }

  void manifest(const RunManifest& m) { out_ << "# manifest: " << m.to_json() << "\n"; }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void columns(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt17(values[i]);
    out_ << "\n";
  }

  void row_mixed(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

/// Data section of a CSV file: the non-comment lines, concatenated.
inline std::string csv_data_section(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read '" + path + "'");
  std::string line, data;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    data += line;
    data += '\n';
  }
  return data;
}

}  // namespace manikde
