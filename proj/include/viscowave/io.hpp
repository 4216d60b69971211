#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "viscowave/decay.hpp"
#include "viscowave/energy.hpp"

namespace viscowave {

/// Shortest round-trip text form ("%.17g").
std::string format_double(double x);

/// Column contract of trace.csv, in order.
const std::vector<std::string>& trace_columns();

void write_trace_csv(std::ostream& out, const EnergyTrace& trace);

/// Reads a trace written by write_trace_csv (extra columns ignored; t and E
/// required). Throws ConfigError naming the offending row or column.
std::vector<EnergySample> read_trace_csv(const std::filesystem::path& path);

DecaySeries to_series(const std::vector<EnergySample>& samples);

/// Parses a JSON file; errors name the path and the line.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Output directory populated under a temporary sibling and renamed into
/// place on commit(); an unfinished staging directory is removed.
class StagedDirectory {
 public:
  explicit StagedDirectory(std::filesystem::path target);
  ~StagedDirectory();
  StagedDirectory(const StagedDirectory&) = delete;
  StagedDirectory& operator=(const StagedDirectory&) = delete;

  const std::filesystem::path& path() const { return staging_; }
  const std::filesystem::path& target() const { return target_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

}  // namespace viscowave
