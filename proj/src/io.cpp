#include "viscowave/io.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "viscowave/errors.hpp"

namespace viscowave {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> columns{"t",  "E",  "bbE",         "Lambda", "f_circ_grad", "mu",
                                                "dissipation_residual", "F3", "source_term", "l2_u", "l2_ut"};
  return columns;
}

void write_trace_csv(std::ostream& out, const EnergyTrace& trace) {
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\r\n";
  for (const auto& s : trace.samples) {
    const double row[] = {s.t, s.E, s.bbE, s.Lambda, s.f_circ_grad, s.mu, s.dissipation_residual,
                          s.F3, s.source_term, s.l2_u, s.l2_ut};
    for (std::size_t i = 0; i < std::size(row); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\r\n";
  }
}

namespace {

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, bool* ok) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  *ok = ec == std::errc() && ptr == end && begin != end;
  if (!*ok) {
    // from_chars rejects "inf"/"nan" spellings printed by printf
    std::string trimmed(begin, end);
    if (trimmed == "inf" || trimmed == "-inf" || trimmed == "nan" || trimmed == "-nan") {
      *ok = true;
      return std::strtod(trimmed.c_str(), nullptr);
    }
  }
  return value;
}

}  // namespace

std::vector<EnergySample> read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace file '" + path.string() + "' is empty");
  const auto header = split_csv_line(line);
  auto index_of = [&](const std::string& name) -> long {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    return -1;
  };
  const auto& cols = trace_columns();
  std::vector<long> index(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) index[c] = index_of(cols[c]);
  if (index[0] < 0 || index[1] < 0)
    throw ConfigError("trace file '" + path.string() + "': missing column '" + (index[0] < 0 ? "t" : "E") + "'");

  std::vector<EnergySample> samples;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "trace file '" << path.string() << "', row " << row << ": expected " << header.size()
          << " fields, got " << fields.size();
      throw ConfigError(msg.str());
    }
    double values[11] = {};
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (index[c] < 0) continue;
      bool ok = false;
      values[c] = parse_number(fields[static_cast<std::size_t>(index[c])], &ok);
      if (!ok) {
        std::ostringstream msg;
        msg << "trace file '" << path.string() << "', row " << row << ": column '" << cols[c]
            << "' is not a number";
        throw ConfigError(msg.str());
      }
    }
    EnergySample s;
    s.t = values[0];
    s.E = values[1];
    s.bbE = values[2];
    s.Lambda = values[3];
    s.f_circ_grad = values[4];
    s.mu = values[5];
    s.dissipation_residual = values[6];
    s.F3 = values[7];
    s.source_term = values[8];
    s.l2_u = values[9];
    s.l2_ut = values[10];
    samples.push_back(s);
  }
  if (samples.empty()) throw ConfigError("trace file '" + path.string() + "' has no data rows");
  return samples;
}

DecaySeries to_series(const std::vector<EnergySample>& samples) {
  DecaySeries s;
  for (const auto& x : samples) {
    s.t.push_back(x.t);
    s.E.push_back(x.E);
  }
  return s;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    std::ostringstream msg;
    msg << "'" << path.string() << "', line " << line << ": malformed JSON (" << e.what() << ")";
    throw ConfigError(msg.str());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

StagedDirectory::StagedDirectory(fs::path target) : target_(std::move(target)) {
  static std::atomic<unsigned> counter{0};
  const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
  fs::create_directories(parent);
  std::ostringstream name;
  name << "." << target_.filename().string() << ".staging-" << ::getpid() << "-" << counter++;
  staging_ = parent / name.str();
  fs::remove_all(staging_);
  fs::create_directory(staging_);
}

StagedDirectory::~StagedDirectory() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void StagedDirectory::commit() {
  if (fs::exists(target_)) fs::remove_all(target_);
  fs::rename(staging_, target_);
  committed_ = true;
}

}  // namespace viscowave
