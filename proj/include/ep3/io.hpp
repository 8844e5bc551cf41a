#pragma once

// CSV, SVG and JSON persistence plus run-configuration ingestion.

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ep3/fit.hpp"

namespace ep3 {

inline constexpr int kCsvSchemaVersion = 1;

enum class Units { Angular, Cyclic };

const char* to_string(Units u);
Units parse_units(const std::string& s);
/// Factor applied to rate-valued inputs at ingest (2 pi for cyclic).
double rate_factor(Units u);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_number(double x);

/// RFC-4180 CSV with a leading versioned schema comment line:
///   # ep3 <schema> v<version> units=<units>
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema, Units units,
            const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(const std::string& s);
  void end_row();
  void close();

 private:
  std::filesystem::path path_;
  std::FILE* f_{nullptr};
  std::size_t n_columns_;
  std::size_t in_row_{0};
  void put(const std::string& s);
};

/// Splits one CSV record (quoted fields allowed, no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line, long line_number);

/// Observation CSV: columns time, P_g, P_e, P_f and optional sigma, in any
/// order. '#' lines are comments.
ObservationSet read_observations(const std::filesystem::path& path);
void write_observations(const std::filesystem::path& path, const ObservationSet& obs, Units units);

nlohmann::ordered_json fit_result_json(const FitResult& r, Units units);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Minimal SVG plot surface mapping data coordinates onto a fixed frame.
class SvgPlot {
 public:
  SvgPlot(double x_lo, double x_hi, double y_lo, double y_hi, int width = 640, int height = 480);

  void title(const std::string& t);
  void axis_labels(const std::string& x, const std::string& y);
  /// Filled rectangle in data coordinates.
  void cell(double x0, double x1, double y0, double y1, const std::string& color);
  void polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                double width = 1.5, const std::string& css_class = {});
  void marker(double x, double y, const std::string& color, const std::string& css_class, double radius = 5);
  void text(double x, double y, const std::string& t, const std::string& color = "#000");
  void legend(const std::vector<std::pair<std::string, std::string>>& entries);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  double x_lo_, x_hi_, y_lo_, y_hi_;
  int width_, height_;
  std::string title_, x_label_, y_label_;
  std::vector<std::string> body_;
  std::vector<std::pair<std::string, std::string>> legend_;
  double px(double x) const;
  double py(double y) const;
};

/// Colour for a value in [0, 1] on a sequential ramp.
std::string ramp_color(double v);

/// Run configuration: defaults per command, overridden by a JSON file and
/// then by key=value flags. Unknown keys are rejected.
class RunConfig {
 public:
  RunConfig(std::string command, nlohmann::ordered_json defaults, std::vector<std::string> rate_keys);

  void merge_file(const std::filesystem::path& path);
  void merge_json(const nlohmann::ordered_json& j, const std::string& origin);
  void set(const std::string& assignment);

  /// Applies the units flag to rate keys; call once, after all merges.
  void finalize();

  const nlohmann::ordered_json& values() const { return values_; }
  const std::string& command() const { return command_; }
  Units units() const { return units_; }

  /// Present and not null.
  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::string string(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

 private:
  std::string command_;
  nlohmann::ordered_json values_;
  nlohmann::ordered_json defaults_;  // type reference for validation
  std::vector<std::string> rate_keys_;
  Units units_{Units::Angular};
  bool finalized_{false};
  void assign(const std::string& key, const nlohmann::ordered_json& v, const std::string& origin);
};

}  // namespace ep3
