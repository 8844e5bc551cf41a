#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ep3/io.hpp"

namespace ep3 {

const char* to_string(Units u) { return u == Units::Cyclic ? "cyclic" : "angular"; }

Units parse_units(const std::string& s) {
  if (s == "angular") return Units::Angular;
  if (s == "cyclic") return Units::Cyclic;
  throw ValidationError("units must be 'angular' or 'cyclic', got '" + s + "'");
}

double rate_factor(Units u) { return u == Units::Cyclic ? 2 * std::numbers::pi : 1.0; }

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema, Units units,
                     const std::vector<std::string>& columns)
    : path_(path), n_columns_(columns.size()) {
  f_ = std::fopen(path.string().c_str(), "wb");
  if (!f_) throw IoError("cannot open file for writing", path.string());
  std::fprintf(f_, "# ep3 %s v%d units=%s\r\n", schema.c_str(), kCsvSchemaVersion, to_string(units));
  for (const auto& c : columns) cell(c);
  end_row();
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::put(const std::string& s) {
  if (in_row_ >= n_columns_) throw Error("too many CSV cells in a row");
  if (in_row_) std::fputc(',', f_);
  std::fputs(s.c_str(), f_);
  ++in_row_;
}

CsvWriter& CsvWriter::cell(double x) {
  put(format_number(x));
  return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
  put(std::to_string(x));
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    put(s);
  } else {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c == '\n' || c == '\r' ? ' ' : c;
    }
    put(q + "\"");
  }
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != n_columns_) throw Error("incomplete CSV row");
  std::fputs("\r\n", f_);
  in_row_ = 0;
}

void CsvWriter::close() {
  if (!f_) return;
  const bool bad = std::ferror(f_) != 0;
  const int rc = std::fclose(f_);
  f_ = nullptr;
  if (bad || rc != 0) throw IoError("error while writing file", path_.string());
}

std::vector<std::string> split_csv_line(const std::string& line, long line_number) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty() || was_quoted) throw ParseError("stray quote in CSV field", line_number);
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
      was_quoted = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", line_number);
  out.push_back(field);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& text, const std::string& column, long line) {
  const std::string t = trim(text);
  if (t.empty()) throw ParseError("empty value in column '" + column + "'", line);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseError("bad number '" + t + "' in column '" + column + "'", line);
  }
  if (used != t.size() || !std::isfinite(v)) throw ParseError("bad number '" + t + "' in column '" + column + "'", line);
  return v;
}

}  // namespace

ObservationSet read_observations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open observation file", path.string());

  const std::vector<std::string> required{"time", "P_g", "P_e", "P_f"};
  std::map<std::string, std::size_t> index;
  std::size_t n_fields = 0;
  bool have_header = false;
  ObservationSet obs;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto fields = split_csv_line(line, number);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) index[trim(fields[i])] = i;
      for (const auto& c : required)
        if (!index.count(c)) throw ParseError("missing column '" + c + "'", number);
      n_fields = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_fields)
      throw ParseError("expected " + std::to_string(n_fields) + " fields, found " + std::to_string(fields.size()),
                       number);
    const auto get = [&](const std::string& c) { return parse_cell(fields[index.at(c)], c, number); };
    obs.times.push_back(get("time"));
    obs.observed.push_back({get("P_g"), get("P_e"), get("P_f")});
    obs.sigma.push_back(index.count("sigma") ? get("sigma") : 1.0);
    if (!(obs.sigma.back() > 0)) throw ParseError("sigma must be positive", number);
    for (double v : obs.observed.back())
      if (v < 0 || v > 1) throw ParseError("population outside [0, 1]", number);
    if (obs.times.size() > 1 && obs.times.back() <= obs.times[obs.times.size() - 2])
      throw ParseError("times must be strictly increasing", number);
  }
  if (!have_header) throw ParseError("observation file has no header row", number);
  return obs;
}

void write_observations(const std::filesystem::path& path, const ObservationSet& obs, Units units) {
  CsvWriter w(path, "observations", units, {"time", "P_g", "P_e", "P_f", "sigma"});
  for (std::size_t k = 0; k < obs.size(); ++k) {
    w.cell(obs.times[k]).cell(obs.observed[k][0]).cell(obs.observed[k][1]).cell(obs.observed[k][2]);
    w.cell(obs.sigma[k]);
    w.end_row();
  }
  w.close();
}

nlohmann::ordered_json fit_result_json(const FitResult& r, Units units) {
  const auto num = [](double x) -> nlohmann::ordered_json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  };
  nlohmann::ordered_json j;
  j["schema"] = "ep3 fit-result v" + std::to_string(kCsvSchemaVersion);
  j["units"] = to_string(units);
  j["params"] = {{"delta_ef", r.params(0)}, {"omega", r.params(1)}, {"g", r.params(2)}};
  j["kappa_fixed"] = r.kappa_fixed;
  j["residual_rms"] = r.residual_rms;
  j["initial_rms"] = r.initial_rms;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["jacobian_condition"] = num(r.jacobian_condition);
  j["ill_posed"] = r.ill_posed;
  j["sign_canonicalised"] = r.sign_canonicalised;
  nlohmann::ordered_json warnings = nlohmann::ordered_json::array();
  if (r.ill_posed) warnings.push_back("ill-posed fit: Jacobian condition exceeds 1e12");
  if (!r.converged) warnings.push_back("fit did not converge; best-so-far parameters reported");
  j["warnings"] = warnings;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing", path.string());
  out << text;
  out.close();
  if (!out) throw IoError("error while writing file", path.string());
}

}  // namespace ep3
