#include "wrcal/report.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wrcal/errors.hpp"

namespace wrcal {
namespace {

using nlohmann::ordered_json;

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::string quoted(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_number) {
  std::vector<std::string> fields(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (in_quotes) throw DataError("line " + std::to_string(line_number) + ": unterminated quote");
  return fields;
}

std::optional<double> parse_optional(const std::string& text, std::size_t line) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return v;
}

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> optional_from_json(const ordered_json& record, const char* key) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw DataError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string file_stem(const std::string& text) {
  std::string out;
  for (char c : text) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '.';
    out += keep ? c : '_';
  }
  return out;
}

}  // namespace

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

std::string extension(ReportFormat format) {
  return format == ReportFormat::kCsv ? ".csv" : ".json";
}

void write_rows_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << quoted(r.pair) << ',' << quoted(r.method) << ',' << quoted(r.prior) << ','
        << quoted(r.rep) << ',' << number(r.p) << ',' << number(r.k) << ',' << number(r.p_mean)
        << ',' << number(r.p_mode) << ',' << number(r.err_mean) << ',' << number(r.err_mode)
        << ',' << number(r.rejected_frac) << ',' << number(r.oor_frac) << ',' << number(r.rhat)
        << '\n';
  }
}

void write_rows_json(std::ostream& out, std::span<const ReportRow> rows) {
  ordered_json array = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json record;
    record["pair"] = r.pair;
    record["method"] = r.method;
    record["prior"] = r.prior;
    record["rep"] = r.rep;
    record["p"] = optional_json(r.p);
    record["k"] = r.k;
    record["p_mean"] = optional_json(r.p_mean);
    record["p_mode"] = optional_json(r.p_mode);
    record["err_mean"] = optional_json(r.err_mean);
    record["err_mode"] = optional_json(r.err_mode);
    record["rejected_frac"] = optional_json(r.rejected_frac);
    record["oor_frac"] = optional_json(r.oor_frac);
    record["rhat"] = optional_json(r.rhat);
    array.push_back(std::move(record));
  }
  out << array.dump(2) << '\n';
}

std::vector<ReportRow> read_rows_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty report");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw DataError("unexpected report header: " + line);
  std::vector<ReportRow> rows;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line, line_number);
    if (f.size() != 13) {
      throw DataError("line " + std::to_string(line_number) + ": expected 13 fields, got " +
                      std::to_string(f.size()));
    }
    ReportRow r;
    r.pair = f[0];
    r.method = f[1];
    r.prior = f[2];
    r.rep = f[3];
    r.p = parse_optional(f[4], line_number);
    const auto k = parse_optional(f[5], line_number);
    if (!k) throw DataError("line " + std::to_string(line_number) + ": k is required");
    r.k = *k;
    r.p_mean = parse_optional(f[6], line_number);
    r.p_mode = parse_optional(f[7], line_number);
    r.err_mean = parse_optional(f[8], line_number);
    r.err_mode = parse_optional(f[9], line_number);
    r.rejected_frac = parse_optional(f[10], line_number);
    r.oor_frac = parse_optional(f[11], line_number);
    r.rhat = parse_optional(f[12], line_number);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ReportRow> read_rows_json(std::istream& in) {
  ordered_json array;
  try {
    array = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw DataError(e.what());
  }
  if (!array.is_array()) throw DataError("report must be a JSON array");
  std::vector<ReportRow> rows;
  try {
    for (const auto& record : array) {
      ReportRow r;
      r.pair = record.at("pair").get<std::string>();
      r.method = record.at("method").get<std::string>();
      r.prior = record.at("prior").get<std::string>();
      r.rep = record.at("rep").get<std::string>();
      r.p = optional_from_json(record, "p");
      r.k = record.at("k").get<double>();
      r.p_mean = optional_from_json(record, "p_mean");
      r.p_mode = optional_from_json(record, "p_mode");
      r.err_mean = optional_from_json(record, "err_mean");
      r.err_mode = optional_from_json(record, "err_mode");
      r.rejected_frac = optional_from_json(record, "rejected_frac");
      r.oor_frac = optional_from_json(record, "oor_frac");
      r.rhat = optional_from_json(record, "rhat");
      rows.push_back(std::move(r));
    }
  } catch (const ordered_json::exception& e) {
    throw DataError(e.what());
  }
  return rows;
}

std::vector<ReportRow> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return path.extension() == ".json" ? read_rows_json(in) : read_rows_csv(in);
}

void write_density_csv(std::ostream& out, const DensityCurve& curve) {
  out << "p,density\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << number(curve.grid[i]) << ',' << number(curve.density[i]) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells) {
  out << "ratio,method,count,err_mean_avg,err_mean_var,err_mode_avg,err_mode_var,rhat_max\n";
  for (const auto& c : cells) {
    out << number(c.ratio) << ',' << c.method << ',' << c.count << ',' << number(c.err_mean_avg)
        << ',' << number(c.err_mean_var) << ',' << number(c.err_mode_avg) << ','
        << number(c.err_mode_var) << ',' << number(c.rhat_max) << '\n';
  }
}

void write_manifest(std::ostream& out, const Manifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["repetition_seeds"] = "seed + repetition index";
  j["repetitions"] = m.repetitions;
  j["datasets"] = m.datasets;
  j["baseline"] = m.baseline;
  j["prior"] = m.prior;
  j["methods"] = m.methods;
  j["pair_averaging"] = "unweighted mean over pairs";
  j["gibbs"] = {{"chains", m.gibbs.n_chains},
                {"tune", m.gibbs.tune},
                {"keep", m.gibbs.keep},
                {"thin", m.gibbs.thin}};
  j["bwrs"] = {{"samples_per_evaluator", m.bwrs.samples_per_evaluator},
               {"degeneracy_guard", m.bwrs.degeneracy_guard},
               {"clip_estimate", m.bwrs.clip_estimate},
               {"min_sign_confidence", m.bwrs.min_sign_confidence},
               {"mode_grid", m.bwrs.mode_grid}};
  j["ood_references"] = m.ood_references;
  out << j.dump(2) << '\n';
}

void write_rows(const std::filesystem::path& path, std::span<const ReportRow> rows,
                ReportFormat format) {
  auto out = open_for_write(path);
  if (format == ReportFormat::kCsv) {
    write_rows_csv(out, rows);
  } else {
    write_rows_json(out, rows);
  }
  finish(out, path);
}

void emit_report(const RunResult& result, const std::filesystem::path& dir,
                 ReportFormat format, const Manifest& manifest) {
  if (result.rows.empty()) throw std::invalid_argument("no rows to report");
  std::error_code ec;
  std::filesystem::create_directories(dir / "density", ec);
  if (ec) throw std::runtime_error("cannot create " + (dir / "density").string() + ": " + ec.message());

  const auto ext = extension(format);
  write_rows(dir / ("rows" + ext), result.rows, format);
  write_rows(dir / ("summary" + ext), result.summary, format);
  write_rows(dir / ("pairs" + ext), pair_average(result.summary), format);
  for (const auto& d : result.densities) {
    const auto path = dir / "density" / (file_stem(d.pair) + "__" + d.method + ".csv");
    auto out = open_for_write(path);
    write_density_csv(out, d.curve);
    finish(out, path);
  }
  const auto path = dir / "manifest.json";
  auto out = open_for_write(path);
  write_manifest(out, manifest);
  finish(out, path);
}

}  // namespace wrcal
