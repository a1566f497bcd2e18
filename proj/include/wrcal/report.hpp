#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wrcal/harness.hpp"

namespace wrcal {

enum class ReportFormat { kCsv, kJson };

ReportFormat parse_format(const std::string& name);
std::string extension(ReportFormat format);

inline constexpr const char* kCsvHeader =
    "pair,method,prior,rep,p,k,p_mean,p_mode,err_mean,err_mode,rejected_frac,oor_frac,rhat";

// Missing values are empty CSV fields and JSON nulls. Numbers use the
// shortest representation that round-trips.
void write_rows_csv(std::ostream& out, std::span<const ReportRow> rows);
void write_rows_json(std::ostream& out, std::span<const ReportRow> rows);
std::vector<ReportRow> read_rows_csv(std::istream& in);
std::vector<ReportRow> read_rows_json(std::istream& in);
std::vector<ReportRow> read_rows(const std::filesystem::path& path);

void write_density_csv(std::ostream& out, const DensityCurve& curve);
void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells);

// Run metadata kept out of the data files: anything here may change between
// invocations without touching the rows.
struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::size_t repetitions = 0;
  std::vector<std::string> datasets;
  std::string baseline;
  std::string prior;
  std::vector<std::string> methods;
  GibbsConfig gibbs;
  BWRSConfig bwrs;
  std::map<std::string, std::string> ood_references;
};

void write_manifest(std::ostream& out, const Manifest& manifest);

// Writes rows.<ext>, summary.<ext>, pairs.<ext> (pair-averaged summary),
// density/<pair>__<method>.csv and manifest.json into `dir`, creating it if
// needed. Throws std::invalid_argument on empty rows and std::runtime_error
// when a file cannot be written.
void emit_report(const RunResult& result, const std::filesystem::path& dir,
                 ReportFormat format, const Manifest& manifest);

// Re-renders saved rows in another format.
void write_rows(const std::filesystem::path& path, std::span<const ReportRow> rows,
                ReportFormat format);

}  // namespace wrcal
