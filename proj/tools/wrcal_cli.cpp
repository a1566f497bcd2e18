// wrcal: calibrated win-rate estimation from judge annotations.
//
//   wrcal ingest     raw scores (+ Likert human scores) -> annotation JSONL
//   wrcal simulate   synthetic | attribution datasets
//   wrcal estimate   one run over a set of pair datasets
//   wrcal sweep      in-distribution prior-ratio sweep
//   wrcal report     re-render saved rows
//
// Exit status: 0 on success, 2 on configuration errors, 1 otherwise.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wrcal/annotation_io.hpp"
#include "wrcal/errors.hpp"
#include "wrcal/harness.hpp"
#include "wrcal/pipeline.hpp"
#include "wrcal/report.hpp"

namespace fs = std::filesystem;
using namespace wrcal;

namespace {

struct CommonOptions {
  std::vector<std::string> methods{"observed", "bwrs", "bayds"};
  std::string prior = "none";
  std::uint64_t seed = 0;
  std::size_t reps = 10;
  std::size_t chains = 4;
  std::size_t tune = 2000;
  std::size_t keep = 2000;
  std::size_t bwrs_n = 10000;
  std::string out;
  std::string format = "csv";
  std::string baseline;
  std::vector<std::string> datasets;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("datasets", o.datasets, "Annotation JSONL files, one per generator pair")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--baseline", o.baseline,
                  "Generator whose win rate is estimated (default: generator_a of each file)");
  cmd->add_option("--method", o.methods, "observed, bwrs, bayds (comma separated)")
      ->delimiter(',');
  cmd->add_option("--prior", o.prior, "none | indist:<ratio> | ood | ood:<path>");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--reps", o.reps, "Repetitions");
  cmd->add_option("--chains", o.chains, "Gibbs chains");
  cmd->add_option("--tune", o.tune, "Gibbs burn-in scans per chain");
  cmd->add_option("--keep", o.keep, "Gibbs draws kept per chain");
  cmd->add_option("--bwrs-n", o.bwrs_n, "BWRS draws per evaluator");
  cmd->add_option("--format", o.format, "csv | json");
}

std::vector<AnnotationMatrix> load_pool(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw ConfigError("OOD reference path not found: " + path.string());
  }
  if (files.empty()) throw ConfigError("no .jsonl files under " + path.string());
  std::vector<AnnotationMatrix> pool;
  for (const auto& f : files) pool.push_back(load_annotations(f));
  return pool;
}

RunSpec make_spec(const CommonOptions& o) {
  RunSpec spec;
  for (const auto& path : o.datasets) spec.datasets.push_back(load_annotations(fs::path(path)));
  spec.baseline = o.baseline;
  spec.methods.clear();
  for (const auto& m : o.methods) spec.methods.push_back(parse_method(m));
  if (o.prior.starts_with("ood:")) {
    spec.prior.kind = PriorSetting::Kind::kOod;
    spec.prior.ood_pool = load_pool(o.prior.substr(4));
  } else {
    spec.prior = parse_prior_kind(o.prior);
  }
  spec.repetitions = o.reps;
  spec.seed = o.seed;
  spec.gibbs.n_chains = o.chains;
  spec.gibbs.tune = o.tune;
  spec.gibbs.keep = o.keep;
  spec.bwrs.samples_per_evaluator = o.bwrs_n;
  return spec;
}

Manifest make_manifest(const std::string& command, const CommonOptions& o, const RunSpec& spec) {
  Manifest m;
  m.command = command;
  m.seed = o.seed;
  m.repetitions = o.reps;
  m.datasets = o.datasets;
  m.baseline = o.baseline;
  m.prior = o.prior;
  m.methods = o.methods;
  m.gibbs = spec.gibbs;
  m.bwrs = spec.bwrs;
  return m;
}

void write_text(const fs::path& path, const auto& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<AccuracyPair> parse_accuracies(const std::vector<std::string>& specs) {
  std::vector<AccuracyPair> out;
  for (const auto& s : specs) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("accuracy must be q0,q1: '" + s + "'");
    AccuracyPair acc;
    try {
      acc.q0 = std::stod(s.substr(0, comma));
      acc.q1 = std::stod(s.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw ConfigError("accuracy must be q0,q1: '" + s + "'");
    }
    if (!(acc.q0 >= 0 && acc.q0 <= 1 && acc.q1 >= 0 && acc.q1 <= 1)) {
      throw ConfigError("accuracies must lie in [0, 1]: '" + s + "'");
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrated win-rate estimation from judge annotations"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // ingest
  std::string scores_path, likert_path, ingest_out, gen_a = "A", gen_b = "B";
  std::uint64_t ingest_seed = 0;
  auto* ingest = app.add_subcommand("ingest", "Raw judge scores (+ Likert human scores) to annotations");
  ingest->add_option("--scores", scores_path, "Raw score JSONL")->required()->check(CLI::ExistingFile);
  ingest->add_option("--likert", likert_path, "Human Likert JSONL")->check(CLI::ExistingFile);
  ingest->add_option("--generator-a", gen_a);
  ingest->add_option("--generator-b", gen_b);
  ingest->add_option("--seed", ingest_seed, "Seed for tie breaks");
  ingest->add_option("--out", ingest_out, "Annotation JSONL to write")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Synthetic or attribution datasets");
  simulate->require_subcommand(1);
  double synth_p = 0.5;
  std::vector<std::string> synth_acc;
  std::size_t synth_n = 1000;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* synthetic = simulate->add_subcommand("synthetic", "Labels from known p and accuracies");
  synthetic->add_option("--p", synth_p, "True win rate of A")->required()->check(CLI::Range(0.0, 1.0));
  synthetic->add_option("--acc", synth_acc, "q0,q1 of one evaluator (repeatable)")->required();
  synthetic->add_option("--n", synth_n, "Tasks")->check(CLI::PositiveNumber);
  synthetic->add_option("--seed", sim_seed);
  synthetic->add_option("--generator-a", gen_a);
  synthetic->add_option("--generator-b", gen_b);
  synthetic->add_option("--out", sim_out)->required();

  std::string instances_path;
  double attr_ratio = 0.5;
  auto* attribution = simulate->add_subcommand("attribution", "Assign preferred outputs to A at a ratio");
  attribution->add_option("--instances", instances_path)->required()->check(CLI::ExistingFile);
  attribution->add_option("--ratio", attr_ratio, "Share of instances won by A")->required();
  attribution->add_option("--seed", sim_seed);
  attribution->add_option("--generator-a", gen_a);
  attribution->add_option("--generator-b", gen_b);
  attribution->add_option("--out", sim_out)->required();

  // estimate
  CommonOptions est;
  est.out = "report";
  auto* estimate = app.add_subcommand("estimate", "Estimate win rates for each dataset");
  add_common(estimate, est);
  estimate->add_option("--out", est.out, "Output directory");

  // sweep
  CommonOptions sw;
  sw.methods = {"bwrs", "bayds"};
  sw.out = "sweep";
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  auto* sweep = app.add_subcommand("sweep", "In-distribution prior-ratio sweep");
  add_common(sweep, sw);
  sweep->add_option("--ratios", ratios, "Prior data ratios (comma separated)")->delimiter(',');
  sweep->add_option("--out", sw.out, "Output directory");

  // report
  std::string report_in, report_out, report_format = "csv";
  auto* report = app.add_subcommand("report", "Re-render saved rows");
  report->add_option("input", report_in, "rows.csv or rows.json")->required()->check(CLI::ExistingFile);
  report->add_option("--format", report_format, "csv | json");
  report->add_option("--out", report_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      std::ifstream scores(scores_path);
      const auto raw = load_raw_scores(scores);
      ObservedLabels human;
      if (!likert_path.empty()) {
        std::ifstream likert(likert_path);
        human = aggregate_human_labels(load_likert(likert), derive_seed(ingest_seed, 1));
      }
      const auto matrix = judgments_from_raw_scores(raw, gen_a, gen_b, ingest_seed, human);
      write_text(ingest_out, [&](std::ostream& out) { write_annotations(out, matrix); });
    } else if (*synthetic) {
      const auto acc = parse_accuracies(synth_acc);
      const auto matrix = synth_annotations(synth_p, acc, synth_n, sim_seed, gen_a, gen_b);
      write_text(sim_out, [&](std::ostream& out) { write_annotations(out, matrix); });
    } else if (*attribution) {
      std::ifstream in(instances_path);
      const auto instances = load_instances(in);
      const auto matrix = simulate_attribution(instances, attr_ratio, sim_seed, gen_a, gen_b);
      write_text(sim_out, [&](std::ostream& out) { write_annotations(out, matrix); });
    } else if (*estimate) {
      const auto format = parse_format(est.format);
      const auto spec = make_spec(est);
      const auto result = run_one_vs_n(spec);
      auto manifest = make_manifest("estimate", est, spec);
      manifest.ood_references = result.ood_references;
      emit_report(result, est.out, format, manifest);
      write_rows_csv(std::cout, pair_average(result.summary));
    } else if (*sweep) {
      auto spec = make_spec(sw);
      const auto cells = sweep_prior_ratio(spec, ratios, sw.reps);
      fs::create_directories(sw.out);
      write_text(fs::path(sw.out) / "sweep.csv",
                 [&](std::ostream& out) { write_sweep_csv(out, cells); });
      auto manifest = make_manifest("sweep", sw, spec);
      write_text(fs::path(sw.out) / "manifest.json",
                 [&](std::ostream& out) { write_manifest(out, manifest); });
      write_sweep_csv(std::cout, cells);
    } else if (*report) {
      const auto format = parse_format(report_format);
      const auto rows = read_rows(report_in);
      if (report_out.empty()) {
        if (format == ReportFormat::kCsv) {
          write_rows_csv(std::cout, rows);
        } else {
          write_rows_json(std::cout, rows);
        }
      } else {
        write_rows(report_out, rows, format);
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "wrcal: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "wrcal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
