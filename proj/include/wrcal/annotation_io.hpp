#pragma once

// Line-delimited JSON formats.
//
// Annotation record:
//   {"task_id": str, "generator_a": str, "generator_b": str,
//    "evaluator_id": str, "eval_label": 0|1, "human_label": 0|1 (optional)}
// Raw-score record:
//   {"task_id": str, "evaluator_id": str, "order": "original"|"swapped",
//    "score_first": num, "score_second": num}
// Likert record:
//   {"task_id": str, "generator": "A"|"B", "annotator_id": str, "score": num}
// Preference instance:
//   {"instance_id": str, "human_preferred_output": str,
//    "alternative_output": str, "judgments": {evaluator_id: bool}}
//   where a judgment is true when the evaluator picked the human-preferred
//   output.
//
// Unknown fields are ignored. Blank lines are skipped.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wrcal/core.hpp"

namespace wrcal {

// Builds a complete matrix; throws DataError on duplicate (task, evaluator)
// records, incomplete coverage, bad labels or a changing generator pair.
AnnotationMatrix load_annotations(std::istream& in);
AnnotationMatrix load_annotations(const std::filesystem::path& path);

// One record per (task, evaluator), task-major.
void write_annotations(std::ostream& out, const AnnotationMatrix& matrix);
void write_annotations(const std::filesystem::path& path, const AnnotationMatrix& matrix);

enum class Presentation { kOriginal, kSwapped };

struct RawScoreRecord {
  std::string task_id;
  std::string evaluator_id;
  Presentation order = Presentation::kOriginal;
  double score_first = 0.0;
  double score_second = 0.0;
};

std::vector<RawScoreRecord> load_raw_scores(std::istream& in);

enum class Side { kA, kB };

struct LikertRecord {
  std::string task_id;
  Side generator = Side::kA;
  std::string annotator_id;
  double score = 0.0;
};

std::vector<LikertRecord> load_likert(std::istream& in);

struct PreferenceInstance {
  std::string instance_id;
  std::string human_preferred_output;  // opaque reference
  std::string alternative_output;      // opaque reference
  // evaluator id -> whether it picked the human-preferred output
  std::map<std::string, bool> judgments;
};

std::vector<PreferenceInstance> load_instances(std::istream& in);

}  // namespace wrcal
