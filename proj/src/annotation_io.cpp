#include "wrcal/annotation_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "wrcal/errors.hpp"

namespace wrcal {
namespace {

using nlohmann::json;

// Calls `fn(record, line_number)` for each non-blank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw DataError("line " + std::to_string(line_number) + ": not a JSON object");
    }
    try {
      fn(record, line_number);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
}

std::string required_string(const json& record, const char* key, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw DataError("line " + std::to_string(line) + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

double required_number(const json& record, const char* key, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_number()) {
    throw DataError("line " + std::to_string(line) + ": missing numeric field '" + key + "'");
  }
  const double value = it->get<double>();
  if (!std::isfinite(value)) {
    throw DataError("line " + std::to_string(line) + ": field '" + key + "' is not finite");
  }
  return value;
}

PreferenceLabel parse_label(const json& value, const char* key, std::size_t line) {
  if (!value.is_number_integer()) {
    throw DataError("line " + std::to_string(line) + ": field '" + key + "' must be 0 or 1");
  }
  try {
    return label_from_int(value.get<long long>());
  } catch (const DataError& e) {
    throw DataError("line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

AnnotationMatrix load_annotations(std::istream& in) {
  AnnotationMatrix matrix;
  std::unordered_map<std::string, std::size_t> task_index;
  std::unordered_map<std::string, std::size_t> evaluator_index;
  std::map<std::pair<std::size_t, std::size_t>, PreferenceLabel> labels;
  bool have_pair = false;

  for_each_record(in, [&](const json& record, std::size_t line) {
    const auto task_id = required_string(record, "task_id", line);
    const auto gen_a = required_string(record, "generator_a", line);
    const auto gen_b = required_string(record, "generator_b", line);
    const auto evaluator = required_string(record, "evaluator_id", line);
    const auto eval_it = record.find("eval_label");
    if (eval_it == record.end()) {
      throw DataError("line " + std::to_string(line) + ": missing field 'eval_label'");
    }
    const auto eval_label = parse_label(*eval_it, "eval_label", line);

    if (!have_pair) {
      matrix.generator_a = gen_a;
      matrix.generator_b = gen_b;
      have_pair = true;
    } else if (gen_a != matrix.generator_a || gen_b != matrix.generator_b) {
      throw DataError("line " + std::to_string(line) + ": generator pair changes within the file");
    }

    auto [t_it, new_task] = task_index.try_emplace(task_id, matrix.tasks.size());
    if (new_task) matrix.tasks.push_back({task_id, std::nullopt, {}});
    auto [e_it, new_eval] = evaluator_index.try_emplace(evaluator, matrix.evaluators.size());
    if (new_eval) matrix.evaluators.push_back(evaluator);

    if (!labels.emplace(std::pair{t_it->second, e_it->second}, eval_label).second) {
      throw DataError("line " + std::to_string(line) + ": duplicate record for task '" +
                      task_id + "' and evaluator '" + evaluator + "'");
    }

    const auto human_it = record.find("human_label");
    if (human_it != record.end() && !human_it->is_null()) {
      const auto human = parse_label(*human_it, "human_label", line);
      auto& slot = matrix.tasks[t_it->second].human_label;
      if (slot && *slot != human) {
        throw DataError("line " + std::to_string(line) + ": conflicting human labels for task '" +
                        task_id + "'");
      }
      slot = human;
    }
  });

  if (matrix.tasks.empty()) throw DataError("no annotation records");
  for (std::size_t t = 0; t < matrix.tasks.size(); ++t) {
    auto& task = matrix.tasks[t];
    task.eval_labels.reserve(matrix.evaluators.size());
    for (std::size_t e = 0; e < matrix.evaluators.size(); ++e) {
      const auto it = labels.find({t, e});
      if (it == labels.end()) {
        throw DataError("incomplete matrix: task '" + task.task_id +
                        "' has no label from evaluator '" + matrix.evaluators[e] + "'");
      }
      task.eval_labels.push_back(it->second);
    }
  }
  matrix.validate();
  return matrix;
}

AnnotationMatrix load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return load_annotations(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_annotations(std::ostream& out, const AnnotationMatrix& matrix) {
  for (const auto& task : matrix.tasks) {
    for (std::size_t e = 0; e < matrix.evaluators.size(); ++e) {
      nlohmann::ordered_json record;
      record["task_id"] = task.task_id;
      record["generator_a"] = matrix.generator_a;
      record["generator_b"] = matrix.generator_b;
      record["evaluator_id"] = matrix.evaluators[e];
      record["eval_label"] = to_int(task.eval_labels[e]);
      if (task.human_label) record["human_label"] = to_int(*task.human_label);
      out << record.dump() << '\n';
    }
  }
}

void write_annotations(const std::filesystem::path& path, const AnnotationMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_annotations(out, matrix);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<RawScoreRecord> load_raw_scores(std::istream& in) {
  std::vector<RawScoreRecord> records;
  for_each_record(in, [&](const json& record, std::size_t line) {
    RawScoreRecord r;
    r.task_id = required_string(record, "task_id", line);
    r.evaluator_id = required_string(record, "evaluator_id", line);
    const auto order = required_string(record, "order", line);
    if (order == "original") {
      r.order = Presentation::kOriginal;
    } else if (order == "swapped") {
      r.order = Presentation::kSwapped;
    } else {
      throw DataError("line " + std::to_string(line) + ": order must be 'original' or 'swapped'");
    }
    r.score_first = required_number(record, "score_first", line);
    r.score_second = required_number(record, "score_second", line);
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<LikertRecord> load_likert(std::istream& in) {
  std::vector<LikertRecord> records;
  for_each_record(in, [&](const json& record, std::size_t line) {
    LikertRecord r;
    r.task_id = required_string(record, "task_id", line);
    const auto side = required_string(record, "generator", line);
    if (side == "A") {
      r.generator = Side::kA;
    } else if (side == "B") {
      r.generator = Side::kB;
    } else {
      throw DataError("line " + std::to_string(line) + ": generator must be 'A' or 'B'");
    }
    r.annotator_id = required_string(record, "annotator_id", line);
    r.score = required_number(record, "score", line);
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<PreferenceInstance> load_instances(std::istream& in) {
  std::vector<PreferenceInstance> instances;
  for_each_record(in, [&](const json& record, std::size_t line) {
    PreferenceInstance inst;
    inst.instance_id = required_string(record, "instance_id", line);
    inst.human_preferred_output = required_string(record, "human_preferred_output", line);
    inst.alternative_output = required_string(record, "alternative_output", line);
    if (const auto it = record.find("judgments"); it != record.end()) {
      if (!it->is_object()) {
        throw DataError("line " + std::to_string(line) + ": judgments must be an object");
      }
      for (const auto& [evaluator, picked] : it->items()) {
        if (!picked.is_boolean()) {
          throw DataError("line " + std::to_string(line) + ": judgment values must be booleans");
        }
        inst.judgments[evaluator] = picked.get<bool>();
      }
    }
    instances.push_back(std::move(inst));
  });
  return instances;
}

}  // namespace wrcal
