#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathagent/bench/question.hpp"

namespace pathagent::bench {

/// 1 if `predicted` is within tolerance of `truth`, else 0.
///   relative_numeric(t): |p - truth| <= t * |truth|; when truth == 0,
///     |p| <= t. A 1e-12 relative slack absorbs float rounding.
///   acceptable_set: the trimmed, case-folded string is in the set.
/// Mismatched types (string vs number), booleans against numbers and nested
/// values score 0.
int compare_value(const nlohmann::json& predicted, const nlohmann::json& truth,
                  const ToleranceSpec& tol);

struct FieldScore {
  std::size_t record = 0;  // index into the truth records
  std::string field;
  int score = 0;
};

struct QuestionScore {
  std::string question_id;
  std::vector<FieldScore> field_scores;
  double score = 0;
  bool produced_valid_file = false;
  bool failed = true;
};

/// Scores parsed predictions. `prediction` is nullopt when no usable file
/// exists; a non-array counts as invalid too.
QuestionScore evaluate_records(const std::optional<nlohmann::json>& prediction,
                               const nlohmann::json& truth_records, const QuestionSpec& spec);

/// Reads and scores an answer file.
QuestionScore evaluate_answer(const std::filesystem::path& answer_path,
                              const nlohmann::json& truth_records, const QuestionSpec& spec);

}  // namespace pathagent::bench
