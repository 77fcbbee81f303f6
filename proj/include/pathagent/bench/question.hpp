#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pathagent::bench {

struct ToleranceSpec {
  enum class Kind { relative_numeric, acceptable_set };
  Kind kind = Kind::relative_numeric;
  double threshold = 0;             // relative_numeric
  std::vector<std::string> values;  // acceptable_set, as written

  static ToleranceSpec relative(double t) { return {Kind::relative_numeric, t, {}}; }
  static ToleranceSpec acceptable(std::vector<std::string> v) {
    return {Kind::acceptable_set, 0, std::move(v)};
  }
};

enum class DataType { single_wsi, multiple_wsi, summary_of_multiple_wsi };
const char* to_string(DataType d);

struct QuestionSpec {
  std::string id;
  DataType data_type = DataType::single_wsi;
  std::optional<std::string> dataset_relative_path;
  std::optional<std::string> slide_relative_path;
  std::optional<std::string> path_to_metadata;
  std::string question;
  std::string additional_instructions;
  std::string output_instructions;
  std::optional<std::string> id_column;
  /// In file order.
  std::vector<std::pair<std::string, ToleranceSpec>> columns_to_compare_and_tolerance;
  std::string rationale;
  bool is_pathologist_verified = false;
  bool is_biomedical_scientist_verified = false;
  /// DataQA, CellularQA, PatchQA or SlideQA. Optional in the file.
  std::string category;
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class MissingPlaceholderTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

QuestionSpec parse_question(const nlohmann::ordered_json& doc);
/// Throws SchemaError (field "<file>" when the file cannot be read or parsed).
QuestionSpec load_question(const std::filesystem::path& path);

/// Every *.json directly inside `dir`, ordered by id. Throws SchemaError on
/// duplicate ids.
std::vector<QuestionSpec> load_suite(const std::filesystem::path& dir);

/// Question, additional instructions and output instructions joined by blank
/// lines, with {path_to_slide}, {path_to_dataset}, {path_to_metadata} and
/// {working_dir} replaced by absolute paths.
std::string materialize_prompt(const QuestionSpec& spec, const std::filesystem::path& dataset_root,
                               const std::filesystem::path& working_dir);

/// Absolute paths the placeholders resolve to; only those the spec defines.
std::vector<std::pair<std::string, std::string>> placeholder_values(
    const QuestionSpec& spec, const std::filesystem::path& dataset_root,
    const std::filesystem::path& working_dir);

}  // namespace pathagent::bench
