#include "pathagent/bench/question.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>

namespace pathagent::bench {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kKnownFields = {
    "id", "data_type", "dataset_relative_path", "slide_relative_path", "path_to_metadata",
    "question", "additional_instructions", "output_instructions", "id_column",
    "columns_to_compare_and_tolerance", "rationale", "is_pathologist_verified",
    "is_biomedical_scientist_verified", "category"};

const std::set<std::string> kPlaceholders = {"path_to_slide", "path_to_dataset", "path_to_metadata",
                                             "working_dir"};

const std::set<std::string> kCategories = {"DataQA", "CellularQA", "PatchQA", "SlideQA"};

const std::regex& placeholder_re() {
  static const std::regex re(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
  return re;
}

std::string required_string(const ordered_json& doc, const std::string& field) {
  auto it = doc.find(field);
  if (it == doc.end()) throw SchemaError(field, "missing required field");
  if (!it->is_string()) throw SchemaError(field, "must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const ordered_json& doc, const std::string& field) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(field, "must be a string or null");
  return it->get<std::string>();
}

bool required_bool(const ordered_json& doc, const std::string& field) {
  auto it = doc.find(field);
  if (it == doc.end()) throw SchemaError(field, "missing required field");
  if (!it->is_boolean()) throw SchemaError(field, "must be a boolean");
  return it->get<bool>();
}

void check_placeholders(const std::string& field, const std::string& text) {
  for (std::sregex_iterator it(text.begin(), text.end(), placeholder_re()), end; it != end; ++it) {
    if (!kPlaceholders.count((*it)[1].str())) {
      throw SchemaError(field, "unknown placeholder {" + (*it)[1].str() + "}");
    }
  }
}

}  // namespace

const char* to_string(DataType d) {
  switch (d) {
    case DataType::single_wsi: return "single_wsi";
    case DataType::multiple_wsi: return "multiple_wsi";
    case DataType::summary_of_multiple_wsi: return "summary_of_multiple_wsi";
  }
  return "?";
}

QuestionSpec parse_question(const ordered_json& doc) {
  if (!doc.is_object()) throw SchemaError("<document>", "question must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kKnownFields.count(key)) throw SchemaError(key, "unknown field");
  }
  QuestionSpec q;
  q.id = required_string(doc, "id");
  if (q.id.empty()) throw SchemaError("id", "must not be empty");

  std::string dt = required_string(doc, "data_type");
  if (dt == "single_wsi") {
    q.data_type = DataType::single_wsi;
  } else if (dt == "multiple_wsi") {
    q.data_type = DataType::multiple_wsi;
  } else if (dt == "summary_of_multiple_wsi") {
    q.data_type = DataType::summary_of_multiple_wsi;
  } else {
    throw SchemaError("data_type", "unknown value '" + dt + "'");
  }

  q.dataset_relative_path = optional_string(doc, "dataset_relative_path");
  q.slide_relative_path = optional_string(doc, "slide_relative_path");
  if (!q.dataset_relative_path && !q.slide_relative_path) {
    throw SchemaError("dataset_relative_path", "one of dataset_relative_path or slide_relative_path is required");
  }
  q.path_to_metadata = optional_string(doc, "path_to_metadata");
  q.question = required_string(doc, "question");
  q.additional_instructions = required_string(doc, "additional_instructions");
  q.output_instructions = required_string(doc, "output_instructions");
  if (!doc.contains("id_column")) throw SchemaError("id_column", "missing required field");
  q.id_column = optional_string(doc, "id_column");

  auto tol = doc.find("columns_to_compare_and_tolerance");
  if (tol == doc.end()) throw SchemaError("columns_to_compare_and_tolerance", "missing required field");
  if (!tol->is_object() || tol->empty()) {
    throw SchemaError("columns_to_compare_and_tolerance", "must be a non-empty object");
  }
  for (const auto& [field, t] : tol->items()) {
    const std::string where = "columns_to_compare_and_tolerance." + field;
    if (t.is_number() && !t.is_boolean()) {
      double v = t.get<double>();
      if (!(v > 0)) throw SchemaError(where, "relative tolerance must be > 0");
      q.columns_to_compare_and_tolerance.emplace_back(field, ToleranceSpec::relative(v));
    } else if (t.is_array()) {
      std::vector<std::string> values;
      for (const auto& e : t) {
        if (!e.is_string()) throw SchemaError(where, "acceptable values must be strings");
        values.push_back(e.get<std::string>());
      }
      if (values.empty()) throw SchemaError(where, "acceptable set must not be empty");
      q.columns_to_compare_and_tolerance.emplace_back(field, ToleranceSpec::acceptable(values));
    } else {
      throw SchemaError(where, "tolerance must be a number or a list of strings");
    }
  }

  q.rationale = optional_string(doc, "rationale").value_or("");
  q.is_pathologist_verified = required_bool(doc, "is_pathologist_verified");
  q.is_biomedical_scientist_verified = required_bool(doc, "is_biomedical_scientist_verified");
  q.category = optional_string(doc, "category").value_or("");
  if (!q.category.empty() && !kCategories.count(q.category)) {
    throw SchemaError("category", "unknown category '" + q.category + "'");
  }

  check_placeholders("question", q.question);
  check_placeholders("additional_instructions", q.additional_instructions);
  check_placeholders("output_instructions", q.output_instructions);
  return q;
}

QuestionSpec load_question(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("<file>", "cannot open " + path.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("<file>", path.string() + ": " + e.what());
  }
  return parse_question(doc);
}

std::vector<QuestionSpec> load_suite(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<QuestionSpec> out;
  std::set<std::string> ids;
  for (const auto& f : files) {
    QuestionSpec q;
    try {
      q = load_question(f);
    } catch (const SchemaError& e) {
      throw SchemaError(e.field(), f.filename().string() + ": " + e.what());
    }
    if (!ids.insert(q.id).second) throw SchemaError("id", "duplicate id '" + q.id + "'");
    out.push_back(std::move(q));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::vector<std::pair<std::string, std::string>> placeholder_values(const QuestionSpec& spec,
                                                                     const fs::path& dataset_root,
                                                                     const fs::path& working_dir) {
  const fs::path root = fs::absolute(dataset_root).lexically_normal();
  auto under_root = [&](const std::string& rel) {
    std::string p = (root / rel).lexically_normal().string();
    while (p.size() > 1 && p.back() == '/') p.pop_back();
    return p;
  };
  std::vector<std::pair<std::string, std::string>> out;
  if (spec.slide_relative_path) out.emplace_back("path_to_slide", under_root(*spec.slide_relative_path));
  if (spec.dataset_relative_path) {
    out.emplace_back("path_to_dataset", under_root(*spec.dataset_relative_path));
  }
  if (spec.path_to_metadata) out.emplace_back("path_to_metadata", under_root(*spec.path_to_metadata));
  out.emplace_back("working_dir", fs::absolute(working_dir).lexically_normal().string());
  return out;
}

std::string materialize_prompt(const QuestionSpec& spec, const fs::path& dataset_root,
                               const fs::path& working_dir) {
  const auto values = placeholder_values(spec, dataset_root, working_dir);
  auto fill = [&](const std::string& text) {
    std::string out;
    auto begin = text.cbegin();
    for (std::sregex_iterator it(text.begin(), text.end(), placeholder_re()), end; it != end; ++it) {
      const std::string name = (*it)[1].str();
      auto v = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
      out.append(begin, (*it)[0].first);
      if (v == values.end()) {
        if (kPlaceholders.count(name)) {
          throw MissingPlaceholderTarget("question " + spec.id + " uses {" + name +
                                         "} but defines no target for it");
        }
        out += (*it)[0].str();
      } else {
        out += v->second;
      }
      begin = (*it)[0].second;
    }
    out.append(begin, text.cend());
    return out;
  };
  std::string prompt = fill(spec.question);
  for (const std::string* part : {&spec.additional_instructions, &spec.output_instructions}) {
    if (!part->empty()) prompt += "\n\n" + fill(*part);
  }
  return prompt;
}

}  // namespace pathagent::bench
