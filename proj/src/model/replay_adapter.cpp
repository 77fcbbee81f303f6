#include "pathagent/model/replay_adapter.hpp"

#include <fstream>

#include <json.hpp>

namespace pathagent::model {

std::string fill_placeholders(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{{" + key + "}}";
    for (auto pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + value.size())) {
      text.replace(pos, token.size(), value);
    }
  }
  return text;
}

ReplayAdapter::ReplayAdapter(std::vector<StepOutput> steps,
                             std::map<std::string, std::string> substitutions)
    : steps_(std::move(steps)), substitutions_(std::move(substitutions)) {}

ReplayAdapter ReplayAdapter::from_file(const std::filesystem::path& fixture,
                                       std::map<std::string, std::string> substitutions) {
  std::ifstream in(fixture);
  if (!in) throw TransportError("cannot open replay fixture: " + fixture.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("bad replay fixture " + fixture.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw TransportError("replay fixture must be a JSON array: " + fixture.string());
  std::vector<StepOutput> steps;
  for (const auto& rec : doc) {
    StepOutput s;
    s.thought = rec.value("thought", "");
    s.code = rec.value("code", "");
    s.raw = rec.dump();
    steps.push_back(std::move(s));
  }
  return ReplayAdapter(std::move(steps), std::move(substitutions));
}

StepOutput ReplayAdapter::complete_step(const Transcript&) {
  if (cursor_ >= steps_.size()) throw TransportError("replay exhausted");
  StepOutput out = steps_[cursor_++];
  out.code = fill_placeholders(std::move(out.code), substitutions_);
  out.thought = fill_placeholders(std::move(out.thought), substitutions_);
  return out;
}

}  // namespace pathagent::model
