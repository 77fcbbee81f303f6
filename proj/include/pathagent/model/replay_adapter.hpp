#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pathagent/model/chat.hpp"

namespace pathagent::model {

/// Serves recorded steps in order, ignoring the transcript contents. The
/// fixture file is a JSON array of {"thought", "code"} objects.
///
/// Recorded code may use {{name}} placeholders (path_to_slide,
/// working_dir, ...) that are filled from `substitutions` at serve time, so
/// that one recording works for any output directory.
class ReplayAdapter : public ModelAdapter {
 public:
  explicit ReplayAdapter(std::vector<StepOutput> steps,
                         std::map<std::string, std::string> substitutions = {});
  static ReplayAdapter from_file(const std::filesystem::path& fixture,
                                 std::map<std::string, std::string> substitutions = {});

  StepOutput complete_step(const Transcript& transcript) override;

  std::size_t served() const { return cursor_; }
  std::size_t size() const { return steps_.size(); }

 private:
  std::vector<StepOutput> steps_;
  std::map<std::string, std::string> substitutions_;
  std::size_t cursor_ = 0;
};

/// Replaces each "{{key}}" in `text`.
std::string fill_placeholders(std::string text, const std::map<std::string, std::string>& values);

}  // namespace pathagent::model
