#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace pathagent::bench {

struct QuestionResult {
  std::string question_id;
  std::string category;
  double score = 0;
  bool failed = true;
};

/// One entry per question in a trial.
using TrialResults = std::vector<QuestionResult>;

struct Stat {
  double mean = 0;
  /// Standard error of the mean over trials: sample standard deviation
  /// (divisor T - 1) over sqrt(T); 0 for a single trial.
  double se = 0;
  std::vector<double> per_trial;
};

struct CategoryReport {
  std::string category;
  std::size_t n_questions = 0;
  Stat score;
  Stat failure_rate;
};

struct RunReport {
  std::size_t trials = 0;
  std::size_t n_questions = 0;  // per trial
  std::vector<CategoryReport> categories;
  Stat overall_score;
  Stat overall_failure_rate;
  /// question id -> score per trial
  std::map<std::string, std::vector<double>> question_scores;
  std::map<std::string, std::vector<bool>> question_failed;
};

class InconsistentTrials : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Count-weighted mean of category values.
double weighted_overall(const std::vector<double>& category_values,
                        const std::vector<std::size_t>& counts);

Stat summarize(std::vector<double> per_trial);

/// Throws InconsistentTrials when the trials cover different question sets
/// or a question changes category.
RunReport aggregate(const std::vector<TrialResults>& trials);

/// Stable serialization: categories in DataQA, CellularQA, PatchQA, SlideQA
/// order (others after, by name), questions by id.
nlohmann::ordered_json report_to_json(const RunReport& r);

}  // namespace pathagent::bench
