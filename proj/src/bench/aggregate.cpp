#include "pathagent/bench/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace pathagent::bench {

namespace {

const std::vector<std::string> kCategoryOrder = {"DataQA", "CellularQA", "PatchQA", "SlideQA"};

std::size_t category_rank(const std::string& c) {
  auto it = std::find(kCategoryOrder.begin(), kCategoryOrder.end(), c);
  return static_cast<std::size_t>(it - kCategoryOrder.begin());
}

nlohmann::ordered_json stat_json(const Stat& s) {
  return {{"mean", s.mean}, {"se", s.se}, {"per_trial", s.per_trial}};
}

}  // namespace

double weighted_overall(const std::vector<double>& category_values,
                        const std::vector<std::size_t>& counts) {
  if (category_values.size() != counts.size()) {
    throw std::invalid_argument("one count per category value is required");
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    num += category_values[i] * static_cast<double>(counts[i]);
    den += static_cast<double>(counts[i]);
  }
  if (den == 0) throw std::invalid_argument("total question count is zero");
  return num / den;
}

Stat summarize(std::vector<double> per_trial) {
  Stat s;
  s.per_trial = std::move(per_trial);
  const auto t = static_cast<double>(s.per_trial.size());
  if (s.per_trial.empty()) return s;
  s.mean = std::accumulate(s.per_trial.begin(), s.per_trial.end(), 0.0) / t;
  if (s.per_trial.size() > 1) {
    double ss = 0;
    for (double x : s.per_trial) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (t - 1)) / std::sqrt(t);
  }
  return s;
}

RunReport aggregate(const std::vector<TrialResults>& trials) {
  if (trials.empty()) throw InconsistentTrials("no trials");
  RunReport r;
  r.trials = trials.size();

  std::map<std::string, std::string> category_of;
  for (const auto& q : trials.front()) {
    if (q.category.empty()) throw InconsistentTrials("question " + q.question_id + " has no category");
    if (!category_of.emplace(q.question_id, q.category).second) {
      throw InconsistentTrials("question " + q.question_id + " appears twice in trial 1");
    }
  }
  for (std::size_t k = 1; k < trials.size(); ++k) {
    std::map<std::string, std::string> seen;
    for (const auto& q : trials[k]) seen.emplace(q.question_id, q.category);
    if (seen != category_of || trials[k].size() != trials.front().size()) {
      throw InconsistentTrials("trial " + std::to_string(k + 1) + " covers a different question set");
    }
  }
  r.n_questions = category_of.size();

  std::vector<std::string> cats;
  for (const auto& [_, c] : category_of) {
    if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
  }
  std::sort(cats.begin(), cats.end(), [](const std::string& a, const std::string& b) {
    auto ra = category_rank(a), rb = category_rank(b);
    return ra != rb ? ra < rb : a < b;
  });

  std::vector<double> overall_score, overall_fail;
  std::map<std::string, std::vector<double>> cat_score, cat_fail;
  for (const auto& trial : trials) {
    std::map<std::string, double> sum, fails;
    std::map<std::string, std::size_t> count;
    for (const auto& q : trial) {
      sum[q.category] += q.score;
      fails[q.category] += q.failed ? 1.0 : 0.0;
      ++count[q.category];
      r.question_scores[q.question_id].push_back(q.score);
      r.question_failed[q.question_id].push_back(q.failed);
    }
    std::vector<double> means, rates;
    std::vector<std::size_t> counts;
    for (const auto& c : cats) {
      const auto n = static_cast<double>(count[c]);
      means.push_back(sum[c] / n);
      rates.push_back(fails[c] / n);
      counts.push_back(count[c]);
      cat_score[c].push_back(means.back());
      cat_fail[c].push_back(rates.back());
    }
    overall_score.push_back(weighted_overall(means, counts));
    overall_fail.push_back(weighted_overall(rates, counts));
  }

  for (const auto& c : cats) {
    CategoryReport cr;
    cr.category = c;
    cr.n_questions = static_cast<std::size_t>(
        std::count_if(category_of.begin(), category_of.end(), [&](const auto& kv) { return kv.second == c; }));
    cr.score = summarize(cat_score[c]);
    cr.failure_rate = summarize(cat_fail[c]);
    r.categories.push_back(std::move(cr));
  }
  r.overall_score = summarize(overall_score);
  r.overall_failure_rate = summarize(overall_fail);
  return r;
}

nlohmann::ordered_json report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["trials"] = r.trials;
  j["n_questions"] = r.n_questions;
  j["question_count"] = r.n_questions * r.trials;
  j["overall_score"] = stat_json(r.overall_score);
  j["overall_failure_rate"] = stat_json(r.overall_failure_rate);
  j["categories"] = nlohmann::ordered_json::array();
  for (const auto& c : r.categories) {
    j["categories"].push_back({{"category", c.category},
                               {"n_questions", c.n_questions},
                               {"score", stat_json(c.score)},
                               {"failure_rate", stat_json(c.failure_rate)}});
  }
  j["questions"] = nlohmann::ordered_json::array();
  for (const auto& [id, scores] : r.question_scores) {
    j["questions"].push_back({{"id", id}, {"scores", scores}, {"failed", r.question_failed.at(id)}});
  }
  return j;
}

}  // namespace pathagent::bench
