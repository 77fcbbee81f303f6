#include "pathagent/bench/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "pathagent/bench/hungarian.hpp"

namespace pathagent::bench {

using nlohmann::json;

namespace {

std::string fold(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out = s.substr(b, e - b);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

bool is_number(const json& j) { return j.is_number() && !j.is_boolean(); }

using Fields = std::vector<std::pair<std::string, ToleranceSpec>>;

std::vector<int> score_pair(const json& truth, const json* pred, const Fields& fields) {
  std::vector<int> out;
  for (const auto& [name, tol] : fields) {
    int s = 0;
    if (pred && pred->is_object() && truth.is_object()) {
      auto p = pred->find(name);
      auto t = truth.find(name);
      if (p != pred->end() && t != truth.end()) s = compare_value(*p, *t, tol);
    }
    out.push_back(s);
  }
  return out;
}

int total(const std::vector<int>& v) {
  int s = 0;
  for (int x : v) s += x;
  return s;
}

}  // namespace

int compare_value(const json& predicted, const json& truth, const ToleranceSpec& tol) {
  if (predicted.is_structured() || predicted.is_null()) return 0;
  if (tol.kind == ToleranceSpec::Kind::acceptable_set) {
    if (!predicted.is_string()) return 0;
    const std::string p = fold(predicted.get<std::string>());
    for (const auto& v : tol.values) {
      if (fold(v) == p) return 1;
    }
    return 0;
  }
  if (is_number(truth)) {
    if (!is_number(predicted)) return 0;
    const double p = predicted.get<double>();
    const double t = truth.get<double>();
    if (!std::isfinite(p)) return 0;
    const double slack = 1e-12 * std::max(1.0, std::fabs(t));
    if (t == 0) return std::fabs(p) <= tol.threshold + slack ? 1 : 0;
    return std::fabs(p - t) <= tol.threshold * std::fabs(t) + slack ? 1 : 0;
  }
  if (truth.is_string()) {
    return predicted.is_string() && fold(predicted.get<std::string>()) == fold(truth.get<std::string>()) ? 1 : 0;
  }
  if (truth.is_boolean()) return predicted.is_boolean() && predicted == truth ? 1 : 0;
  return 0;
}

QuestionScore evaluate_records(const std::optional<json>& prediction, const json& truth_records,
                               const QuestionSpec& spec) {
  QuestionScore out;
  out.question_id = spec.id;
  const Fields& fields = spec.columns_to_compare_and_tolerance;
  const std::size_t n_truth = truth_records.is_array() ? truth_records.size() : 0;
  out.produced_valid_file = prediction.has_value() && prediction->is_array();

  std::vector<const json*> preds;
  if (out.produced_valid_file) {
    for (const auto& p : *prediction) {
      if (p.is_object()) preds.push_back(&p);
    }
  }

  // Best prediction per truth record; nullptr when none.
  std::vector<const json*> match(n_truth, nullptr);
  if (out.produced_valid_file && !preds.empty()) {
    if (spec.id_column) {
      const std::string& key = *spec.id_column;
      for (std::size_t t = 0; t < n_truth; ++t) {
        auto tid = truth_records[t].find(key);
        if (tid == truth_records[t].end()) continue;
        int best = -1;
        for (const json* p : preds) {
          auto pid = p->find(key);
          if (pid == p->end() || *pid != *tid) continue;
          int s = total(score_pair(truth_records[t], p, fields));
          if (s > best) {  // duplicate ids: keep the best-scoring record
            best = s;
            match[t] = p;
          }
        }
      }
    } else if (n_truth > 0) {
      CostMatrix cost(n_truth, std::vector<double>(preds.size()));
      for (std::size_t t = 0; t < n_truth; ++t) {
        for (std::size_t j = 0; j < preds.size(); ++j) {
          auto s = score_pair(truth_records[t], preds[j], fields);
          cost[t][j] = static_cast<double>(fields.size() - static_cast<std::size_t>(total(s)));
        }
      }
      for (auto [r, c] : hungarian_assign(cost)) match[r] = preds[c];
    }
  }

  int hits = 0;
  for (std::size_t t = 0; t < n_truth; ++t) {
    auto s = score_pair(truth_records[t], match[t], fields);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      out.field_scores.push_back({t, fields[f].first, s[f]});
      hits += s[f];
    }
  }
  const std::size_t cells = n_truth * fields.size();
  out.score = out.produced_valid_file && cells ? static_cast<double>(hits) / static_cast<double>(cells) : 0.0;
  out.failed = !out.produced_valid_file || out.score == 0;
  return out;
}

QuestionScore evaluate_answer(const std::filesystem::path& answer_path, const json& truth_records,
                              const QuestionSpec& spec) {
  std::optional<json> prediction;
  std::ifstream in(answer_path);
  if (in) {
    auto doc = json::parse(in, nullptr, false);
    if (!doc.is_discarded()) prediction = std::move(doc);
  }
  return evaluate_records(prediction, truth_records, spec);
}

}  // namespace pathagent::bench
