#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pathagent/bench/aggregate.hpp"
#include "pathagent/bench/hungarian.hpp"
#include "pathagent/bench/question.hpp"
#include "pathagent/bench/scoring.hpp"
#include "support.hpp"

using namespace pathagent;
using namespace pathagent::bench;
using nlohmann::json;
using pathagent::testing::TempDir;

namespace {

// Same field layout as the published DataQA example; the texts are ours.
json dataqa_doc() {
  return json::parse(R"j({
    "id": "21",
    "data_type": "single_wsi",
    "slide_relative_path": "slides/S1.svs",
    "question": "What share of tissue pixels in {path_to_slide} is hematoxylin dominant?",
    "additional_instructions": "Write scratch files to {working_dir}.",
    "output_instructions": "Save answer.json as a list of objects with slide_id and hematoxylin_percent.",
    "id_column": "slide_id",
    "columns_to_compare_and_tolerance": {"hematoxylin_percent": 0.1},
    "rationale": "Nuclear staining proportion.",
    "is_pathologist_verified": true,
    "is_biomedical_scientist_verified": true
  })j");
}

// Same field layout as the published SlideQA example.
json slideqa_doc() {
  return json::parse(R"j({
    "id": "11",
    "data_type": "multiple_wsi",
    "dataset_relative_path": "slides",
    "path_to_metadata": "metadata.csv",
    "question": "Split the slides in {path_to_dataset} into two groups using {path_to_metadata}.",
    "rationale": "Risk stratification.",
    "additional_instructions": "Working directory: {working_dir}.",
    "output_instructions": "One object with the counts.",
    "id_column": null,
    "columns_to_compare_and_tolerance": {
      "number_high": 0.15,
      "number_low": 0.15,
      "label": ["high", "Low"]
    },
    "is_pathologist_verified": true,
    "is_biomedical_scientist_verified": true
  })j");
}

QuestionSpec spec_with(std::optional<std::string> id_column, std::vector<std::string> fields,
                       double tol = 0.1) {
  QuestionSpec s;
  s.id = "t";
  s.id_column = std::move(id_column);
  for (auto& f : fields) s.columns_to_compare_and_tolerance.emplace_back(f, ToleranceSpec::relative(tol));
  return s;
}

double row_overall(const std::vector<double>& cats) { return weighted_overall(cats, {25, 25, 25, 15}); }

}  // namespace

TEST_CASE("question parsing") {
  auto q = parse_question(dataqa_doc());
  CHECK(q.id == "21");
  CHECK(q.data_type == DataType::single_wsi);
  CHECK(q.id_column == std::optional<std::string>("slide_id"));
  REQUIRE(q.columns_to_compare_and_tolerance.size() == 1);
  CHECK(q.columns_to_compare_and_tolerance[0].first == "hematoxylin_percent");
  CHECK(q.columns_to_compare_and_tolerance[0].second.kind == ToleranceSpec::Kind::relative_numeric);
  CHECK(q.columns_to_compare_and_tolerance[0].second.threshold == 0.1);

  auto s = parse_question(slideqa_doc());
  CHECK_FALSE(s.id_column.has_value());
  auto label = std::find_if(s.columns_to_compare_and_tolerance.begin(), s.columns_to_compare_and_tolerance.end(),
                            [](const auto& c) { return c.first == "label"; });
  REQUIRE(label != s.columns_to_compare_and_tolerance.end());
  CHECK(label->second.kind == ToleranceSpec::Kind::acceptable_set);

  auto field_of = [](json doc) {
    try {
      parse_question(doc);
    } catch (const SchemaError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  auto missing = dataqa_doc();
  missing.erase("output_instructions");
  CHECK(field_of(missing) == "output_instructions");
  auto unknown = dataqa_doc();
  unknown["answer_key"] = 1;
  CHECK(field_of(unknown) == "answer_key");
  auto bad_tol = dataqa_doc();
  bad_tol["columns_to_compare_and_tolerance"]["hematoxylin_percent"] = -0.1;
  CHECK(field_of(bad_tol) != "<none>");
  auto empty_set = dataqa_doc();
  empty_set["columns_to_compare_and_tolerance"]["hematoxylin_percent"] = json::array();
  CHECK(field_of(empty_set) != "<none>");
  auto bad_type = dataqa_doc();
  bad_type["data_type"] = "many_wsi";
  CHECK(field_of(bad_type) == "data_type");
  auto bad_placeholder = dataqa_doc();
  bad_placeholder["question"] = "Look at {path_to_archive}";
  CHECK(field_of(bad_placeholder) != "<none>");
}

TEST_CASE("prompt materialization") {
  auto q = parse_question(dataqa_doc());
  auto text = materialize_prompt(q, "/data/root", "/work/q21");
  CHECK(text.find("/data/root/slides/S1.svs") != std::string::npos);
  CHECK(text.find("/work/q21") != std::string::npos);
  CHECK(text.find("{") == std::string::npos);

  auto plain = q;
  plain.question = "A";
  plain.additional_instructions = "B";
  plain.output_instructions = "C";
  CHECK(materialize_prompt(plain, "/d", "/w") == "A\n\nB\n\nC");

  auto no_meta = parse_question(slideqa_doc());
  no_meta.path_to_metadata.reset();
  CHECK_THROWS_AS(materialize_prompt(no_meta, "/d", "/w"), MissingPlaceholderTarget);
}

TEST_CASE("suite loading") {
  auto suite = load_suite(testing::minibench_dir() / "questions");
  CHECK(suite.size() == 12);
  std::map<std::string, int> per_category;
  for (const auto& q : suite) ++per_category[q.category];
  CHECK(per_category == std::map<std::string, int>{{"DataQA", 4}, {"CellularQA", 3}, {"PatchQA", 3}, {"SlideQA", 2}});

  TempDir dir;
  testing::write_file(dir.path() / "a.json", dataqa_doc().dump());
  testing::write_file(dir.path() / "b.json", dataqa_doc().dump());
  CHECK_THROWS_AS(load_suite(dir.path()), SchemaError);
  testing::write_file(dir.path() / "c.json", "{not json");
  CHECK_THROWS_AS(load_question(dir.path() / "c.json"), SchemaError);
}

TEST_CASE("compare_value") {
  const auto rel = ToleranceSpec::relative(0.1);
  CHECK(compare_value(44.23, 44.23, rel) == 1);
  CHECK(compare_value(50.0, 44.23, rel) == 0);
  CHECK(compare_value(48.65, 44.23, rel) == 1);
  // zero truth falls back to an absolute threshold
  CHECK(compare_value(0.05, 0.0, ToleranceSpec::relative(0.15)) == 1);
  CHECK(compare_value(0.2, 0.0, ToleranceSpec::relative(0.15)) == 0);
  CHECK(compare_value(-0.15, 0.0, ToleranceSpec::relative(0.15)) == 1);
  CHECK(compare_value(" Metaplastic ", "x", ToleranceSpec::acceptable({"metaplastic"})) == 1);
  CHECK(compare_value("benign", "x", ToleranceSpec::acceptable({"metaplastic"})) == 0);
  CHECK(compare_value("44.23", 44.23, rel) == 0);
  CHECK(compare_value(true, 1, rel) == 0);
  CHECK(compare_value(json::array({1}), 1, rel) == 0);
  CHECK(compare_value(nullptr, 1, rel) == 0);
  // the boundary itself is inside
  CHECK(compare_value(110.0, 100.0, rel) == 1);
  CHECK(compare_value(90.0, 100.0, rel) == 1);
}

TEST_CASE("hungarian examples") {
  auto a = hungarian_assign({{1, 0}, {0, 1}});
  CHECK(a == Assignment{{0, 1}, {1, 0}});
  CHECK(assignment_cost({{1, 0}, {0, 1}}, a) == 0);
  CHECK(hungarian_assign({{7}}) == Assignment{{0, 0}});
  CHECK(hungarian_assign({{0, 0}, {0, 0}}) == Assignment{{0, 0}, {1, 1}});
  CHECK(hungarian_assign({{5, 1, 3}}) == Assignment{{0, 1}});
  CHECK(hungarian_assign({{5}, {1}, {3}}) == Assignment{{1, 0}});
}

TEST_CASE("hungarian matches brute force") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_int_distribution<int> small(0, 3);
  std::uniform_real_distribution<double> real(0, 10);
  for (int i = 0; i < 150; ++i) {
    const int n = dim(rng), m = dim(rng);
    CostMatrix c(n, std::vector<double>(m));
    for (auto& row : c)
      for (auto& v : row) v = i % 2 ? double(small(rng)) : real(rng);
    auto a = hungarian_assign(c);
    CHECK(a.size() == static_cast<std::size_t>(std::min(n, m)));
    std::set<int> rows, cols;
    for (auto [r, col] : a) {
      CHECK(rows.insert(r).second);
      CHECK(cols.insert(col).second);
    }
    CHECK(assignment_cost(c, a) == doctest::Approx(testing::brute_force_assignment_min(c)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_records") {
  auto spec = spec_with("slide_id", {"a", "b", "c"});
  json truth = json::parse(R"([{"slide_id": "S1", "a": 1, "b": 2, "c": 3}, {"slide_id": "S2", "a": 4, "b": 5, "c": 6}])");
  auto exact = evaluate_records(truth, truth, spec);
  CHECK(exact.score == 1.0);
  CHECK_FALSE(exact.failed);
  CHECK(exact.produced_valid_file);

  auto missing_field = json::parse(R"([{"slide_id": "S1", "a": 1, "b": 2}, {"slide_id": "S2", "a": 4, "b": 5}])");
  CHECK(evaluate_records(missing_field, truth, spec).score == doctest::Approx(2.0 / 3.0));

  auto none = evaluate_records(std::nullopt, truth, spec);
  CHECK(none.score == 0);
  CHECK(none.failed);
  CHECK_FALSE(none.produced_valid_file);
  auto not_array = evaluate_records(json::object(), truth, spec);
  CHECK_FALSE(not_array.produced_valid_file);

  auto wrong = json::parse(R"([{"slide_id": "S1", "a": 9, "b": 9, "c": 9}])");
  auto zero = evaluate_records(wrong, truth, spec);
  CHECK(zero.score == 0);
  CHECK(zero.failed);
  CHECK(zero.produced_valid_file);

  // no id column: swapped order still aligns
  auto free = spec_with(std::nullopt, {"a", "b", "c"});
  json swapped = json::array({truth[1], truth[0]});
  CHECK(evaluate_records(swapped, truth, free).score == 1.0);
  // extra prediction records are ignored
  json extra = truth;
  extra.push_back(json::parse(R"({"slide_id": "S9", "a": 0, "b": 0, "c": 0})"));
  CHECK(evaluate_records(extra, truth, free).score == 1.0);
  // duplicates keep the best-scoring record
  json dup = json::array({wrong[0], truth[0], truth[1]});
  CHECK(evaluate_records(dup, truth, spec).score == 1.0);
}

TEST_CASE("answer files") {
  TempDir wd;
  auto spec = spec_with("id", {"v"});
  json truth = json::parse(R"([{"id": "x", "v": 10}])");
  CHECK_FALSE(evaluate_answer(wd.path() / "answer.json", truth, spec).produced_valid_file);
  testing::write_file(wd.path() / "answer.json", "[{\"id\": \"x\", \"v\": 10.5");
  CHECK_FALSE(evaluate_answer(wd.path() / "answer.json", truth, spec).produced_valid_file);
  testing::write_file(wd.path() / "answer.json", "[\n    {\n        \"id\": \"x\",\n        \"v\": 10.5\n    }\n]\n");
  CHECK(evaluate_answer(wd.path() / "answer.json", truth, spec).score == 1.0);
}

TEST_CASE("evaluator properties") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-50, 50);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 200; ++i) {
    const bool with_id = coin(rng);
    auto spec = spec_with(with_id ? std::optional<std::string>("id") : std::nullopt, {"p", "q"}, 0.1);
    json truth = json::array(), pred = json::array();
    const int n = 1 + i % 4;
    for (int r = 0; r < n; ++r) {
      json t = {{"id", "r" + std::to_string(r)}, {"p", val(rng)}, {"q", val(rng)}};
      json p = t;
      if (coin(rng)) p["p"] = p["p"].get<double>() * 1.5 + 1;
      if (coin(rng)) p.erase("q");
      truth.push_back(t);
      pred.push_back(p);
    }
    auto base = evaluate_records(pred, truth, spec);
    CHECK(base.score >= 0);
    CHECK(base.score <= 1);
    CHECK(base.failed == (base.score == 0));

    json shuffled = pred;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(evaluate_records(shuffled, truth, spec).score == doctest::Approx(base.score));

    auto wide = spec;
    for (auto& [f, tol] : wide.columns_to_compare_and_tolerance) tol.threshold = 10;
    CHECK(evaluate_records(pred, truth, wide).score >= base.score);

    json repaired = pred;
    for (std::size_t r = 0; r < repaired.size(); ++r) repaired[r]["q"] = truth[r]["q"];
    CHECK(evaluate_records(repaired, truth, spec).score >= base.score);
  }
}

TEST_CASE("published aggregation rows") {
  const double tol = 0.0005 + 1e-9;
  CHECK(row_overall({0, 0, 0, 0}) == 0);
  CHECK(row_overall({1, 1, 1, 1}) == 1);
  CHECK(std::abs(row_overall({0.377, 0.058, 0.039, 0.133}) - 0.154) <= tol);
  CHECK(std::abs(row_overall({0.580, 0.773, 0.947, 0.867}) - 0.783) <= tol);
  CHECK(std::abs(row_overall({0.443, 0.152, 0.217, 0.259}) - 0.269) <= tol);
  CHECK(std::abs(row_overall({0.507, 0.627, 0.613, 0.667}) - 0.596) <= tol);
  CHECK(std::abs(row_overall({0.777, 0.323, 0.335, 0.472}) - 0.477) <= tol);
  CHECK(std::abs(row_overall({0.200, 0.320, 0.413, 0.422}) - 0.330) <= tol);
  CHECK_THROWS(weighted_overall({1, 2}, {1}));
}

TEST_CASE("standard error uses the sample deviation") {
  // 14, 14 and 11 of 15 questions failed in three trials
  auto s = summarize({14.0 / 15, 14.0 / 15, 11.0 / 15});
  CHECK(std::round(s.mean * 1000) / 1000 == 0.867);
  CHECK(std::round(s.se * 1000) / 1000 == 0.067);
  CHECK(summarize({0.5}).se == 0);
}

TEST_CASE("aggregate") {
  std::vector<TrialResults> trials(3);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<std::pair<std::string, int>> cats = {{"DataQA", 5}, {"CellularQA", 3}, {"SlideQA", 2}};
  for (auto& t : trials) {
    int id = 0;
    for (const auto& [cat, n] : cats) {
      for (int k = 0; k < n; ++k) {
        double s = u(rng) < 0.3 ? 0 : u(rng);
        t.push_back({"q" + std::to_string(id++), cat, s, s == 0});
      }
    }
  }
  auto r = aggregate(trials);
  CHECK(r.trials == 3);
  CHECK(r.n_questions == 10);
  REQUIRE(r.categories.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    double direct = 0, fail = 0;
    for (const auto& q : trials[t]) {
      direct += q.score;
      fail += q.failed;
    }
    CHECK(r.overall_score.per_trial[t] == doctest::Approx(direct / 10).epsilon(1e-12));
    CHECK(r.overall_failure_rate.per_trial[t] == doctest::Approx(fail / 10).epsilon(1e-12));
  }
  std::vector<double> means;
  std::vector<std::size_t> counts;
  for (const auto& c : r.categories) {
    means.push_back(c.score.mean);
    counts.push_back(c.n_questions);
    CHECK(c.failure_rate.mean >= 0);
    CHECK(c.failure_rate.mean <= 1);
  }
  CHECK(std::abs(weighted_overall(means, counts) - r.overall_score.mean) < 1e-12);
  auto j = report_to_json(r);
  CHECK(j["categories"][0]["category"] == "DataQA");
  CHECK(j["categories"][2]["category"] == "SlideQA");

  auto zeros = trials;
  for (auto& t : zeros)
    for (auto& q : t) q = {q.question_id, q.category, 0, true};
  auto z = aggregate(zeros);
  CHECK(z.overall_score.mean == 0);
  CHECK(z.overall_failure_rate.mean == 1.0);
  CHECK(z.overall_score.se == 0);

  auto broken = trials;
  broken[1].pop_back();
  CHECK_THROWS_AS(aggregate(broken), InconsistentTrials);
  auto moved = trials;
  moved[2][0].category = "PatchQA";
  CHECK_THROWS_AS(aggregate(moved), InconsistentTrials);
}
