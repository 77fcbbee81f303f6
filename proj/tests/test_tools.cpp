#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "pathagent/script/interpreter.hpp"
#include "pathagent/script/value_json.hpp"
#include "pathagent/tools/catalog.hpp"
#include "pathagent/tools/fixture_store.hpp"
#include "pathagent/tools/geometry.hpp"
#include "pathagent/tools/registry.hpp"
#include "support.hpp"

using namespace pathagent;
using namespace pathagent::tools;
using script::Value;
namespace fs = std::filesystem;

namespace {

Value contour_value(const std::vector<Point>& pts) {
  std::vector<Value> items;
  for (const auto& p : pts) items.push_back(Value::tuple({Value::number(p.x), Value::number(p.y)}));
  return Value::list(std::move(items));
}

const Registry& full_registry() {
  static const Registry r = default_registry(testing::minibench_dir() / "dataset");
  return r;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

double polygon_perimeter(const std::vector<Point>& p) {
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    total += std::hypot(a.x - b.x, a.y - b.y);
  }
  return total;
}

}  // namespace

TEST_CASE("register and look up") {
  Registry r;
  CHECK(r.render_tool_docs().empty());
  auto catalog = load_catalog(asset_dir() / "tool_catalog.json");
  auto area = std::find_if(catalog.begin(), catalog.end(),
                           [](const ToolDescriptor& d) { return d.name == "get_contour_area"; });
  REQUIRE(area != catalog.end());
  r.register_tool({*area, geometry_callables().at("get_contour_area")});
  CHECK(r.size() == 1);
  try {
    r.register_tool({*area, geometry_callables().at("get_contour_area")});
    FAIL("expected DuplicateTool");
  } catch (const ToolError& e) {
    CHECK(e.kind() == ToolErrorKind::DuplicateTool);
  }
  CHECK(r.render_tool_docs() == testing::read_file(testing::source_dir() / "tests/data/get_contour_area.txt"));
}

TEST_CASE("bundled catalog has 49 tools in every category") {
  const auto& r = full_registry();
  CHECK(r.size() == 49);
  std::map<Category, int> counts;
  for (const auto& t : r.tools()) ++counts[t.descriptor.category];
  for (auto c : all_categories()) CHECK(counts[c] > 0);
  CHECK(counts[Category::nuclei_contour] == 4);
  std::set<std::string> names;
  for (const auto& t : r.tools()) {
    CHECK(names.insert(t.descriptor.name).second);
    for (const auto& p : t.descriptor.params) CHECK_FALSE(p.doc.empty());
  }
}

TEST_CASE("rendered docs are complete and filterable") {
  const auto& r = full_registry();
  const std::string all = r.render_tool_docs();
  for (const auto& t : r.tools()) {
    const auto block = render_tool_block(t.descriptor);
    CHECK(count_occurrences(all, block) == 1);
    CHECK(count_occurrences(all, "def " + t.descriptor.name + "(") == 1);
    for (const auto& p : t.descriptor.params) {
      INFO(t.descriptor.name << "." << p.name);
      CHECK(count_occurrences(block, "      " + p.name + ": ") == 1);
    }
  }
  auto nuclei = r.render_tool_docs(std::set<Category>{Category::nuclei_contour});
  CHECK(count_occurrences(nuclei, "def ") == 4);
}

TEST_CASE("tissue segmentation tool mirrors the documented contract") {
  const auto* t = full_registry().find("dataset_of_wsi_tissue_segmentation_tool");
  REQUIRE(t);
  CHECK(t->descriptor.signature() ==
        "dataset_of_wsi_tissue_segmentation_tool(job_dir: str, wsi_source: str, skip_errors: bool = False, "
        "search_nested: bool = False, holes_are_tissue: bool = True, batch_size: int = 64, "
        "segmentation_model_name: str = 'grandqc', tissue_seg_confidence_thresh: float = 0.5, "
        "overwrite: bool = False, skip_specific_wsi: list[str] | None = None, "
        "keep_only_these_wsi: list[str] | None = None, max_workers: int = 16)");
  auto block = render_tool_block(t->descriptor);
  for (const char* section : {"    Notes:\n", "    Prerequisites:\n", "    Returns (dict):\n", "    Args:\n"}) {
    CHECK(count_occurrences(block, section) == 1);
  }

  testing::TempDir wd;
  ArgMap args{{"job_dir", Value::string((wd.path() / "seg").string())},
              {"wsi_source", Value::string((testing::minibench_dir() / "dataset/slides").string())}};
  auto result = script::to_json(full_registry().invoke(t->descriptor.name, args, {wd.path()}));
  std::set<std::string> keys;
  for (const auto& [k, v] : result.items()) keys.insert(k);
  CHECK(keys == std::set<std::string>{"dir_with_geojson_contours", "dir_with_tissue_contours_jpg",
                                      "dir_with_slide_thumbnails", "tissue_segmentation_log_file",
                                      "tissue_segmentation_config_file",
                                      "number_of_processed_segmentations", "operation_log"});
  CHECK(result["dir_with_geojson_contours"] == (wd.path() / "seg/contours_geojson").string());
}

TEST_CASE("invoke checks arguments") {
  const auto& r = full_registry();
  ArgMap square{{"contour", contour_value({{0, 0}, {1, 0}, {1, 1}, {0, 1}})}};
  auto out = script::to_json(r.invoke("get_contour_area", square));
  CHECK(out["contour_area"].get<double>() == 1.0);

  auto kind_of = [&](const char* name, ArgMap args) {
    try {
      r.invoke(name, args);
    } catch (const ToolError& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    FAIL("no error");
    return std::make_pair(ToolErrorKind::UnknownTool, std::string());
  };
  CHECK(kind_of("no_such_tool", {}).first == ToolErrorKind::UnknownTool);
  auto missing = kind_of("get_contour_area", {});
  CHECK(missing.first == ToolErrorKind::ArgumentError);
  CHECK(missing.second.find("'contour'") != std::string::npos);
  CHECK(missing.second.find("get_contour_area(contour: list[tuple[float, float]]) -> dict") != std::string::npos);
  auto extra = kind_of("get_contour_area", {{"contour", square.at("contour")}, {"scale", Value::integer(2)}});
  CHECK(extra.first == ToolErrorKind::ArgumentError);
  auto mistyped = kind_of("get_contour_area", {{"contour", Value::string("square")}});
  CHECK(mistyped.first == ToolErrorKind::ArgumentError);
  CHECK(kind_of("get_contour_area", {{"contour", contour_value({{0, 0}, {1, 1}})}}).first ==
        ToolErrorKind::DegenerateContour);
}

TEST_CASE("type annotations") {
  CHECK(matches_type(Value::integer(3), "float"));
  CHECK_FALSE(matches_type(Value::number(3.5), "int"));
  CHECK(matches_type(Value::none(), "list[str] | None"));
  CHECK(matches_type(Value::list({Value::string("a")}), "list[str] | None"));
  CHECK_FALSE(matches_type(Value::list({Value::integer(1)}), "list[str]"));
  CHECK(matches_type(Value::list({Value::tuple({Value::integer(1), Value::number(2.5)})}),
                     "list[tuple[float, float]]"));
  CHECK_FALSE(matches_type(Value::list({Value::tuple({Value::integer(1)})}), "list[tuple[float, float]]"));
}

TEST_CASE("tool errors reach scripts as exceptions") {
  testing::TempDir wd;
  script::ScriptSession s(full_registry().script_bindings());
  script::InterpreterLimits l;
  l.working_dir = wd.path();
  auto r = s.run_source(
      "try:\n    get_contour_area([[0, 0]])\nexcept DegenerateContour as e:\n    print('caught')\n"
      "print(get_contour_area(contour=[(0, 0), (4, 0), (0, 3)])['contour_area'])",
      l);
  CHECK_FALSE(r.error);
  CHECK(r.stdout_text == "caught\n6.0\n");
}

TEST_CASE("contour area and perimeter") {
  CHECK(contour_area({{0, 0}, {4, 0}, {0, 3}}) == 6.0);
  CHECK(contour_area({{0, 0}, {4, 0}, {0, 3}, {0, 0}}) == 6.0);
  CHECK(contour_perimeter({{0, 0}, {1, 0}, {1, 1}, {0, 1}}) == 4.0);
  CHECK(contour_perimeter({{0, 0}, {4, 0}, {0, 3}}) == 12.0);
  CHECK_THROWS_AS(contour_area({{0, 0}, {1, 1}, {0, 0}}), ToolError);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    auto poly = testing::random_star_polygon(rng, 5 + i % 10);
    double a = contour_area(poly);
    CHECK(std::abs(a - testing::raster_area(poly, 800)) <= 0.01 * a);
    CHECK(std::abs(contour_perimeter(poly) - polygon_perimeter(poly)) <= 1e-9);
  }
}

TEST_CASE("convex hull") {
  CHECK(convex_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}}) ==
        std::vector<Point>{{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  CHECK(convex_hull({{3, 3}, {0, 0}, {1, 1}, {2, 2}}) == std::vector<Point>{{0, 0}, {3, 3}});
  CHECK(convex_hull({{5, 5}}) == std::vector<Point>{{5, 5}});
  CHECK(convex_hull({{1, 1}, {1, 1}}) == std::vector<Point>{{1, 1}});

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coord(0, 6);
  for (int i = 0; i < 100; ++i) {
    std::vector<Point> pts(2 + i % 11);
    for (auto& p : pts) p = {double(coord(rng)), double(coord(rng))};
    auto hull = convex_hull(pts);
    auto sorted = hull;
    std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) {
      return std::tie(a.x, a.y) < std::tie(b.x, b.y);
    });
    CHECK(sorted == testing::brute_force_hull(pts));
    CHECK(hull.front() == sorted.front());
    CHECK(convex_hull(hull) == hull);
    for (std::size_t k = 0; hull.size() >= 3 && k < hull.size(); ++k) {
      const auto& a = hull[k];
      const auto& b = hull[(k + 1) % hull.size()];
      const auto& c = hull[(k + 2) % hull.size()];
      CHECK((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) > 0);
    }
  }
}

TEST_CASE("fixture tools") {
  const auto& r = full_registry();
  const auto ds = testing::minibench_dir() / "dataset";
  testing::TempDir wd;
  ArgMap s1{{"wsi_path", Value::string((ds / "slides/S1.svs").string())}};
  auto props = script::to_json(r.invoke("retrieve_properties_from_wsi_tool", s1, {wd.path()}));
  CHECK(props["magnification"] == 40);
  CHECK(props["levels"] == 3);
  CHECK(props["mpp"].get<double>() == doctest::Approx(0.25).epsilon(0.01));
  CHECK(script::to_json(r.invoke("retrieve_properties_from_wsi_tool", s1, {wd.path()})) == props);

  // a path relative to the working directory canonicalizes to the same key
  fs::create_directory_symlink(ds, wd.path() / "data");
  const auto& store_tool = r.find("retrieve_properties_from_wsi_tool")->descriptor;
  FixtureStore store(ds / "fixtures", ds);
  CHECK(store.canonical_key(store_tool, s1, {wd.path()}) == R"({"wsi_path":"{dataset}/slides/S1.svs"})");

  try {
    r.invoke("segment_and_classify_nuclei_in_histology_roi_tool",
             ArgMap{{"image_path", Value::string((ds / "rois/unknown.ppm").string())}}, {wd.path()});
    FAIL("expected FixtureMiss");
  } catch (const ToolError& e) {
    CHECK(e.kind() == ToolErrorKind::FixtureMiss);
  }
  // default-valued arguments do not change the key
  ArgMap roi{{"image_path", Value::string((ds / "rois/R1.ppm").string())}};
  ArgMap roi_defaults = roi;
  roi_defaults.emplace("magnification", Value::integer(40));
  CHECK(script::to_json(r.invoke("segment_and_classify_nuclei_in_histology_roi_tool", roi, {wd.path()})) ==
        script::to_json(r.invoke("segment_and_classify_nuclei_in_histology_roi_tool", roi_defaults, {wd.path()})));
}

TEST_CASE("geometry scaling") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    auto poly = testing::random_star_polygon(rng, 8);
    const double k = 0.5 + i * 0.37;
    auto scaled = poly;
    for (auto& p : scaled) p = {p.x * k, p.y * k};
    CHECK(contour_area(scaled) == doctest::Approx(k * k * contour_area(poly)).epsilon(1e-9));
    CHECK(contour_perimeter(scaled) == doctest::Approx(k * contour_perimeter(poly)).epsilon(1e-9));
    CHECK(contour_area(convex_hull(poly)) >= contour_area(poly) - 1e-9);
  }
}
