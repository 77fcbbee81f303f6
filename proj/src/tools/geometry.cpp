#include "pathagent/tools/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pathagent::tools {

using script::Value;

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::vector<Point> polygon_vertices(const std::vector<Point>& contour) {
  std::vector<Point> pts = contour;
  if (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
  if (pts.size() < 3) {
    throw ToolError(ToolErrorKind::DegenerateContour,
                    "contour needs at least 3 points, got " + std::to_string(pts.size()));
  }
  return pts;
}

const std::vector<Value>& items_of(const Value& v) {
  return v.is_list() ? v.as_list().items : v.as_tuple().items;
}

}  // namespace

double contour_area(const std::vector<Point>& contour) {
  auto pts = polygon_vertices(contour);
  double twice = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % pts.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::fabs(twice) / 2;
}

double contour_perimeter(const std::vector<Point>& contour) {
  auto pts = polygon_vertices(contour);
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % pts.size()];
    total += std::hypot(b.x - a.x, b.y - a.y);
  }
  return total;
}

std::vector<std::size_t> convex_hull_indices(const std::vector<Point>& points) {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto lex = [&](std::size_t a, std::size_t b) {
    const Point &p = points[a], &q = points[b];
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  };
  std::stable_sort(idx.begin(), idx.end(), lex);
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](std::size_t a, std::size_t b) { return points[a] == points[b]; }),
            idx.end());
  if (idx.size() < 3) return idx;

  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i : idx) {  // lower chain
    while (k >= 2 && cross(points[hull[k - 2]], points[hull[k - 1]], points[i]) <= 0) --k;
    hull[k++] = i;
  }
  const std::size_t lower = k + 1;
  for (std::size_t j = idx.size() - 1; j-- > 0;) {  // upper chain
    std::size_t i = idx[j];
    while (k >= lower && cross(points[hull[k - 2]], points[hull[k - 1]], points[i]) <= 0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);  // last point repeats the first
  return hull;
}

std::vector<Point> convex_hull(const std::vector<Point>& points) {
  std::vector<Point> out;
  for (std::size_t i : convex_hull_indices(points)) out.push_back(points[i]);
  return out;
}

std::vector<Point> parse_contour(const Value& v) {
  if (!v.is_list() && !v.is_tuple()) {
    throw ToolError(ToolErrorKind::ArgumentError,
                    "contour must be a list of (x, y) points, not " + v.type_name());
  }
  std::vector<Point> pts;
  for (const Value& p : items_of(v)) {
    bool ok = (p.is_list() || p.is_tuple()) && items_of(p).size() == 2 &&
              items_of(p)[0].is_numeric() && items_of(p)[1].is_numeric();
    if (!ok) {
      throw ToolError(ToolErrorKind::ArgumentError,
                      "contour points must be (x, y) pairs of numbers, got " + script::repr(p));
    }
    pts.push_back({items_of(p)[0].as_double(), items_of(p)[1].as_double()});
  }
  return pts;
}

const std::map<std::string, ToolFn>& geometry_callables() {
  static const std::map<std::string, ToolFn> fns = {
      {"get_contour_area",
       [](const ArgMap& args, const ToolContext&) {
         auto out = Value::dict();
         out.as_dict().set(std::string("contour_area"),
                           Value::number(contour_area(parse_contour(args.at("contour")))));
         return out;
       }},
      {"get_contour_perimeter",
       [](const ArgMap& args, const ToolContext&) {
         auto out = Value::dict();
         out.as_dict().set(std::string("contour_perimeter"),
                           Value::number(contour_perimeter(parse_contour(args.at("contour")))));
         return out;
       }},
      {"get_contour_convex_hull",
       [](const ArgMap& args, const ToolContext&) {
         const Value& contour = args.at("contour");
         auto pts = parse_contour(contour);
         if (pts.empty()) {
           throw ToolError(ToolErrorKind::ArgumentError, "contour must contain at least 1 point");
         }
         std::vector<Value> hull;
         for (std::size_t i : convex_hull_indices(pts)) {
           const auto& xy = items_of(items_of(contour)[i]);
           hull.push_back(Value::list({xy[0], xy[1]}));
         }
         auto out = Value::dict();
         out.as_dict().set(std::string("contour_convex_hull"), Value::list(std::move(hull)));
         return out;
       }},
  };
  return fns;
}

}  // namespace pathagent::tools
