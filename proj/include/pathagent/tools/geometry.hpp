#pragma once

#include <map>
#include <string>
#include <vector>

#include "pathagent/script/value.hpp"
#include "pathagent/tools/registry.hpp"

namespace pathagent::tools {

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Absolute shoelace area of the closed polygon. A repeated closing point is
/// allowed. Self-intersections are not detected. Throws DegenerateContour
/// for fewer than 3 distinct vertices.
double contour_area(const std::vector<Point>& contour);

/// Sum of edge lengths including the closing edge. Same preconditions as
/// contour_area.
double contour_perimeter(const std::vector<Point>& contour);

/// Indices into `points` of the convex hull vertices, counter-clockwise from
/// the lexicographically smallest point. Collinear boundary points and
/// duplicates are dropped; all-collinear input yields the two endpoints.
std::vector<std::size_t> convex_hull_indices(const std::vector<Point>& points);
std::vector<Point> convex_hull(const std::vector<Point>& points);

/// Accepts a list or tuple of 2-element lists/tuples of numbers. Throws
/// ArgumentError otherwise.
std::vector<Point> parse_contour(const script::Value& v);

/// Host implementations of get_contour_area, get_contour_perimeter and
/// get_contour_convex_hull, keyed by tool name. Each reads the "contour"
/// argument.
const std::map<std::string, ToolFn>& geometry_callables();

}  // namespace pathagent::tools
