#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathagent/bench/hungarian.hpp"
#include "pathagent/model/chat.hpp"
#include "pathagent/tools/geometry.hpp"

namespace pathagent::testing {

std::filesystem::path source_dir();
std::filesystem::path minibench_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

/// Replay steps from (thought, code) pairs.
std::vector<model::StepOutput> steps(const std::vector<std::pair<std::string, std::string>>& pairs);

// ---- independent oracles -------------------------------------------------

/// Minimum total cost over all injective row->column (or column->row)
/// maps, by enumerating permutations.
double brute_force_assignment_min(const bench::CostMatrix& cost);

/// Strict hull vertices: p is kept when some pair (p, q) has every point on
/// its left or on the closed segment. Result sorted lexicographically.
std::vector<tools::Point> brute_force_hull(const std::vector<tools::Point>& points);

/// Area by counting pixel centres inside the polygon (crossing test) on a
/// grid x grid raster over the bounding box.
double raster_area(const std::vector<tools::Point>& polygon, int grid);

/// Simple polygon: sorted random angles around a centre with random radii.
std::vector<tools::Point> random_star_polygon(std::mt19937_64& rng, int n);

}  // namespace pathagent::testing
