#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <stdlib.h>

namespace pathagent::testing {

namespace fs = std::filesystem;

fs::path source_dir() { return PATHAGENT_SOURCE_DIR; }
fs::path minibench_dir() { return source_dir() / "data" / "minibench"; }

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "pathagent-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = fs::canonical(tmpl);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

std::vector<model::StepOutput> steps(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<model::StepOutput> out;
  for (const auto& [t, c] : pairs) out.push_back({t, c, ""});
  return out;
}

double brute_force_assignment_min(const bench::CostMatrix& cost) {
  const std::size_t n = cost.size();
  const std::size_t m = n ? cost[0].size() : 0;
  if (n == 0 || m == 0) return 0;
  const bool wide = n <= m;
  const std::size_t small = wide ? n : m, large = wide ? m : n;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // every ordering of the larger side; the first `small` entries pair up
  do {
    double total = 0;
    for (std::size_t i = 0; i < small; ++i) total += wide ? cost[i][perm[i]] : cost[perm[i]][i];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<tools::Point> brute_force_hull(const std::vector<tools::Point>& input) {
  std::vector<tools::Point> pts = input;
  auto less = [](const tools::Point& a, const tools::Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); };
  std::sort(pts.begin(), pts.end(), less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<tools::Point> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const auto& a = pts[i];
      const auto& b = pts[j];
      bool edge = true;
      for (std::size_t k = 0; k < pts.size() && edge; ++k) {
        if (k == i || k == j) continue;
        const auto& p = pts[k];
        double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (cross < 0) edge = false;
        if (cross == 0) {
          double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
          double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
          if (dot < 0 || dot > len2) edge = false;  // beyond the segment
        }
      }
      if (edge) {
        out.push_back(a);
        out.push_back(b);
      }
    }
  }
  std::sort(out.begin(), out.end(), less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double raster_area(const std::vector<tools::Point>& poly, int grid) {
  double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
  for (const auto& p : poly) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double dx = (x1 - x0) / grid, dy = (y1 - y0) / grid;
  long inside = 0;
  for (int r = 0; r < grid; ++r) {
    const double y = y0 + (r + 0.5) * dy;
    for (int c = 0; c < grid; ++c) {
      const double x = x0 + (c + 0.5) * dx;
      bool in = false;
      for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
      }
      inside += in;
    }
  }
  return inside * dx * dy;
}

std::vector<tools::Point> random_star_polygon(std::mt19937_64& rng, int n) {
  // jittered even spacing keeps every angular gap below pi, so the polygon stays simple
  std::uniform_real_distribution<double> jitter(0, 0.5), radius(20, 100), centre(-50, 50);
  std::vector<double> angles(n);
  for (int i = 0; i < n; ++i) angles[i] = (i + jitter(rng)) * 2 * M_PI / n;
  const double cx = centre(rng), cy = centre(rng);
  std::vector<tools::Point> out;
  for (double a : angles) {
    const double r = radius(rng);
    out.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return out;
}

}  // namespace pathagent::testing
