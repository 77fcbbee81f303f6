#include "pathagent/bench/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathagent::bench {

namespace {

// Shortest-augmenting-path Hungarian method with potentials, O(n^2 m), for
// n <= m. Returns the column of each row.
std::vector<int> solve_wide(const CostMatrix& a) {
  const int n = static_cast<int>(a.size());
  const int m = n ? static_cast<int>(a[0].size()) : 0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1), v(m + 1);
  std::vector<int> p(m + 1), way(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j]) col[p[j] - 1] = j - 1;
  }
  return col;
}

// Optimal assignment restricted to the given rows and columns. Returns the
// column per entry of `rows` (-1 when unassigned) and the total cost.
std::pair<std::vector<int>, double> solve_subset(const CostMatrix& cost, const std::vector<int>& rows,
                                                 const std::vector<int>& cols) {
  std::vector<int> out(rows.size(), -1);
  if (rows.empty() || cols.empty()) return {out, 0.0};
  double total = 0;
  if (rows.size() <= cols.size()) {
    CostMatrix sub(rows.size(), std::vector<double>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) sub[r][c] = cost[rows[r]][cols[c]];
    }
    auto col = solve_wide(sub);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out[r] = cols[col[r]];
      total += sub[r][col[r]];
    }
  } else {
    CostMatrix sub(cols.size(), std::vector<double>(rows.size()));  // transposed
    for (std::size_t c = 0; c < cols.size(); ++c) {
      for (std::size_t r = 0; r < rows.size(); ++r) sub[c][r] = cost[rows[r]][cols[c]];
    }
    auto row = solve_wide(sub);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out[row[c]] = cols[c];
      total += sub[c][row[c]];
    }
  }
  return {out, total};
}

}  // namespace

double assignment_cost(const CostMatrix& cost, const Assignment& a) {
  double total = 0;
  for (auto [r, c] : a) total += cost[r][c];
  return total;
}

Assignment hungarian_assign(const CostMatrix& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0 || cost[0].empty()) throw std::invalid_argument("cost matrix must be at least 1x1");
  const int m = static_cast<int>(cost[0].size());
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != m) throw std::invalid_argument("cost matrix is ragged");
    for (double x : row) {
      if (!std::isfinite(x) || x < 0) throw std::invalid_argument("costs must be finite and >= 0");
    }
  }

  std::vector<int> rows(n), cols(m);
  for (int i = 0; i < n; ++i) rows[i] = i;
  for (int j = 0; j < m; ++j) cols[j] = j;
  auto [first, remaining] = solve_subset(cost, rows, cols);
  const double eps = 1e-9 * std::max(1.0, remaining);
  std::size_t pairs_needed = static_cast<std::size_t>(std::min(n, m));

  // Fix rows in order, each to the smallest column that still admits an
  // optimal completion.
  Assignment result;
  std::vector<int> cur = first;  // optimal completion for rows[i..]
  for (int i = 0; i < n; ++i) {
    std::vector<int> rest_rows(rows.begin() + 1, rows.end());
    int known = cur[0];
    int chosen = -1;
    std::vector<int> chosen_completion;
    for (int c : cols) {
      if (known >= 0 && c >= known) break;
      std::vector<int> rest_cols;
      for (int x : cols) {
        if (x != c) rest_cols.push_back(x);
      }
      if (std::min(rest_rows.size(), rest_cols.size()) != pairs_needed - 1) continue;
      auto [completion, rest_cost] = solve_subset(cost, rest_rows, rest_cols);
      if (cost[i][c] + rest_cost <= remaining + eps) {
        chosen = c;
        chosen_completion = std::move(completion);
        break;
      }
    }
    if (chosen < 0 && known >= 0) {
      chosen = known;
      chosen_completion.assign(cur.begin() + 1, cur.end());
    }
    if (chosen >= 0) {
      result.emplace_back(i, chosen);
      remaining -= cost[i][chosen];
      --pairs_needed;
      cols.erase(std::find(cols.begin(), cols.end(), chosen));
      cur = std::move(chosen_completion);
    } else {
      cur.assign(cur.begin() + 1, cur.end());
    }
    rows = std::move(rest_rows);
    if (pairs_needed == 0) break;
  }
  return result;
}

}  // namespace pathagent::bench
