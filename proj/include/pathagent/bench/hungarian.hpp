#pragma once

#include <utility>
#include <vector>

namespace pathagent::bench {

using CostMatrix = std::vector<std::vector<double>>;
using Assignment = std::vector<std::pair<int, int>>;

/// Minimum-cost assignment of min(n, m) (row, col) pairs for an n x m matrix
/// of finite, non-negative costs. Among optimal assignments the one whose
/// pair list, sorted by row, is lexicographically smallest is returned.
Assignment hungarian_assign(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, const Assignment& a);

}  // namespace pathagent::bench
