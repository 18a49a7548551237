#pragma once

#include <utility>
#include <vector>

namespace tvwb {

// Exact minimum-cost perfect assignment on a square cost matrix (row-major),
// Hungarian method with potentials, O(n^3).
std::pair<double, std::vector<int>> solve_assignment(const std::vector<double>& cost, int n);

// Among all assignments within eps of the optimum, the lexicographically
// least one (compared by the image tuple row 0, row 1, ...).
std::vector<int> lex_min_assignment(const std::vector<double>& cost, int n, double eps = 1e-9);

} // namespace tvwb
