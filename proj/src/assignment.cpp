#include "tvwb/assignment.hpp"

#include <cmath>
#include <limits>

#include "tvwb/error.hpp"

namespace tvwb {

std::pair<double, std::vector<int>> solve_assignment(const std::vector<double>& cost, int n) {
    if (n == 0) return {0.0, {}};
    const double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0); // match[col] = row (1-based)
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            int i0 = match[j0], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) { u[match[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        row_to_col[match[j] - 1] = j - 1;
        total += cost[static_cast<std::size_t>(match[j] - 1) * n + (j - 1)];
    }
    return {total, row_to_col};
}

std::vector<int> lex_min_assignment(const std::vector<double>& cost, int n, double eps) {
    if (n == 0) return {};
    double best = solve_assignment(cost, n).first;
    std::vector<int> chosen(n, -1);
    std::vector<bool> col_used(n, false);
    double prefix = 0.0;
    for (int i = 0; i < n; ++i) {
        bool fixed = false;
        for (int j = 0; j < n && !fixed; ++j) {
            if (col_used[j]) continue;
            // optimal completion over rows > i and the remaining columns
            int m = n - i - 1;
            double completion = 0.0;
            if (m > 0) {
                std::vector<double> sub(static_cast<std::size_t>(m) * m);
                std::vector<int> cols;
                for (int c = 0; c < n; ++c)
                    if (!col_used[c] && c != j) cols.push_back(c);
                for (int r = 0; r < m; ++r)
                    for (int c = 0; c < m; ++c)
                        sub[static_cast<std::size_t>(r) * m + c] =
                            cost[static_cast<std::size_t>(i + 1 + r) * n + cols[c]];
                completion = solve_assignment(sub, m).first;
            }
            double total = prefix + cost[static_cast<std::size_t>(i) * n + j] + completion;
            if (total <= best + eps) {
                chosen[i] = j;
                col_used[j] = true;
                prefix += cost[static_cast<std::size_t>(i) * n + j];
                fixed = true;
            }
        }
        if (!fixed) fail(ErrorKind::invalid_input, "lexicographic refinement lost the optimum");
    }
    return chosen;
}

} // namespace tvwb
