#include "tvwb/markov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>

#include "tvwb/caps.hpp"

namespace tvwb {

namespace {

constexpr double kEntryTol = 1e-12;

void validate_rows(const StochasticMatrix& m) {
    if (m.n < 1) fail(ErrorKind::invalid_input, "matrix must be at least 1x1");
    for (int i = 0; i < m.n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < m.n; ++j) {
            double e = m.at(i, j);
            if (e < -kEntryTol)
                fail(ErrorKind::invalid_input,
                     "negative entry in row " + std::to_string(i + 1));
            sum += e;
        }
        if (std::abs(sum - 1.0) > kSumTolerance)
            fail(ErrorKind::invalid_input,
                 "row " + std::to_string(i + 1) + " does not sum to 1");
    }
}

std::vector<std::uint64_t> adjacency_masks(const StochasticMatrix& m) {
    std::vector<std::uint64_t> adj(m.n, 0);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j)
            if (m.at(i, j) > kEntryTol) adj[i] |= 1ull << j;
    return adj;
}

} // namespace

StochasticMatrix StochasticMatrix::from_fractions(const std::vector<std::vector<Rational>>& rows) {
    StochasticMatrix m;
    m.n = static_cast<int>(rows.size());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m.n)
            fail(ErrorKind::invalid_input, "matrix is not square");
        for (const auto& e : row) {
            m.exact.push_back(e);
            m.a.push_back(e.value());
        }
    }
    validate_rows(m);
    return m;
}

StochasticMatrix StochasticMatrix::from_reals(const std::vector<std::vector<double>>& rows) {
    StochasticMatrix m;
    m.n = static_cast<int>(rows.size());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m.n)
            fail(ErrorKind::invalid_input, "matrix is not square");
        for (double e : row) m.a.push_back(e);
    }
    validate_rows(m);
    return m;
}

bool irreducible(const StochasticMatrix& m) {
    if (m.n > 64) fail(ErrorKind::too_large, "matrices beyond 64 states are not supported");
    auto adj = adjacency_masks(m);
    // reach[i] = states reachable from i in >= 1 steps
    std::vector<std::uint64_t> reach = adj;
    for (int pass = 0; pass < m.n; ++pass) {
        bool changed = false;
        for (int i = 0; i < m.n; ++i) {
            std::uint64_t acc = reach[i];
            std::uint64_t scan = reach[i];
            while (scan) {
                int j = __builtin_ctzll(scan);
                scan &= scan - 1;
                acc |= reach[j];
            }
            if (acc != reach[i]) { reach[i] = acc; changed = true; }
        }
        if (!changed) break;
    }
    std::uint64_t full = (m.n == 64) ? ~0ull : ((1ull << m.n) - 1);
    for (int i = 0; i < m.n; ++i)
        if (reach[i] != full) return false;
    return true;
}

bool primitive(const StochasticMatrix& m) {
    if (m.n > 64) fail(ErrorKind::too_large, "matrices beyond 64 states are not supported");
    auto adj = adjacency_masks(m);
    std::uint64_t full = (m.n == 64) ? ~0ull : ((1ull << m.n) - 1);
    std::vector<std::uint64_t> power = adj;
    std::int64_t bound = static_cast<std::int64_t>(m.n - 1) * (m.n - 1) + 1;
    for (std::int64_t k = 1; k <= bound; ++k) {
        bool all = true;
        for (int i = 0; i < m.n && all; ++i) all = power[i] == full;
        if (all) return true;
        // power <- power * adj (boolean)
        std::vector<std::uint64_t> next(m.n, 0);
        for (int i = 0; i < m.n; ++i) {
            std::uint64_t scan = power[i];
            while (scan) {
                int j = __builtin_ctzll(scan);
                scan &= scan - 1;
                next[i] |= adj[j];
            }
        }
        power.swap(next);
    }
    return false;
}

std::vector<double> stationary(const StochasticMatrix& m) {
    if (!irreducible(m))
        fail(ErrorKind::invalid_input, "matrix is reducible; no unique stationary vector");
    int n = m.n;
    // Solve (A^T - I) q = 0 with the last equation replaced by sum(q) = 1.
    std::vector<double> mat(static_cast<std::size_t>(n) * (n + 1), 0.0);
    auto cell = [&](int r, int c) -> double& { return mat[static_cast<std::size_t>(r) * (n + 1) + c]; };
    for (int r = 0; r < n - 1; ++r) {
        for (int c = 0; c < n; ++c) cell(r, c) = m.at(c, r) - (r == c ? 1.0 : 0.0);
        cell(r, n) = 0.0;
    }
    for (int c = 0; c < n; ++c) cell(n - 1, c) = 1.0;
    cell(n - 1, n) = 1.0;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(cell(r, col)) > std::abs(cell(pivot, col))) pivot = r;
        if (std::abs(cell(pivot, col)) < 1e-14)
            fail(ErrorKind::invalid_input, "stationary system is singular");
        if (pivot != col)
            for (int c = col; c <= n; ++c) std::swap(cell(pivot, c), cell(col, c));
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = cell(r, col) / cell(col, col);
            if (f == 0.0) continue;
            for (int c = col; c <= n; ++c) cell(r, c) -= f * cell(col, c);
        }
    }
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = cell(i, n) / cell(i, i);

    double residual = 0.0;
    for (int j = 0; j < n; ++j) {
        double qa = 0.0;
        for (int i = 0; i < n; ++i) qa += q[i] * m.at(i, j);
        residual += std::abs(qa - q[j]);
    }
    if (residual > kSumTolerance)
        fail(ErrorKind::invalid_input, "stationary residual above tolerance");
    for (double v : q)
        if (!(v > 0.0))
            fail(ErrorKind::invalid_input, "stationary vector has a nonpositive component");
    return q;
}

EndPResult end_p_check(const StochasticMatrix& m) {
    EndPResult out;
    if (m.has_exact()) {
        std::vector<Rational> first;
        for (int i = 0; i < m.n; ++i) {
            std::vector<Rational> row;
            for (int j = 0; j < m.n; ++j)
                if (m.exact_at(i, j).num != 0) row.push_back(m.exact_at(i, j));
            std::sort(row.begin(), row.end());
            if (i == 0) {
                first = row;
            } else if (row != first) {
                out.rejection = EndPRejection{i + 1, "row multiset differs from row 1"};
                return out;
            }
        }
        if (first.size() < 2) {
            out.rejection = EndPRejection{0, "rows carry fewer than 2 nonzero entries"};
            return out;
        }
        out.p = ProbVector::from_fractions(first);
        return out;
    }
    std::vector<double> first;
    for (int i = 0; i < m.n; ++i) {
        std::vector<double> row;
        for (int j = 0; j < m.n; ++j)
            if (m.at(i, j) > kEntryTol) row.push_back(m.at(i, j));
        std::sort(row.begin(), row.end());
        if (i == 0) {
            first = row;
        } else {
            bool same = row.size() == first.size();
            for (std::size_t k = 0; same && k < row.size(); ++k)
                same = std::abs(row[k] - first[k]) <= kClassTolerance;
            if (!same) {
                out.rejection = EndPRejection{i + 1, "row multiset differs from row 1"};
                return out;
            }
        }
    }
    if (first.size() < 2) {
        out.rejection = EndPRejection{0, "rows carry fewer than 2 nonzero entries"};
        return out;
    }
    out.p = ProbVector::from_reals(first);
    return out;
}

PreimageGraph preimage_graph_from_markov(const StochasticMatrix& m) {
    auto endp = end_p_check(m);
    if (!endp.ok())
        fail(ErrorKind::invalid_input,
             "matrix is not a p-endomorphism: " + endp.rejection->reason +
                 (endp.rejection->row ? " (row " + std::to_string(endp.rejection->row) + ")" : ""));
    if (!irreducible(m))
        fail(ErrorKind::invalid_input, "matrix is reducible");
    const ProbVector& p = *endp.p;
    PreimageGraph g(p, m.n);
    for (int i = 0; i < m.n; ++i) {
        g.state_names[i] = std::to_string(i + 1);
        for (int cls = 0; cls < p.class_count(); ++cls) {
            double w = p.class_weight(cls);
            std::vector<int> targets;
            for (int j = 0; j < m.n; ++j)
                if (std::abs(m.at(i, j) - w) <= kClassTolerance && m.at(i, j) > kEntryTol)
                    targets.push_back(j);
            const auto& symbols = p.class_symbols(cls);
            if (targets.size() != symbols.size())
                fail(ErrorKind::invalid_input,
                     "weight class multiplicity mismatch in row " + std::to_string(i + 1));
            for (std::size_t k = 0; k < symbols.size(); ++k)
                g.target[i][symbols[k] - 1] = targets[k];
        }
    }
    return g;
}

PreimageGraph bernoulli_graph(const ProbVector& p) {
    PreimageGraph g(p, p.size());
    for (int i = 0; i < p.size(); ++i) {
        g.state_names[i] = std::to_string(i + 1);
        for (int j = 1; j <= p.size(); ++j) g.target[i][j - 1] = j - 1;
    }
    return g;
}

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> ord) : orders(std::move(ord)) {
    if (orders.empty()) fail(ErrorKind::invalid_input, "group needs at least one cyclic factor");
    for (int n : orders) {
        if (n < 1) fail(ErrorKind::invalid_input, "cyclic factor order must be >= 1");
        order_ *= n;
    }
}

int FiniteAbelianGroup::add(int a, int b) const {
    int out = 0, mult = 1;
    for (int n : orders) {
        int ca = a % n, cb = b % n;
        out += ((ca + cb) % n) * mult;
        a /= n; b /= n;
        mult *= n;
    }
    return out;
}

int FiniteAbelianGroup::sub(int a, int b) const {
    int out = 0, mult = 1;
    for (int n : orders) {
        int ca = a % n, cb = b % n;
        out += ((ca - cb + n) % n) * mult;
        a /= n; b /= n;
        mult *= n;
    }
    return out;
}

std::string FiniteAbelianGroup::name(int g) const {
    if (orders.size() == 1) return std::to_string(g);
    std::string out = "(";
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(g % orders[i]);
        g /= orders[i];
    }
    out.push_back(')');
    return out;
}

PreimageGraph preimage_graph_from_extension(const ProbVector& p, const FiniteAbelianGroup& grp,
                                            const std::vector<int>& cocycle) {
    if (static_cast<int>(cocycle.size()) != p.size())
        fail(ErrorKind::invalid_input,
             "cocycle must assign one group element per branch symbol (memory-1)");
    for (int g : cocycle)
        if (g < 0 || g >= grp.order())
            fail(ErrorKind::invalid_input, "cocycle element out of range");
    int s = p.size(), order = grp.order();
    PreimageGraph g(p, s * order);
    for (int i = 0; i < s; ++i) {
        for (int h = 0; h < order; ++h) {
            int state = i * order + h;
            g.state_names[state] = "(" + std::to_string(i + 1) + "," + grp.name(h) + ")";
            for (int j = 1; j <= s; ++j)
                g.target[state][j - 1] = (j - 1) * order + grp.sub(h, cocycle[j - 1]);
        }
    }
    return g;
}

std::optional<bool> sufficient_mixing_uniform(const StochasticMatrix& m) {
    auto endp = end_p_check(m);
    if (!endp.ok()) return std::nullopt;
    if (endp.p->class_count() != 1) return std::nullopt; // needs uniform p
    return primitive(m);
}

bool sufficient_shared_entries(const StochasticMatrix& m) {
    auto endp = end_p_check(m);
    if (!endp.ok())
        fail(ErrorKind::invalid_input, "matrix is not a p-endomorphism");
    if (!irreducible(m))
        fail(ErrorKind::invalid_input, "matrix is reducible");
    for (int r1 = 0; r1 < m.n; ++r1) {
        for (int r2 = r1 + 1; r2 < m.n; ++r2) {
            bool found = false;
            for (int c = 0; c < m.n && !found; ++c)
                found = m.at(r1, c) > kEntryTol && m.at(r2, c) > kEntryTol &&
                        std::abs(m.at(r1, c) - m.at(r2, c)) <= kClassTolerance;
            if (!found) return false;
        }
    }
    return true;
}

namespace {

struct BfsEntry {
    std::uint64_t prev = 0;
    int cls = -1;
    int depth = 0;
    std::vector<std::uint8_t> choice; // chosen branch symbol per set bit of prev, ascending
};

} // namespace

TvwbVerdict decide_tvwb(const PreimageGraph& g) {
    if (g.n_states < 1) fail(ErrorKind::invalid_input, "graph has no states");
    if (g.n_states > 64) fail(ErrorKind::too_large, "graphs beyond 64 states are not supported");
    for (int u = 0; u < g.n_states; ++u)
        for (int j = 0; j < g.p.size(); ++j)
            if (g.target[u][j] < 0 || g.target[u][j] >= g.n_states)
                fail(ErrorKind::invalid_input, "graph edge target out of range");

    TvwbVerdict verdict;
    verdict.length_bound = sync_bound(g.n_states);

    const std::uint64_t successor_cap = current_caps().bfs_successors;
    const std::uint64_t start =
        (g.n_states == 64) ? ~0ull : ((1ull << g.n_states) - 1);

    std::unordered_map<std::uint64_t, BfsEntry> visited;
    visited.emplace(start, BfsEntry{});
    std::deque<std::uint64_t> queue{start};
    std::uint64_t found = 0;
    bool have_singleton = g.n_states == 1;
    if (have_singleton) found = start;

    while (!queue.empty() && !have_singleton) {
        std::uint64_t set = queue.front();
        queue.pop_front();
        int depth = visited[set].depth;

        std::vector<int> members;
        for (int u = 0; u < g.n_states; ++u)
            if (set & (1ull << u)) members.push_back(u);

        for (int cls = 0; cls < g.p.class_count() && !have_singleton; ++cls) {
            // per member: distinct targets reachable with this weight, keyed by
            // the smallest branch symbol that reaches them
            std::vector<std::vector<std::pair<int, int>>> options(members.size());
            std::uint64_t combos = 1;
            for (std::size_t k = 0; k < members.size(); ++k) {
                for (int sym : g.p.class_symbols(cls)) {
                    int tgt = g.target[members[k]][sym - 1];
                    bool seen = false;
                    for (auto& [t, s0] : options[k]) seen = seen || t == tgt;
                    if (!seen) options[k].emplace_back(tgt, sym);
                }
                combos *= options[k].size();
                if (combos > successor_cap)
                    fail(ErrorKind::too_large,
                         "successor enumeration exceeds the cap of " +
                             std::to_string(successor_cap));
            }

            std::vector<std::size_t> pick(members.size(), 0);
            while (true) {
                std::uint64_t next = 0;
                std::vector<std::uint8_t> choice(members.size());
                for (std::size_t k = 0; k < members.size(); ++k) {
                    next |= 1ull << options[k][pick[k]].first;
                    choice[k] = static_cast<std::uint8_t>(options[k][pick[k]].second);
                }
                if (visited.find(next) == visited.end()) {
                    visited.emplace(next, BfsEntry{set, cls, depth + 1, choice});
                    if (__builtin_popcountll(next) == 1) {
                        have_singleton = true;
                        found = next;
                        break;
                    }
                    queue.push_back(next);
                }
                std::size_t pos = members.size();
                while (pos > 0) {
                    --pos;
                    if (++pick[pos] < options[pos].size()) break;
                    pick[pos] = 0;
                    if (pos == 0) { pos = SIZE_MAX; break; }
                }
                if (pos == SIZE_MAX) break;
            }
        }
    }

    if (!have_singleton) {
        verdict.decision = false;
        std::vector<std::uint64_t> masks;
        masks.reserve(visited.size());
        for (const auto& [mask, entry] : visited) masks.push_back(mask);
        std::sort(masks.begin(), masks.end());
        for (std::uint64_t mask : masks) {
            std::vector<int> states;
            for (int u = 0; u < g.n_states; ++u)
                if (mask & (1ull << u)) states.push_back(u);
            verdict.certificate.push_back(std::move(states));
        }
        return verdict;
    }

    verdict.decision = true;
    verdict.depth = visited[found].depth;

    // rebuild the chain of (set, class, choice) from the start set to the singleton
    std::vector<std::uint64_t> chain{found};
    while (chain.back() != start) chain.push_back(visited[chain.back()].prev);
    std::reverse(chain.begin(), chain.end());

    TvwbWitness witness;
    witness.common_endpoint = __builtin_ctzll(found);
    for (std::size_t step = 1; step < chain.size(); ++step) {
        const BfsEntry& e = visited[chain[step]];
        int rep = g.p.class_symbols(e.cls).front();
        witness.symbols.push_back(rep);
        witness.weights.push_back(g.p.class_weight(e.cls));
    }
    witness.paths.resize(g.n_states);
    for (int u0 = 0; u0 < g.n_states; ++u0) {
        int cur = u0;
        for (std::size_t step = 1; step < chain.size(); ++step) {
            const BfsEntry& e = visited[chain[step]];
            std::uint64_t prev = chain[step - 1];
            // locate cur's position among prev's members
            int pos = __builtin_popcountll(prev & ((1ull << cur) - 1));
            int sym = e.choice[pos];
            cur = g.target[cur][sym - 1];
            witness.paths[u0].emplace_back(sym, cur);
        }
    }
    verdict.witness = std::move(witness);
    return verdict;
}

BigUint sync_bound(int n_states) {
    if (n_states < 1) fail(ErrorKind::invalid_input, "state count must be >= 1");
    return BigUint::pow(static_cast<std::uint64_t>(n_states),
                        3ull * static_cast<std::uint64_t>(n_states));
}

} // namespace tvwb
