#include "tvwb/birkhoff.hpp"

#include <algorithm>
#include <cmath>

#include "tvwb/caps.hpp"

namespace tvwb {

namespace {

constexpr double kZeroTol = 1e-12;
constexpr double kSumTol = 1e-10;

// Kuhn's augmenting paths on a boolean bipartite matrix.
class Matcher {
public:
    Matcher(const std::vector<char>& allowed, int n) : allowed_(allowed), n_(n) {}

    std::vector<int> perfect_matching() {
        std::vector<int> col_to_row(n_, -1);
        for (int r = 0; r < n_; ++r) {
            std::vector<char> seen(n_, 0);
            if (!augment(r, seen, col_to_row)) return {};
        }
        std::vector<int> row_to_col(n_, -1);
        for (int c = 0; c < n_; ++c)
            if (col_to_row[c] >= 0) row_to_col[col_to_row[c]] = c;
        return row_to_col;
    }

private:
    bool augment(int r, std::vector<char>& seen, std::vector<int>& col_to_row) {
        for (int c = 0; c < n_; ++c) {
            if (!allowed_[static_cast<std::size_t>(r) * n_ + c] || seen[c]) continue;
            seen[c] = 1;
            if (col_to_row[c] < 0 || augment(col_to_row[c], seen, col_to_row)) {
                col_to_row[c] = r;
                return true;
            }
        }
        return false;
    }

    const std::vector<char>& allowed_;
    int n_;
};

bool matchable(const std::vector<char>& allowed, int n) {
    return !Matcher(allowed, n).perfect_matching().empty();
}

// Perfect matching on entries >= threshold that maximizes the minimum entry;
// ties resolved to the lexicographically least permutation.
std::vector<int> bottleneck_matching(const std::vector<double>& r, int n) {
    std::vector<double> values;
    for (int i = 0; i < n * n; ++i)
        if (r[i] > kZeroTol) values.push_back(r[i]);
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    auto allowed_at = [&](double t) {
        std::vector<char> allowed(static_cast<std::size_t>(n) * n, 0);
        for (int i = 0; i < n * n; ++i) allowed[i] = r[i] > kZeroTol && r[i] >= t;
        return allowed;
    };

    // largest threshold with a perfect matching
    int lo = 0, hi = static_cast<int>(values.size()) - 1, best = -1;
    while (lo <= hi) {
        int mid = (lo + hi) / 2;
        if (matchable(allowed_at(values[mid]), n)) { best = mid; lo = mid + 1; }
        else hi = mid - 1;
    }
    if (best < 0) return {};
    std::vector<char> allowed = allowed_at(values[best]);

    // lexicographically least: fix rows in order, smallest feasible column
    std::vector<int> perm(n, -1);
    std::vector<char> col_used(n, 0);
    for (int i = 0; i < n; ++i) {
        bool fixed = false;
        for (int c = 0; c < n && !fixed; ++c) {
            if (col_used[c] || !allowed[static_cast<std::size_t>(i) * n + c]) continue;
            // remaining rows must still match the remaining columns
            int m = n - i - 1;
            if (m > 0) {
                std::vector<int> cols;
                for (int cc = 0; cc < n; ++cc)
                    if (!col_used[cc] && cc != c) cols.push_back(cc);
                std::vector<char> sub(static_cast<std::size_t>(m) * m, 0);
                for (int rr = 0; rr < m; ++rr)
                    for (int jc = 0; jc < m; ++jc)
                        sub[static_cast<std::size_t>(rr) * m + jc] =
                            allowed[static_cast<std::size_t>(i + 1 + rr) * n + cols[jc]];
                if (!matchable(sub, m)) continue;
            }
            perm[i] = c;
            col_used[c] = 1;
            fixed = true;
        }
        if (!fixed) return {};
    }
    return perm;
}

// Removes terms while the count exceeds the Caratheodory bound (n-1)^2 + 1:
// the permutation matrices are then affinely dependent, and shifting the
// coefficients along a dependency zeroes one of them without changing the
// reconstruction or the coefficient sum.
void caratheodory_reduce(BirkhoffDecomposition& d) {
    const int n = d.n;
    const std::size_t bound = static_cast<std::size_t>(n - 1) * (n - 1) + 1;
    while (d.terms.size() > bound) {
        const int t = static_cast<int>(d.terms.size());
        const int rows = n * n + 1;
        std::vector<double> m(static_cast<std::size_t>(rows) * t, 0.0);
        for (int k = 0; k < t; ++k) {
            for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i * n + d.terms[k].perm[i]) * t + k] = 1.0;
            m[static_cast<std::size_t>(rows - 1) * t + k] = 1.0;
        }
        // row reduce, tracking pivot columns
        std::vector<int> pivot_of_col(t, -1);
        int rank = 0;
        for (int col = 0; col < t && rank < rows; ++col) {
            int piv = -1;
            double best = 1e-9;
            for (int r = rank; r < rows; ++r)
                if (std::abs(m[static_cast<std::size_t>(r) * t + col]) > best) {
                    best = std::abs(m[static_cast<std::size_t>(r) * t + col]);
                    piv = r;
                }
            if (piv < 0) continue;
            for (int c = 0; c < t; ++c)
                std::swap(m[static_cast<std::size_t>(piv) * t + c],
                          m[static_cast<std::size_t>(rank) * t + c]);
            double lead = m[static_cast<std::size_t>(rank) * t + col];
            for (int c = 0; c < t; ++c) m[static_cast<std::size_t>(rank) * t + c] /= lead;
            for (int r = 0; r < rows; ++r) {
                if (r == rank) continue;
                double f = m[static_cast<std::size_t>(r) * t + col];
                if (f == 0.0) continue;
                for (int c = 0; c < t; ++c)
                    m[static_cast<std::size_t>(r) * t + c] -=
                        f * m[static_cast<std::size_t>(rank) * t + c];
            }
            pivot_of_col[col] = rank;
            ++rank;
        }
        int free_col = -1;
        for (int col = 0; col < t && free_col < 0; ++col)
            if (pivot_of_col[col] < 0) free_col = col;
        if (free_col < 0) break; // independent set, nothing to reduce

        std::vector<double> lambda(t, 0.0);
        lambda[free_col] = 1.0;
        for (int col = 0; col < t; ++col)
            if (pivot_of_col[col] >= 0)
                lambda[col] = -m[static_cast<std::size_t>(pivot_of_col[col]) * t + free_col];

        double theta = -1.0;
        for (int k = 0; k < t; ++k)
            if (lambda[k] < -1e-14) {
                double cand = d.terms[k].coefficient / -lambda[k];
                if (theta < 0.0 || cand < theta) theta = cand;
            }
        if (theta < 0.0) { // flip so a negative direction exists (sum lambda = 0)
            for (double& l : lambda) l = -l;
            for (int k = 0; k < t; ++k)
                if (lambda[k] < -1e-14) {
                    double cand = d.terms[k].coefficient / -lambda[k];
                    if (theta < 0.0 || cand < theta) theta = cand;
                }
        }
        if (theta < 0.0) break;

        std::vector<BirkhoffTerm> kept;
        kept.reserve(d.terms.size() - 1);
        for (int k = 0; k < t; ++k) {
            double c = d.terms[k].coefficient + theta * lambda[k];
            if (c > 1e-14) {
                BirkhoffTerm term = d.terms[k];
                term.coefficient = c;
                kept.push_back(std::move(term));
            }
        }
        if (kept.size() >= d.terms.size()) break;
        d.terms = std::move(kept);
    }
}

} // namespace

BirkhoffDecomposition birkhoff_decompose(const std::vector<double>& m, int n) {
    if (n < 1 || static_cast<int>(m.size()) != n * n)
        fail(ErrorKind::invalid_input, "matrix shape mismatch");
    for (double e : m)
        if (e < -kZeroTol) fail(ErrorKind::invalid_input, "matrix entries must be nonnegative");

    double alpha = 0.0;
    for (int j = 0; j < n; ++j) alpha += m[j];
    for (int i = 0; i < n; ++i) {
        double rs = 0.0, cs = 0.0;
        for (int j = 0; j < n; ++j) {
            rs += m[static_cast<std::size_t>(i) * n + j];
            cs += m[static_cast<std::size_t>(j) * n + i];
        }
        if (std::abs(rs - alpha) > kSumTol || std::abs(cs - alpha) > kSumTol)
            fail(ErrorKind::invalid_input,
                 "row/column sums are not constant (row " + std::to_string(i + 1) + ")");
    }
    if (alpha <= kZeroTol) fail(ErrorKind::invalid_input, "constant sum must be positive");

    BirkhoffDecomposition out;
    out.n = n;
    out.alpha = alpha;

    std::vector<double> r = m;
    for (double& e : r)
        if (e < kZeroTol) e = 0.0;
    int guard = n * n + 2;
    while (guard-- > 0) {
        double maxe = 0.0;
        for (double e : r) maxe = std::max(maxe, e);
        if (maxe <= kZeroTol) break;
        auto perm = bottleneck_matching(r, n);
        if (perm.empty())
            fail(ErrorKind::invalid_input,
                 "no perfect matching on the positive support (constant-sum tolerance violated)");
        double peel = r[static_cast<std::size_t>(0) * n + perm[0]];
        for (int i = 1; i < n; ++i)
            peel = std::min(peel, r[static_cast<std::size_t>(i) * n + perm[i]]);
        for (int i = 0; i < n; ++i) {
            double& cell = r[static_cast<std::size_t>(i) * n + perm[i]];
            cell -= peel;
            if (cell < kZeroTol) cell = 0.0;
        }
        out.terms.push_back(BirkhoffTerm{peel / alpha, perm});
    }
    if (guard < 0)
        fail(ErrorKind::invalid_input, "peeling failed to terminate (tolerance violated)");

    caratheodory_reduce(out);
    return out;
}

double reconstruction_residual(const BirkhoffDecomposition& d, const std::vector<double>& m) {
    std::vector<double> acc(m.size(), 0.0);
    for (const auto& term : d.terms)
        for (int i = 0; i < d.n; ++i)
            acc[static_cast<std::size_t>(i) * d.n + term.perm[i]] += term.coefficient * d.alpha;
    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) worst = std::max(worst, std::abs(acc[i] - m[i]));
    return worst;
}

std::vector<PermTerm> block_decompose(const BlockCoupling& c) {
    const ProbVector& p = c.p;
    int s = p.size();
    if (static_cast<int>(c.entries.size()) != s * s)
        fail(ErrorKind::invalid_input, "coupling shape mismatch");
    for (int b = 1; b <= s; ++b)
        for (int d = 1; d <= s; ++d) {
            double e = c.entries[static_cast<std::size_t>(b - 1) * s + (d - 1)];
            if (e < -kZeroTol)
                fail(ErrorKind::invalid_input, "coupling entries must be nonnegative");
            if (p.class_of(b) != p.class_of(d) && std::abs(e) > kZeroTol)
                fail(ErrorKind::invalid_input,
                     "coupling mass across distinct weight classes must vanish");
        }

    std::vector<std::vector<BirkhoffTerm>> block_terms;
    for (int cls = 0; cls < p.class_count(); ++cls) {
        const auto& syms = p.class_symbols(cls);
        int m = static_cast<int>(syms.size());
        double w = p.class_weight(cls);
        std::vector<double> block(static_cast<std::size_t>(m) * m);
        for (int i = 0; i < m; ++i) {
            double rs = 0.0, cs = 0.0;
            for (int j = 0; j < m; ++j) {
                block[static_cast<std::size_t>(i) * m + j] =
                    c.entries[static_cast<std::size_t>(syms[i] - 1) * s + (syms[j] - 1)];
                rs += c.entries[static_cast<std::size_t>(syms[i] - 1) * s + (syms[j] - 1)];
                cs += c.entries[static_cast<std::size_t>(syms[j] - 1) * s + (syms[i] - 1)];
            }
            if (std::abs(rs - w) > kSumTolerance || std::abs(cs - w) > kSumTolerance)
                fail(ErrorKind::invalid_input,
                     "block rows/columns must sum to the class weight");
        }
        block_terms.push_back(birkhoff_decompose(block, m).terms);
    }

    std::uint64_t combos = 1;
    for (const auto& terms : block_terms) {
        combos *= terms.size();
        if (combos > current_caps().measure_support)
            fail(ErrorKind::too_large, "block measure support exceeds the configured cap");
    }

    std::vector<PermTerm> out;
    std::vector<std::size_t> pick(block_terms.size(), 0);
    while (true) {
        PermTerm term;
        term.probability = 1.0;
        term.images.resize(s);
        for (int cls = 0; cls < p.class_count(); ++cls) {
            const auto& syms = p.class_symbols(cls);
            const BirkhoffTerm& bt = block_terms[cls][pick[cls]];
            term.probability *= bt.coefficient;
            for (std::size_t i = 0; i < syms.size(); ++i)
                term.images[syms[i] - 1] = static_cast<std::uint8_t>(syms[bt.perm[i]]);
        }
        out.push_back(std::move(term));
        std::size_t pos = block_terms.size();
        bool done = true;
        while (pos > 0) {
            --pos;
            if (++pick[pos] < block_terms[pos].size()) { done = false; break; }
            pick[pos] = 0;
        }
        if (done) break;
    }
    return out;
}

AutomorphismMeasure automorphism_measure(const ProbVector& p, int height,
                                         const NodeCouplings& couplings) {
    if (height < 1) fail(ErrorKind::invalid_input, "height must be >= 1");
    if (height > 4)
        fail(ErrorKind::too_large, "automorphism measures are materialized up to height 4 only");
    const std::uint64_t cap = current_caps().measure_support;
    TreeIndex idx(p.size(), height);

    std::map<NodePairKey, std::vector<PermTerm>> decomps;
    auto decomp_for = [&](std::int64_t v, std::int64_t u) -> const std::vector<PermTerm>& {
        NodePairKey key{v, u};
        auto it = decomps.find(key);
        if (it != decomps.end()) return it->second;
        auto cit = couplings.find(key);
        if (cit == couplings.end())
            fail(ErrorKind::invalid_input,
                 "missing coupling for reachable node pair (" + idx.node_label(v) + ", " +
                     idx.node_label(u) + ")");
        if (!cit->second.p.same_as(p))
            fail(ErrorKind::mismatch, "coupling probability vector differs");
        return decomps.emplace(key, block_decompose(cit->second)).first->second;
    };

    struct Partial {
        TreeAutomorphism a;
        double mass;
    };
    std::vector<Partial> partials{{TreeAutomorphism(p, height), 1.0}};

    for (int depth = 0; depth < height; ++depth) {
        std::int64_t lo = idx.level_begin(depth);
        std::int64_t hi = lo + idx.level_size(depth);
        std::vector<Partial> next;
        for (const auto& partial : partials) {
            auto images = partial.a.node_images();
            // expand the product over this level's nodes
            std::vector<Partial> grown{{partial.a, partial.mass}};
            for (std::int64_t v = lo; v < hi; ++v) {
                const auto& terms = decomp_for(v, images[v]);
                std::vector<Partial> expanded;
                expanded.reserve(grown.size() * terms.size());
                for (const auto& g : grown) {
                    for (const auto& term : terms) {
                        Partial e{g.a, g.mass * term.probability};
                        e.a.set_perm(v, term.images);
                        expanded.push_back(std::move(e));
                    }
                }
                grown = std::move(expanded);
                if (grown.size() + next.size() > cap)
                    fail(ErrorKind::too_large,
                         "automorphism measure support exceeds the configured cap");
            }
            for (auto& g : grown) next.push_back(std::move(g));
        }
        partials = std::move(next);
    }

    AutomorphismMeasure out;
    out.support.reserve(partials.size());
    for (auto& partial : partials)
        out.support.emplace_back(std::move(partial.a), partial.mass);
    return out;
}

std::map<NodePairKey, double> induced_pair_mass(const ProbVector& p, int height,
                                                const NodeCouplings& couplings) {
    TreeIndex idx(p.size(), height);
    std::map<NodePairKey, double> mass;
    mass[{0, 0}] = 1.0;
    for (int depth = 0; depth < height; ++depth) {
        std::int64_t lo = idx.level_begin(depth);
        std::int64_t hi = lo + idx.level_size(depth);
        for (auto& [key, value] : mass) {
            auto [v, u] = key;
            if (v < lo || v >= hi || value <= 0.0) continue;
            auto cit = couplings.find(key);
            if (cit == couplings.end())
                fail(ErrorKind::invalid_input,
                     "missing coupling for reachable node pair (" + idx.node_label(v) + ", " +
                         idx.node_label(u) + ")");
            const auto& q = cit->second.entries;
            int s = p.size();
            for (int b = 1; b <= s; ++b)
                for (int c = 1; c <= s; ++c) {
                    double e = q[static_cast<std::size_t>(b - 1) * s + (c - 1)];
                    if (e <= 0.0) continue;
                    mass[{idx.child(v, b), idx.child(u, c)}] += value * e;
                }
        }
    }
    return mass;
}

} // namespace tvwb
