#include "tvwb/tbar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "tvwb/assignment.hpp"
#include "tvwb/caps.hpp"

namespace tvwb {

namespace {

constexpr double kLexEps = 1e-12;

struct Content {
    Label label;
    std::vector<std::uint32_t> kids; // empty on the deepest level
};

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t content_hash(const Content& c) {
    std::uint64_t h = 0x243f6a8885a308d3ull;
    h = hash_mix(h, static_cast<std::uint32_t>(c.label.sym));
    h = hash_mix(h, static_cast<std::uint32_t>(c.label.aux));
    h = hash_mix(h, c.label.has_fiber ? std::bit_cast<std::uint64_t>(c.label.fiber) : 0u);
    for (auto k : c.kids) h = hash_mix(h, k);
    return h;
}

// Shared structural interner: equal subtrees (in either name) get one id, so
// the pair memo only grows with distinct structure.
class Interner {
public:
    std::uint32_t intern(Content&& c) {
        std::uint64_t h = content_hash(c);
        auto& bucket = buckets_[h];
        for (auto id : bucket) {
            const Content& e = entries_[id];
            if (e.label == c.label && e.kids == c.kids) return id;
        }
        entries_.push_back(std::move(c));
        auto id = static_cast<std::uint32_t>(entries_.size() - 1);
        bucket.push_back(id);
        return id;
    }

    const Content& at(std::uint32_t id) const { return entries_[id]; }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<Content> entries_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

class TbarEngine {
public:
    TbarEngine(const TreeName& t1, const TreeName& t2)
        : t1_(t1), t2_(t2), p_(t1.p()), kind_(t1.kind()),
          cap_(current_caps().memo_entries) {
        cid1_ = build(t1);
        cid2_ = build(t2);
    }

    double value() { return rho(cid1_[0], cid2_[0]) / t1_.height(); }

    TreeAutomorphism witness() {
        TreeAutomorphism a(p_, t1_.height());
        walk(a, 0, 0);
        return a;
    }

private:
    std::vector<std::uint32_t> build(const TreeName& t) {
        const TreeIndex& idx = t.index();
        std::vector<std::uint32_t> cid(idx.node_count());
        for (std::int64_t v = idx.node_count() - 1; v >= 0; --v) {
            Content c;
            c.label = t.label(v); // root slot holds a default label
            if (v < idx.internal_count()) {
                c.kids.reserve(p_.size());
                for (int b = 1; b <= p_.size(); ++b)
                    c.kids.push_back(cid[idx.child(v, b)]);
            }
            cid[v] = intern_.intern(std::move(c));
        }
        return cid;
    }

    // minimal matching cost of the subtrees below a matched node pair,
    // relative to unit weight at the pair
    double rho(std::uint32_t c1, std::uint32_t c2) {
        if (c1 == c2) return 0.0;
        const Content& e1 = intern_.at(c1);
        const Content& e2 = intern_.at(c2);
        if (e1.kids.empty()) return 0.0;
        std::uint64_t key = (static_cast<std::uint64_t>(c1) << 32) | c2;
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;

        double total = 0.0;
        for (int cls = 0; cls < p_.class_count(); ++cls) {
            const auto& syms = p_.class_symbols(cls);
            int m = static_cast<int>(syms.size());
            std::vector<double> cost(static_cast<std::size_t>(m) * m);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    std::uint32_t k1 = e1.kids[syms[i] - 1];
                    std::uint32_t k2 = e2.kids[syms[j] - 1];
                    cost[static_cast<std::size_t>(i) * m + j] =
                        p_.component(syms[i]) *
                        (label_distance(kind_, intern_.at(k1).label, intern_.at(k2).label) +
                         rho(k1, k2));
                }
            }
            total += solve_assignment(cost, m).first;
        }
        if (memo_.size() + intern_.size() >= cap_)
            fail(ErrorKind::too_large,
                 "tbar memo exceeds the cap of " + std::to_string(cap_) + " entries");
        memo_.emplace(key, total);
        return total;
    }

    void walk(TreeAutomorphism& a, std::int64_t u, std::int64_t v) {
        const TreeIndex& idx = t1_.index();
        if (u >= idx.internal_count()) return;
        const Content& e1 = intern_.at(cid1_[u]);
        const Content& e2 = intern_.at(cid2_[v]);
        std::vector<std::uint8_t> perm(p_.size());
        for (int cls = 0; cls < p_.class_count(); ++cls) {
            const auto& syms = p_.class_symbols(cls);
            int m = static_cast<int>(syms.size());
            std::vector<double> cost(static_cast<std::size_t>(m) * m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    std::uint32_t k1 = e1.kids[syms[i] - 1];
                    std::uint32_t k2 = e2.kids[syms[j] - 1];
                    cost[static_cast<std::size_t>(i) * m + j] =
                        p_.component(syms[i]) *
                        (label_distance(kind_, intern_.at(k1).label, intern_.at(k2).label) +
                         rho(k1, k2));
                }
            auto assign = lex_min_assignment(cost, m, kLexEps);
            for (int i = 0; i < m; ++i)
                perm[syms[i] - 1] = static_cast<std::uint8_t>(syms[assign[i]]);
        }
        a.set_perm(u, perm);
        for (int b = 1; b <= p_.size(); ++b)
            walk(a, idx.child(u, b), idx.child(v, perm[b - 1]));
    }

    const TreeName& t1_;
    const TreeName& t2_;
    const ProbVector& p_;
    LabelKind kind_;
    std::uint64_t cap_;
    Interner intern_;
    std::vector<std::uint32_t> cid1_, cid2_;
    std::unordered_map<std::uint64_t, double> memo_;
};

void check_compatible(const TreeName& t1, const TreeName& t2) {
    if (t1.height() != t2.height())
        fail(ErrorKind::mismatch, "tree name heights differ");
    if (!t1.p().same_as(t2.p()))
        fail(ErrorKind::mismatch, "tree name probability vectors differ");
    if (t1.kind() != t2.kind())
        fail(ErrorKind::mismatch, "tree name label metrics differ");
}

std::vector<double> node_weights(const TreeName& t) {
    const TreeIndex& idx = t.index();
    const ProbVector& p = t.p();
    std::vector<double> w(idx.node_count(), 1.0);
    for (std::int64_t u = 0; u < idx.internal_count(); ++u)
        for (int b = 1; b <= p.size(); ++b)
            w[idx.child(u, b)] = w[u] * p.component(b);
    return w;
}

} // namespace

TbarResult tbar_exact(const TreeName& t1, const TreeName& t2) {
    check_compatible(t1, t2);
    TbarEngine engine(t1, t2);
    TbarResult out{0.0, TreeAutomorphism(t1.p(), t1.height()), t1.height()};
    out.value = engine.value();
    out.witness = engine.witness();
    return out;
}

double tbar_cost(const TreeName& t1, const TreeName& t2, const TreeAutomorphism& a) {
    check_compatible(t1, t2);
    if (a.height() != t1.height())
        fail(ErrorKind::mismatch, "witness height differs from the names");
    auto img = a.node_images();
    auto w = node_weights(t1);
    double total = 0.0;
    for (std::int64_t v = 1; v < t1.index().node_count(); ++v)
        total += label_distance(t1.kind(), t1.label(v), t2.label(img[v])) * w[v];
    return total / t1.height();
}

TbarResult tbar_bruteforce(const TreeName& t1, const TreeName& t2) {
    check_compatible(t1, t2);
    auto autos = enumerate_automorphisms(t1.p(), t1.height());
    auto w = node_weights(t1);
    TbarResult best{0.0, TreeAutomorphism(t1.p(), t1.height()), t1.height()};
    double best_cost = -1.0;
    for (const auto& a : autos) {
        auto img = a.node_images();
        double total = 0.0;
        for (std::int64_t v = 1; v < t1.index().node_count(); ++v)
            total += label_distance(t1.kind(), t1.label(v), t2.label(img[v])) * w[v];
        if (best_cost < 0.0 || total < best_cost) {
            best_cost = total;
            best.witness = a;
        }
    }
    best.value = best_cost / t1.height();
    return best;
}

StateDistanceTable tbar_states(const PreimageGraph& g, const std::vector<int>& heights) {
    if (heights.empty()) fail(ErrorKind::invalid_input, "no heights requested");
    int maxh = 0;
    for (int h : heights) {
        if (h < 1) fail(ErrorKind::invalid_input, "heights must be >= 1");
        maxh = std::max(maxh, h);
    }
    const ProbVector& p = g.p;
    int n = g.n_states;
    std::size_t cells = static_cast<std::size_t>(n) * n;

    StateDistanceTable out;
    out.n_states = n;
    out.state_names = g.state_names;
    out.heights = heights;
    out.matrices.assign(heights.size(), std::vector<double>(cells, 0.0));

    std::vector<double> prev(cells, 0.0), cur(cells, 0.0);
    for (int r = 1; r <= maxh; ++r) {
        for (int a = 0; a < n; ++a) {
            cur[static_cast<std::size_t>(a) * n + a] = 0.0;
            for (int b = a + 1; b < n; ++b) {
                double total = 0.0;
                for (int cls = 0; cls < p.class_count(); ++cls) {
                    const auto& syms = p.class_symbols(cls);
                    int m = static_cast<int>(syms.size());
                    std::vector<double> cost(static_cast<std::size_t>(m) * m);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j) {
                            int ta = g.target[a][syms[i] - 1];
                            int tb = g.target[b][syms[j] - 1];
                            cost[static_cast<std::size_t>(i) * m + j] =
                                p.component(syms[i]) *
                                ((ta != tb ? 1.0 : 0.0) +
                                 prev[static_cast<std::size_t>(ta) * n + tb]);
                        }
                    total += solve_assignment(cost, m).first;
                }
                cur[static_cast<std::size_t>(a) * n + b] = total;
                cur[static_cast<std::size_t>(b) * n + a] = total;
            }
        }
        for (std::size_t hi = 0; hi < heights.size(); ++hi)
            if (heights[hi] == r)
                for (std::size_t c = 0; c < cells; ++c)
                    out.matrices[hi][c] = cur[c] / r;
        prev.swap(cur);
    }
    return out;
}

} // namespace tvwb
