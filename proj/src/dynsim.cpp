#include "tvwb/dynsim.hpp"

#include <algorithm>
#include <cmath>

#include "tvwb/caps.hpp"
#include "tvwb/rng.hpp"

namespace tvwb {

namespace {

double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0; // guards the 1.0-after-rounding edge
    return f;
}

int start_state_of(const SystemDescriptor& d, const PointSample& x) {
    switch (d.kind) {
    case SystemKind::bernoulli:
        return x.stream.front() - 1;
    case SystemKind::markov:
        return x.stream.back() - 1;
    case SystemKind::finite_group_extension:
        if (!x.fiber_group)
            fail(ErrorKind::invalid_input, "sample lacks a group fiber coordinate");
        return (x.stream.front() - 1) * d.group->order() + *x.fiber_group;
    case SystemKind::circle_extension:
        fail(ErrorKind::invalid_input, "circle extensions have no finite state space");
    }
    return 0;
}

} // namespace

std::string kind_name(SystemKind k) {
    switch (k) {
    case SystemKind::bernoulli: return "bernoulli";
    case SystemKind::markov: return "markov";
    case SystemKind::finite_group_extension: return "finite-group-extension";
    case SystemKind::circle_extension: return "circle-extension";
    }
    return "?";
}

SystemDescriptor SystemDescriptor::make_bernoulli(ProbVector p) {
    return SystemDescriptor{SystemKind::bernoulli, std::move(p), {}, {}, {}, {}};
}

SystemDescriptor SystemDescriptor::make_markov(StochasticMatrix m) {
    auto endp = end_p_check(m);
    if (!endp.ok())
        fail(ErrorKind::invalid_input,
             "matrix is not a p-endomorphism: " + endp.rejection->reason);
    if (!irreducible(m)) fail(ErrorKind::invalid_input, "matrix is reducible");
    SystemDescriptor d{SystemKind::markov, *endp.p, std::move(m), {}, {}, {}};
    return d;
}

SystemDescriptor SystemDescriptor::make_group_extension(ProbVector p, FiniteAbelianGroup g,
                                                        std::vector<int> cocycle) {
    if (static_cast<int>(cocycle.size()) != p.size())
        fail(ErrorKind::invalid_input,
             "cocycle must assign one group element per branch symbol (memory-1)");
    for (int e : cocycle)
        if (e < 0 || e >= g.order())
            fail(ErrorKind::invalid_input, "cocycle element out of range");
    return SystemDescriptor{SystemKind::finite_group_extension, std::move(p), {}, std::move(g),
                            std::move(cocycle), {}};
}

SystemDescriptor SystemDescriptor::make_circle_extension(ProbVector p,
                                                         std::vector<double> alphas) {
    if (static_cast<int>(alphas.size()) != p.size())
        fail(ErrorKind::invalid_input, "need one rotation amount per branch symbol");
    for (double a : alphas)
        if (!(a >= 0.0 && a < 1.0))
            fail(ErrorKind::invalid_input, "rotation amounts live in [0,1)");
    return SystemDescriptor{SystemKind::circle_extension, std::move(p), {}, {}, {},
                            std::move(alphas)};
}

PreimageGraph SystemDescriptor::graph() const {
    switch (kind) {
    case SystemKind::bernoulli:
        return bernoulli_graph(p);
    case SystemKind::markov:
        return preimage_graph_from_markov(*matrix);
    case SystemKind::finite_group_extension:
        return preimage_graph_from_extension(p, *group, cocycle);
    case SystemKind::circle_extension:
        fail(ErrorKind::invalid_input, "circle extensions have no finite preimage graph");
    }
    fail(ErrorKind::invalid_input, "unknown system kind");
}

PointSample sample_point(const SystemDescriptor& d, int length, std::uint64_t seed) {
    if (length < 1) fail(ErrorKind::invalid_input, "sample length must be >= 1");
    PointSample out;
    out.seed = seed;
    std::uint64_t sym_seed = derive_seed(seed, stream::point_symbols, 0);
    std::uint64_t fib_seed = derive_seed(seed, stream::point_fiber, 0);
    out.seed_trace = {seed, sym_seed, fib_seed};
    Rng symbols(sym_seed);

    switch (d.kind) {
    case SystemKind::bernoulli:
        for (int t = 0; t < length; ++t)
            out.stream.push_back(symbols.next_category(d.p.components()) + 1);
        break;
    case SystemKind::markov: {
        auto q = stationary(*d.matrix);
        int cur = symbols.next_category(q);
        out.stream.push_back(cur + 1);
        for (int t = 1; t < length; ++t) {
            std::vector<double> row(d.matrix->n);
            for (int j = 0; j < d.matrix->n; ++j) row[j] = d.matrix->at(cur, j);
            cur = symbols.next_category(row);
            out.stream.push_back(cur + 1);
        }
        break;
    }
    case SystemKind::finite_group_extension: {
        for (int t = 0; t < length; ++t)
            out.stream.push_back(symbols.next_category(d.p.components()) + 1);
        Rng fiber(fib_seed);
        out.fiber_group = static_cast<int>(fiber.next_below(d.group->order()));
        break;
    }
    case SystemKind::circle_extension: {
        for (int t = 0; t < length; ++t)
            out.stream.push_back(symbols.next_category(d.p.components()) + 1);
        Rng fiber(fib_seed);
        out.fiber_circle = fiber.next_double();
        break;
    }
    }
    return out;
}

TreeName preimage_tree(const SystemDescriptor& d, const PointSample& x, int height,
                       TreeLabel label) {
    if (x.stream.empty()) fail(ErrorKind::invalid_input, "empty point sample");
    const ProbVector& p = d.p;

    if (d.kind == SystemKind::circle_extension) {
        if (label != TreeLabel::symbol_and_fiber)
            fail(ErrorKind::mismatch, "circle extensions need symbol-and-fiber labels");
        if (!x.fiber_circle)
            fail(ErrorKind::invalid_input, "sample lacks a circle fiber coordinate");
        TreeName t(p, height, LabelKind::symbol_circle);
        const TreeIndex& idx = t.index();
        std::vector<double> fiber(idx.node_count());
        fiber[0] = *x.fiber_circle;
        for (std::int64_t u = 0; u < idx.internal_count(); ++u)
            for (int b = 1; b <= p.size(); ++b) {
                std::int64_t c = idx.child(u, b);
                fiber[c] = frac(fiber[u] - d.alphas[b - 1]);
                t.label(c).sym = b;
                t.label(c).fiber = fiber[c];
                t.label(c).has_fiber = true;
            }
        return t;
    }

    if (d.kind == SystemKind::bernoulli && label == TreeLabel::symbol) {
        TreeName t(p, height, LabelKind::discrete);
        const TreeIndex& idx = t.index();
        for (std::int64_t u = 0; u < idx.internal_count(); ++u)
            for (int b = 1; b <= p.size(); ++b)
                t.label(idx.child(u, b)).sym = b;
        return t;
    }

    if (d.kind == SystemKind::markov) {
        if (label != TreeLabel::symbol)
            fail(ErrorKind::mismatch, "markov tree names carry state labels only");
        PreimageGraph g = d.graph();
        TreeName t(p, height, LabelKind::discrete);
        const TreeIndex& idx = t.index();
        std::vector<int> state(idx.node_count());
        state[0] = x.stream.back() - 1;
        for (std::int64_t u = 0; u < idx.internal_count(); ++u)
            for (int b = 1; b <= p.size(); ++b) {
                std::int64_t c = idx.child(u, b);
                state[c] = g.target[state[u]][b - 1];
                t.label(c).sym = state[c] + 1;
            }
        return t;
    }

    if (d.kind == SystemKind::finite_group_extension) {
        if (!x.fiber_group)
            fail(ErrorKind::invalid_input, "sample lacks a group fiber coordinate");
        TreeName t(p, height, LabelKind::discrete);
        const TreeIndex& idx = t.index();
        std::vector<int> fiber(idx.node_count());
        fiber[0] = *x.fiber_group;
        bool with_fiber = label == TreeLabel::symbol_and_fiber;
        for (std::int64_t u = 0; u < idx.internal_count(); ++u)
            for (int b = 1; b <= p.size(); ++b) {
                std::int64_t c = idx.child(u, b);
                fiber[c] = d.group->sub(fiber[u], d.cocycle[b - 1]);
                t.label(c).sym = b;
                if (with_fiber) t.label(c).aux = fiber[c];
            }
        return t;
    }

    fail(ErrorKind::mismatch, "unsupported label choice for this system kind");
}

std::vector<double> p_name(const SystemDescriptor& d, const PointSample& x, int length) {
    std::vector<double> out;
    out.reserve(length);
    if (d.kind == SystemKind::markov) {
        if (length + 1 > static_cast<int>(x.stream.size()))
            fail(ErrorKind::invalid_input, "p-name length exceeds the simulated coordinates");
        int L = static_cast<int>(x.stream.size());
        for (int t = 0; t < length; ++t)
            out.push_back(d.matrix->at(x.stream[L - 2 - t] - 1, x.stream[L - 1 - t] - 1));
        return out;
    }
    if (length > static_cast<int>(x.stream.size()))
        fail(ErrorKind::invalid_input, "p-name length exceeds the simulated coordinates");
    for (int t = 0; t < length; ++t) out.push_back(d.p.component(x.stream[t]));
    return out;
}

double discretize(double x, int N) {
    if (!(x >= 0.0 && x < 1.0)) fail(ErrorKind::invalid_input, "circle point must lie in [0,1)");
    if (N < 1 || N > 60) fail(ErrorKind::invalid_input, "dyadic level out of range");
    double scale = std::ldexp(1.0, N); // 2^N
    auto t = static_cast<std::int64_t>(std::floor(x * scale));
    t = std::min<std::int64_t>(t, static_cast<std::int64_t>(scale) - 1);
    return (2.0 * static_cast<double>(t) + 1.0) / std::ldexp(1.0, N + 1);
}

GenericityReport genericity(const SystemDescriptor& d, const PointSample& x, int levels,
                            const std::vector<int>& cell_of_state) {
    if (levels < 1) fail(ErrorKind::invalid_input, "genericity depth must be >= 1");
    PreimageGraph g = d.graph();
    int n = g.n_states;
    if (static_cast<std::uint64_t>(levels) * n * n > current_caps().mc_work)
        fail(ErrorKind::too_large, "genericity work exceeds the configured cap");

    std::vector<int> cells = cell_of_state;
    if (cells.empty()) {
        cells.resize(n);
        for (int i = 0; i < n; ++i) cells[i] = i;
    }
    if (static_cast<int>(cells.size()) != n)
        fail(ErrorKind::invalid_input, "partition must label every graph state");
    int n_cells = 1 + *std::max_element(cells.begin(), cells.end());

    // one-step preimage mass transfer: state a sends sum of p_j over branches
    // j with target b
    std::vector<double> step(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int j = 1; j <= g.p.size(); ++j)
            step[static_cast<std::size_t>(a) * n + g.target[a][j - 1]] += g.p.component(j);

    GenericityReport rep;
    rep.start_state = start_state_of(d, x);
    rep.theta.assign(n_cells, 0.0);

    std::vector<double> mu(n, 0.0), next(n, 0.0);
    mu[rep.start_state] = 1.0;
    for (int k = 1; k <= levels; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int a = 0; a < n; ++a) {
            if (mu[a] == 0.0) continue;
            for (int b = 0; b < n; ++b)
                next[b] += mu[a] * step[static_cast<std::size_t>(a) * n + b];
        }
        mu.swap(next);
        for (int b = 0; b < n; ++b) rep.theta[cells[b]] += mu[b];
    }
    for (double& v : rep.theta) v /= levels;

    // the stationary law of the graph states, pushed through the partition
    std::vector<double> pi(n, 0.0);
    switch (d.kind) {
    case SystemKind::bernoulli:
        for (int i = 0; i < n; ++i) pi[i] = d.p.component(i + 1);
        break;
    case SystemKind::markov: {
        auto q = stationary(*d.matrix);
        pi = q;
        break;
    }
    case SystemKind::finite_group_extension: {
        int order = d.group->order();
        for (int i = 0; i < d.p.size(); ++i)
            for (int h = 0; h < order; ++h) pi[i * order + h] = d.p.component(i + 1) / order;
        break;
    }
    default:
        break;
    }
    rep.reference.assign(n_cells, 0.0);
    for (int b = 0; b < n; ++b) rep.reference[cells[b]] += pi[b];

    rep.deviation = 0.0;
    for (int c = 0; c < n_cells; ++c) rep.deviation += std::abs(rep.theta[c] - rep.reference[c]);
    return rep;
}

namespace {

TreeLabel default_label(const SystemDescriptor& d) {
    switch (d.kind) {
    case SystemKind::bernoulli:
    case SystemKind::markov:
        return TreeLabel::symbol;
    default:
        return TreeLabel::symbol_and_fiber;
    }
}

double eps_hat_from_values(const std::vector<double>& values) {
    int pairs = static_cast<int>(values.size());
    for (int k = 1; k <= 100; ++k) {
        double eps = k / 100.0;
        int below = 0;
        for (double v : values)
            if (v < eps) ++below;
        double fraction = static_cast<double>(below) / pairs;
        if (fraction + 1e-12 >= (1.0 - eps) * (1.0 - eps)) return eps;
    }
    return 1.0;
}

} // namespace

TvwbProfile estimate_tvwb_profile(const SystemDescriptor& d, const std::vector<int>& heights,
                                  int samples, int pairs, std::uint64_t seed) {
    if (heights.empty()) fail(ErrorKind::invalid_input, "no heights requested");
    if (samples < 1 || pairs < 1)
        fail(ErrorKind::invalid_input, "need at least one sample and one pair");
    int maxh = *std::max_element(heights.begin(), heights.end());
    for (int h : heights)
        if (h < 1) fail(ErrorKind::invalid_input, "heights must be >= 1");
    double tree_work = static_cast<double>(maxh) * std::pow(d.p.size(), maxh);
    if (tree_work > static_cast<double>(current_caps().mc_work))
        fail(ErrorKind::too_large, "height work n*s^n exceeds the configured cap");

    TreeLabel label = default_label(d);
    std::vector<TreeName> trees;
    trees.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        PointSample x = sample_point(d, maxh + 2, derive_seed(seed, stream::sample_points, i));
        trees.push_back(preimage_tree(d, x, maxh, label));
    }

    std::vector<std::pair<int, int>> chosen;
    chosen.reserve(pairs);
    for (int k = 0; k < pairs; ++k) {
        Rng rng(derive_seed(seed, stream::pair_choice, k));
        int i = static_cast<int>(rng.next_below(samples));
        int j = static_cast<int>(rng.next_below(samples));
        chosen.emplace_back(i, j);
    }

    TvwbProfile prof;
    prof.heights = heights;
    prof.samples = samples;
    prof.pairs = pairs;
    for (int h : heights) {
        std::vector<double> values;
        values.reserve(pairs);
        for (auto [i, j] : chosen) {
            TreeName a = trees[i].truncated(h);
            TreeName b = trees[j].truncated(h);
            values.push_back(tbar_exact(a, b).value);
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        prof.mean_distance.push_back(mean / pairs);
        prof.eps_hat.push_back(eps_hat_from_values(values));
    }
    return prof;
}

McSummary process_tbar_mc(const SystemDescriptor& sys_a, const SystemDescriptor& sys_b,
                          int height, int pairs, std::uint64_t seed) {
    if (!sys_a.p.same_as(sys_b.p))
        fail(ErrorKind::mismatch, "systems must share the same probability vector");
    if (height < 1) fail(ErrorKind::invalid_input, "height must be >= 1");
    if (pairs < 0) fail(ErrorKind::invalid_input, "pair count must be >= 0");
    double tree_work = static_cast<double>(height) * std::pow(sys_a.p.size(), height);
    if (tree_work > static_cast<double>(current_caps().mc_work))
        fail(ErrorKind::too_large, "height work n*s^n exceeds the configured cap");

    McSummary out;
    out.pairs = pairs;
    if (pairs == 0) return out;

    TreeLabel label_a = default_label(sys_a);
    TreeLabel label_b = default_label(sys_b);
    for (int k = 0; k < pairs; ++k) {
        PointSample xa = sample_point(sys_a, height + 2, derive_seed(seed, stream::mc_left, k));
        PointSample xb = sample_point(sys_b, height + 2, derive_seed(seed, stream::mc_right, k));
        TreeName ta = preimage_tree(sys_a, xa, height, label_a);
        TreeName tb = preimage_tree(sys_b, xb, height, label_b);
        out.values.push_back(tbar_exact(ta, tb).value);
    }
    double sum = 0.0;
    for (double v : out.values) sum += v;
    out.mean = sum / pairs;
    std::vector<double> sorted = out.values;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double alpha) {
        auto idx = static_cast<std::size_t>(std::ceil(alpha * pairs)) - 1;
        idx = std::min(idx, sorted.size() - 1);
        return sorted[idx];
    };
    out.q50 = quantile(0.5);
    out.q90 = quantile(0.9);
    out.q99 = quantile(0.99);
    return out;
}

} // namespace tvwb
