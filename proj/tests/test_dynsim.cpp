#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tvwb/dynsim.hpp"
#include "tvwb/tbar.hpp"

using namespace tvwb;
using namespace testutil;

TEST_CASE("sampling is deterministic per seed") {
    auto sys = SystemDescriptor::make_markov(counterexample_matrix());
    auto a = sample_point(sys, 50, 99);
    auto b = sample_point(sys, 50, 99);
    CHECK(a.stream == b.stream);
    auto c = sample_point(sys, 50, 100);
    CHECK(a.stream != c.stream);
}

TEST_CASE("pinned-seed empirical frequencies sit near the law") {
    auto bern = SystemDescriptor::make_bernoulli(p_half());
    auto x = sample_point(bern, 10000, 1234);
    double ones = 0;
    for (int s : x.stream) ones += s == 1;
    CHECK(std::abs(ones / 10000.0 - 0.5) <= 0.02);

    auto markov = SystemDescriptor::make_markov(counterexample_matrix());
    auto y = sample_point(markov, 10000, 1234);
    double st1 = 0;
    for (int s : y.stream) st1 += s == 1;
    CHECK(std::abs(st1 / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("bernoulli preimage trees carry the leading symbol") {
    auto sys = SystemDescriptor::make_bernoulli(p_334());
    auto x = sample_point(sys, 4, 5);
    auto t = preimage_tree(sys, x, 3, TreeLabel::symbol);
    for (std::int64_t v = 1; v < t.index().node_count(); ++v)
        CHECK(t.label(v).sym == t.index().leading_symbol(v));
}

TEST_CASE("counterexample trees flip state with every symbol-1 branch") {
    auto sys = SystemDescriptor::make_markov(counterexample_matrix());
    PointSample x;
    x.stream = {2, 1}; // current state 1
    auto t = preimage_tree(sys, x, 6, TreeLabel::symbol);
    for (std::int64_t v = 1; v < t.index().node_count(); ++v) {
        int ones = 0;
        for (int s : t.index().symbols_of(v)) ones += s == 1;
        CHECK(t.label(v).sym == (ones % 2 == 0 ? 1 : 2));
    }
}

TEST_CASE("markov trees match direct preimage enumeration from the matrix") {
    for (auto matrix : {counterexample_matrix(), circulant_matrix()}) {
        auto sys = SystemDescriptor::make_markov(matrix);
        auto endp = end_p_check(matrix);
        const ProbVector& p = *endp.p;
        auto x = sample_point(sys, 8, 21);
        auto t = preimage_tree(sys, x, 6, TreeLabel::symbol);
        const TreeIndex& idx = t.index();
        // oracle: enumerate preimages straight off the matrix rows, assigning
        // class symbols to equal-weight targets in ascending order
        for (std::int64_t u = 0; u < idx.internal_count(); ++u) {
            int state = u == 0 ? x.stream.back() : t.label(u).sym;
            for (int cls = 0; cls < p.class_count(); ++cls) {
                auto syms = p.class_symbols(cls);
                std::vector<int> targets;
                for (int j = 1; j <= matrix.n; ++j)
                    if (std::abs(matrix.at(state - 1, j - 1) - p.class_weight(cls)) <= 1e-12)
                        targets.push_back(j);
                REQUIRE(targets.size() == syms.size());
                for (std::size_t k = 0; k < syms.size(); ++k)
                    CHECK(t.label(idx.child(u, syms[k])).sym == targets[k]);
            }
        }
    }
}

TEST_CASE("group extension fibers telescope and project to the base") {
    auto p = p_334();
    FiniteAbelianGroup g({3});
    auto sys = SystemDescriptor::make_group_extension(p, g, {0, 1, 0});
    auto x = sample_point(sys, 6, 17);
    auto t = preimage_tree(sys, x, 4, TreeLabel::symbol_and_fiber);
    auto base = preimage_tree(sys, x, 4, TreeLabel::symbol);
    const TreeIndex& idx = t.index();
    for (std::int64_t v = 1; v < idx.node_count(); ++v) {
        auto syms = idx.symbols_of(v);
        CHECK(t.label(v).sym == syms.front());
        // fiber = g0 - sum of cocycle values along the node
        int acc = *x.fiber_group;
        for (int s : syms) acc = g.sub(acc, s == 2 ? 1 : 0);
        CHECK(t.label(v).aux == acc);
        // dropping the fiber leaves the bernoulli tree
        CHECK(base.label(v).sym == syms.front());
        CHECK(base.label(v).aux == -1);
    }
}

TEST_CASE("circle extension fibers obey the telescoping identity") {
    auto p = p_half();
    auto sys = SystemDescriptor::make_circle_extension(p, {0.0, 0.25});
    auto x = sample_point(sys, 6, 23);
    auto t = preimage_tree(sys, x, 5, TreeLabel::symbol_and_fiber);
    const TreeIndex& idx = t.index();
    for (std::int64_t v = 1; v < idx.node_count(); ++v) {
        auto syms = idx.symbols_of(v);
        double total = 0.0;
        for (int s : syms) total += s == 2 ? 0.25 : 0.0;
        double expected = *x.fiber_circle - total;
        expected -= std::floor(expected);
        CHECK(std::abs(t.label(v).fiber - expected) <= 1e-15);
    }
    CHECK_THROWS_AS(preimage_tree(sys, x, 3, TreeLabel::symbol), Error);
}

TEST_CASE("p-names list the branch weights") {
    auto bern = SystemDescriptor::make_bernoulli(p_thirds());
    PointSample x;
    x.stream = {2, 1, 2, 2};
    CHECK(p_name(bern, x, 4) == std::vector<double>{2.0 / 3, 1.0 / 3, 2.0 / 3, 2.0 / 3});

    auto markov = SystemDescriptor::make_markov(counterexample_matrix());
    auto y = sample_point(markov, 30, 3);
    auto name = p_name(markov, y, 29);
    for (double v : name)
        CHECK((std::abs(v - 1.0 / 3) <= 1e-12 || std::abs(v - 2.0 / 3) <= 1e-12));
    CHECK_THROWS_AS(p_name(markov, y, 30), Error); // needs one more coordinate

    // extensions share the p-name of their bernoulli base point
    auto ext = SystemDescriptor::make_group_extension(p_334(), FiniteAbelianGroup({4}), {0, 1, 0});
    auto z = sample_point(ext, 12, 9);
    auto ext_name = p_name(ext, z, 12);
    for (int t = 0; t < 12; ++t)
        CHECK(ext_name[t] == doctest::Approx(p_334().component(z.stream[t])).epsilon(1e-14));
}

TEST_CASE("dyadic discretization") {
    CHECK(discretize(0.3, 2) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(discretize(0.0, 5) == doctest::Approx(1.0 / 64.0).epsilon(1e-15));
    CHECK(discretize(0.99, 1) == doctest::Approx(0.75).epsilon(1e-15));
    for (int n = 1; n <= 8; ++n)
        CHECK(std::abs(discretize(0.77, n) - 0.77) < std::ldexp(1.0, -n));
    CHECK_THROWS_AS(discretize(1.0, 3), Error);
    CHECK_THROWS_AS(discretize(-0.1, 3), Error);
}

TEST_CASE("bernoulli genericity is exact for every point and depth") {
    for (const auto& p : {p_thirds(), p_334()}) {
        auto sys = SystemDescriptor::make_bernoulli(p);
        for (int m = 1; m <= 12; ++m) {
            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                auto x = sample_point(sys, 4, seed);
                auto rep = genericity(sys, x, m);
                double sum = 0.0;
                for (int c = 0; c < p.size(); ++c) {
                    CHECK(std::abs(rep.theta[c] - p.component(c + 1)) <= 1e-15);
                    sum += rep.theta[c];
                }
                CHECK(std::abs(sum - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("counterexample genericity deviation at depth 2000") {
    auto sys = SystemDescriptor::make_markov(counterexample_matrix());
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto x = sample_point(sys, 4, seed);
        auto rep = genericity(sys, x, 2000);
        CHECK(rep.deviation <= 0.05);
        double sum = 0.0;
        for (double t : rep.theta) sum += t;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("single-level genericity is the one-step preimage distribution") {
    auto sys = SystemDescriptor::make_markov(counterexample_matrix());
    PointSample x;
    x.stream = {1, 1}; // state 1
    auto rep = genericity(sys, x, 1);
    // preimages of state 1: symbol 1 -> state 2 (w 1/3), symbol 2 -> state 1 (w 2/3)
    CHECK(rep.theta[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
    CHECK(rep.theta[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("estimate profile on the counterexample follows the two-point law") {
    auto sys = SystemDescriptor::make_markov(counterexample_matrix());
    auto prof = estimate_tvwb_profile(sys, {2, 6}, 32, 120, 77);
    // distances are 0 or 1; about half the product pairs sit at 1, so the
    // (1-eps)^2 criterion settles near 1 - sqrt(1/2) = 0.293
    for (double eps : prof.eps_hat) {
        CHECK(eps >= 0.25);
        CHECK(eps <= 0.40);
    }
    auto again = estimate_tvwb_profile(sys, {2, 6}, 32, 120, 77);
    CHECK(again.eps_hat == prof.eps_hat);
    CHECK(again.mean_distance == prof.mean_distance);
}

TEST_CASE("rational circle offsets keep pairs separated") {
    auto sys = SystemDescriptor::make_circle_extension(p_half(), {0.0, 0.25});
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto x = sample_point(sys, 10, 400 + seed);
        PointSample y = x;
        y.fiber_circle = *x.fiber_circle + 0.125 - std::floor(*x.fiber_circle + 0.125);
        for (int n : {2, 5, 8}) {
            auto ta = preimage_tree(sys, x, n, TreeLabel::symbol_and_fiber);
            auto tb = preimage_tree(sys, y, n, TreeLabel::symbol_and_fiber);
            CHECK(tbar_exact(ta, tb).value >= 1.0 / 16 - 1e-12);
        }
    }
}

TEST_CASE("irrational circle rotations let distances decay") {
    double golden = 0.5 * (std::sqrt(5.0) - 1.0); // frac(golden ratio)
    auto sys = SystemDescriptor::make_circle_extension(p_half(), {0.0, golden});
    auto prof = estimate_tvwb_profile(sys, {2, 10}, 24, 60, 2718);
    CHECK(prof.eps_hat[1] < prof.eps_hat[0]);
}
