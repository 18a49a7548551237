#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "tvwb/birkhoff.hpp"
#include "tvwb/rng.hpp"

using namespace tvwb;
using namespace testutil;

namespace {

// random doubly stochastic matrix: average of k random permutation matrices
std::vector<double> random_doubly_stochastic(int n, int k, Rng& rng) {
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (int t = 0; t < k; ++t) {
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.next_below(i + 1)]);
        for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + perm[i]] += 1.0 / k;
    }
    return m;
}

} // namespace

TEST_CASE("identity matrix decomposes into a single term") {
    std::vector<double> id{1, 0, 0, 0, 1, 0, 0, 0, 1};
    auto d = birkhoff_decompose(id, 3);
    REQUIRE(d.terms.size() == 1);
    CHECK(d.terms[0].coefficient == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.terms[0].perm == std::vector<int>{0, 1, 2});
}

TEST_CASE("permutation matrices return exactly themselves") {
    std::vector<double> swap{0, 1, 1, 0};
    auto d = birkhoff_decompose(swap, 2);
    REQUIRE(d.terms.size() == 1);
    CHECK(d.terms[0].perm == std::vector<int>{1, 0});
}

TEST_CASE("the half/half matrix splits into identity and swap") {
    std::vector<double> m{0.5, 0.5, 0.5, 0.5};
    auto d = birkhoff_decompose(m, 2);
    REQUIRE(d.terms.size() == 2);
    for (const auto& t : d.terms) CHECK(t.coefficient == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(reconstruction_residual(d, m) <= 1e-12);
}

TEST_CASE("random doubly stochastic matrices reconstruct within bounds") {
    Rng rng(90210);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + static_cast<int>(rng.next_below(5)); // up to 6
        int k = 1 + static_cast<int>(rng.next_below(12));
        auto m = random_doubly_stochastic(n, k, rng);
        auto d = birkhoff_decompose(m, n);
        CHECK(reconstruction_residual(d, m) <= 1e-10);
        CHECK(d.terms.size() <= static_cast<std::size_t>((n - 1) * (n - 1) + 1));
        double sum = 0.0;
        for (const auto& t : d.terms) {
            CHECK(t.coefficient > 0.0);
            sum += t.coefficient;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("constant-sum matrices beyond alpha = 1 decompose too") {
    std::vector<double> m{3, 1, 1, 3}; // row and column sums 4
    auto d = birkhoff_decompose(m, 2);
    CHECK(d.alpha == doctest::Approx(4.0));
    CHECK(reconstruction_residual(d, m) <= 1e-10);
    double sum = 0.0;
    for (const auto& t : d.terms) sum += t.coefficient;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("non-constant sums are rejected") {
    std::vector<double> bad{0.9, 0.1, 0.5, 0.5};
    CHECK_THROWS_AS(birkhoff_decompose(bad, 2), Error);
}

TEST_CASE("block decompose: diagonal blocks give a point mass on the identity") {
    auto p = ProbVector::from_fractions({Rational(1, 4), Rational(1, 4), Rational(1, 2)});
    std::vector<double> entries{0.25, 0, 0, 0, 0.25, 0, 0, 0, 0.5};
    auto terms = block_decompose(BlockCoupling{p, entries});
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].probability == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(terms[0].images == std::vector<std::uint8_t>{1, 2, 3});
}

TEST_CASE("block decompose: the half/half block splits evenly") {
    auto p = ProbVector::from_fractions({Rational(1, 4), Rational(1, 4), Rational(1, 2)});
    std::vector<double> entries{0.125, 0.125, 0, 0.125, 0.125, 0, 0, 0, 0.5};
    auto terms = block_decompose(BlockCoupling{p, entries});
    REQUIRE(terms.size() == 2);
    for (const auto& t : terms) {
        CHECK(t.probability == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(t.images[2] == 3); // the singleton class stays put
    }
}

TEST_CASE("block decompose rejects cross-class mass") {
    auto p = ProbVector::from_fractions({Rational(1, 4), Rational(1, 4), Rational(1, 2)});
    std::vector<double> entries{0.25, 0, 0, 0, 0.05, 0.2, 0, 0.2, 0.3};
    CHECK_THROWS_AS(block_decompose(BlockCoupling{p, entries}), Error);
}

namespace {

// random valid coupling: mix random class-preserving permutations
BlockCoupling random_coupling(const ProbVector& p, Rng& rng) {
    auto perms = class_preserving_perms(p);
    int s = p.size();
    std::vector<double> entries(static_cast<std::size_t>(s) * s, 0.0);
    int k = 1 + static_cast<int>(rng.next_below(6));
    std::vector<double> mix(k);
    double total = 0.0;
    for (double& w : mix) { w = 0.1 + rng.next_double(); total += w; }
    for (int t = 0; t < k; ++t) {
        const auto& perm = perms[rng.next_below(perms.size())];
        for (int b = 1; b <= s; ++b)
            entries[static_cast<std::size_t>(b - 1) * s + (perm[b - 1] - 1)] +=
                (mix[t] / total) * p.component(b);
    }
    return BlockCoupling{p, entries};
}

} // namespace

TEST_CASE("block decompose pushforward reconstructs the coupling") {
    Rng rng(5150);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = trial % 2 == 0 ? p_334() : p_half();
        auto c = random_coupling(p, rng);
        auto terms = block_decompose(c);
        int s = p.size();
        std::vector<double> acc(static_cast<std::size_t>(s) * s, 0.0);
        double mass = 0.0;
        for (const auto& t : terms) {
            mass += t.probability;
            for (int b = 1; b <= s; ++b)
                acc[static_cast<std::size_t>(b - 1) * s + (t.images[b - 1] - 1)] +=
                    t.probability * p.component(b);
        }
        CHECK(std::abs(mass - 1.0) <= 1e-12);
        for (std::size_t i = 0; i < acc.size(); ++i)
            CHECK(std::abs(acc[i] - c.entries[i]) <= 1e-10);
        // no term moves a symbol across classes (set_perm would reject, but
        // audit the images directly)
        for (const auto& t : terms)
            for (int b = 1; b <= s; ++b)
                CHECK(p.class_of(t.images[b - 1]) == p.class_of(b));
    }
}

namespace {

BlockCoupling diagonal_coupling(const ProbVector& p) {
    int s = p.size();
    std::vector<double> entries(static_cast<std::size_t>(s) * s, 0.0);
    for (int b = 1; b <= s; ++b)
        entries[static_cast<std::size_t>(b - 1) * s + (b - 1)] = p.component(b);
    return BlockCoupling{p, entries};
}

BlockCoupling uniform_class_coupling(const ProbVector& p) {
    int s = p.size();
    std::vector<double> entries(static_cast<std::size_t>(s) * s, 0.0);
    for (int b = 1; b <= s; ++b)
        for (int c = 1; c <= s; ++c)
            if (p.class_of(b) == p.class_of(c))
                entries[static_cast<std::size_t>(b - 1) * s + (c - 1)] =
                    p.component(b) / p.class_symbols(p.class_of(b)).size();
    return BlockCoupling{p, entries};
}

} // namespace

TEST_CASE("automorphism measure: diagonal couplings give the identity point mass") {
    auto p = p_334();
    NodeCouplings couplings;
    TreeIndex idx(p.size(), 2);
    for (std::int64_t v = 0; v < idx.internal_count(); ++v)
        for (std::int64_t u = idx.level_begin(idx.depth_of(v));
             u < idx.level_begin(idx.depth_of(v)) + idx.level_size(idx.depth_of(v)); ++u)
            couplings.insert_or_assign(NodePairKey{v, u}, diagonal_coupling(p));
    auto measure = automorphism_measure(p, 2, couplings);
    REQUIRE(measure.support.size() == 1);
    CHECK(measure.support[0].first.is_identity());
    CHECK(measure.support[0].second == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("automorphism measure at height 1 equals the block decomposition") {
    auto p = p_half();
    NodeCouplings couplings;
    couplings.insert_or_assign(NodePairKey{0, 0}, uniform_class_coupling(p));
    auto measure = automorphism_measure(p, 1, couplings);
    auto terms = block_decompose(uniform_class_coupling(p));
    REQUIRE(measure.support.size() == terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        CHECK(measure.support[i].second == doctest::Approx(terms[i].probability).epsilon(1e-14));
        for (int b = 1; b <= p.size(); ++b)
            CHECK(measure.support[i].first.perm(0, b) == terms[i].images[b - 1]);
    }
}

TEST_CASE("uniform couplings at height 2 give the uniform measure on all 8") {
    auto p = p_half();
    NodeCouplings couplings;
    TreeIndex idx(2, 2);
    couplings.insert_or_assign(NodePairKey{0, 0}, uniform_class_coupling(p));
    for (std::int64_t v = 1; v <= 2; ++v)
        for (std::int64_t u = 1; u <= 2; ++u)
            couplings.insert_or_assign(NodePairKey{v, u}, uniform_class_coupling(p));
    auto measure = automorphism_measure(p, 2, couplings);
    REQUIRE(measure.support.size() == 8);
    for (const auto& [a, mass] : measure.support)
        CHECK(mass == doctest::Approx(0.125).epsilon(1e-14));

    // matches the exhaustive group
    auto autos = enumerate_automorphisms(p, 2);
    for (const auto& [a, mass] : measure.support) {
        bool found = false;
        for (const auto& b : autos) found = found || a == b;
        CHECK(found);
    }
}

TEST_CASE("automorphism measure reproduces the induced pair mass") {
    Rng rng(31337);
    for (int trial = 0; trial < 12; ++trial) {
        auto p = trial % 2 == 0 ? p_half() : p_334();
        int height = 2;
        TreeIndex idx(p.size(), height);
        NodeCouplings couplings;
        // supply a random coupling for every equal-depth pair of internal nodes
        for (std::int64_t v = 0; v < idx.internal_count(); ++v) {
            int dv = idx.depth_of(v);
            for (std::int64_t u = idx.level_begin(dv);
                 u < idx.level_begin(dv) + idx.level_size(dv); ++u)
                couplings.insert_or_assign(NodePairKey{v, u}, random_coupling(p, rng));
        }
        auto measure = automorphism_measure(p, height, couplings);
        auto expected = induced_pair_mass(p, height, couplings);

        double total = 0.0;
        for (const auto& [a, mass] : measure.support) total += mass;
        CHECK(std::abs(total - 1.0) <= 1e-12);

        // Sum_A m(A) A(v,u) against the recursive path mass
        std::map<NodePairKey, double> seen;
        for (const auto& [a, mass] : measure.support) {
            auto img = a.node_images();
            for (std::int64_t v = 1; v < idx.node_count(); ++v)
                seen[{v, img[v]}] += mass * weight(p, idx, v);
        }
        for (const auto& [key, value] : expected) {
            if (key.first == 0) continue;
            double got = seen.count(key) ? seen[key] : 0.0;
            CHECK(std::abs(got - value) <= 1e-10);
        }
        for (const auto& [key, value] : seen)
            if (!expected.count(key)) CHECK(value <= 1e-10);
    }
}

TEST_CASE("missing couplings for reachable pairs are reported") {
    auto p = p_half();
    NodeCouplings couplings;
    couplings.insert_or_assign(NodePairKey{0, 0}, uniform_class_coupling(p));
    // depth-1 couplings absent although both pairs are reachable
    CHECK_THROWS_AS(automorphism_measure(p, 2, couplings), Error);
}
