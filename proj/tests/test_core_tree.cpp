#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "tvwb/rng.hpp"
#include "tvwb/tree.hpp"

using namespace tvwb;
using namespace testutil;

TEST_CASE("entropy of standard vectors") {
    CHECK(entropy(p_half()) == doctest::Approx(1.0).epsilon(1e-14));
    auto quarter = ProbVector::from_fractions(
        {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)});
    CHECK(entropy(quarter) == doctest::Approx(2.0).epsilon(1e-14));

    // independent evaluation of -sum p log2 p in extended precision
    long double a = 1.0L / 3.0L, b = 2.0L / 3.0L;
    long double expected = -(a * std::log2(a) + b * std::log2(b));
    CHECK(std::abs(entropy(p_thirds()) - static_cast<double>(expected)) < 1e-14);
    CHECK(entropy(p_thirds()) == doctest::Approx(0.9182958340544896).epsilon(1e-12));
}

TEST_CASE("probability vector validation") {
    CHECK_THROWS_AS(ProbVector::from_reals({0.5, 0.5, 0.0}), Error);   // zero component
    CHECK_THROWS_AS(ProbVector::from_reals({0.5, 0.4}), Error);        // bad sum
    CHECK_THROWS_AS(ProbVector::from_fractions({Rational(1, 1)}), Error); // s < 2

    auto p = p_334();
    CHECK(p.class_count() == 2);
    CHECK(p.class_of(1) == p.class_of(2));
    CHECK(p.class_of(3) != p.class_of(1));
}

TEST_CASE("node weights") {
    auto p = p_thirds();
    CHECK(weight(p, {}) == 1.0);
    CHECK(weight(p, {2, 1}) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
    auto p3 = ProbVector::from_fractions({Rational(1, 2), Rational(1, 4), Rational(1, 4)});
    CHECK(weight(p3, {3, 3}) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    CHECK_THROWS_AS(weight(p, {3}), Error); // out-of-range symbol
}

TEST_CASE("level weights sum to one") {
    for (const auto& p : {p_thirds(), p_334(), p_half()}) {
        TreeIndex idx(p.size(), 4);
        for (int k = 1; k <= 4; ++k) {
            double sum = 0.0;
            for (std::int64_t v = idx.level_begin(k); v < idx.level_begin(k) + idx.level_size(k); ++v)
                sum += weight(p, idx, v);
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("node indexing round trips") {
    TreeIndex idx(3, 4);
    for (std::int64_t v = 0; v < idx.node_count(); ++v) {
        auto syms = idx.symbols_of(v);
        CHECK(idx.id_of(syms) == v);
        if (v > 0) {
            // sigma drops the leftmost symbol
            auto tail = std::vector<int>(syms.begin() + 1, syms.end());
            CHECK(idx.sigma(v) == idx.id_of(tail));
            CHECK(idx.leading_symbol(v) == syms.front());
        }
    }
    // children prepend on the left
    CHECK(idx.child(idx.id_of({1, 2}), 3) == idx.id_of({3, 1, 2}));
}

TEST_CASE("automorphism counts") {
    CHECK(enumerate_automorphisms(p_thirds(), 3).size() == 1); // distinct components
    CHECK(enumerate_automorphisms(p_half(), 1).size() == 2);
    CHECK(enumerate_automorphisms(p_half(), 2).size() == 8);
}

// independent oracle: filter all bijections of the height-2 binary tree nodes
// for sigma-commutation and weight preservation
TEST_CASE("automorphism enumeration matches brute filtering") {
    auto p = p_half();
    TreeIndex idx(2, 2);
    std::vector<std::int64_t> ids; // nonempty nodes
    for (std::int64_t v = 1; v < idx.node_count(); ++v) ids.push_back(v);

    std::vector<std::vector<std::int64_t>> valid;
    std::vector<std::int64_t> perm = ids;
    std::sort(perm.begin(), perm.end());
    do {
        // build the full node map (root fixed)
        std::vector<std::int64_t> img(idx.node_count());
        img[0] = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) img[ids[i]] = perm[i];
        bool ok = true;
        for (std::int64_t v = 1; v < idx.node_count() && ok; ++v) {
            if (idx.depth_of(img[v]) != idx.depth_of(v)) ok = false;
            else if (std::abs(weight(p, idx, v) - weight(p, idx, img[v])) > 1e-12) ok = false;
            else if (img[idx.sigma(v)] != idx.sigma(img[v])) ok = false;
        }
        if (ok) valid.push_back(img);
    } while (std::next_permutation(perm.begin(), perm.end()));

    auto enumerated = enumerate_automorphisms(p, 2);
    REQUIRE(valid.size() == enumerated.size());

    std::set<std::vector<std::int64_t>> brute(valid.begin(), valid.end());
    for (const auto& a : enumerated)
        CHECK(brute.count(a.node_images()) == 1);
}

TEST_CASE("enumeration cap raises an explicit error") {
    auto uniform3 = ProbVector::from_fractions({Rational(1, 3), Rational(1, 3), Rational(1, 3)});
    CHECK_THROWS_AS(enumerate_automorphisms(uniform3, 9), Error); // 6^(3^9..) >> cap
}

TEST_CASE("work caps honor environment overrides") {
    setenv("TVWB_CAP_AUTOMORPHISMS", "5", 1);
    CHECK_THROWS_AS(enumerate_automorphisms(p_half(), 2), Error); // group order 8 > 5
    unsetenv("TVWB_CAP_AUTOMORPHISMS");
    CHECK(enumerate_automorphisms(p_half(), 2).size() == 8);
}

TEST_CASE("automorphisms preserve weights and commute with sigma") {
    for (const auto& p : {p_half(), p_334()}) {
        for (const auto& a : enumerate_automorphisms(p, 2)) {
            auto img = a.node_images();
            const TreeIndex& idx = a.index();
            for (std::int64_t v = 1; v < idx.node_count(); ++v) {
                CHECK(weight(p, idx, v) == weight(p, idx, img[v])); // same factor multiset
                CHECK(img[idx.sigma(v)] == idx.sigma(img[v]));
            }
        }
    }
}

TEST_CASE("enumerated groups are closed under composition and inverse") {
    for (const auto& p : {p_half(), p_334()}) {
        auto autos = enumerate_automorphisms(p, 2);
        REQUIRE(autos.size() <= 100);
        std::set<std::vector<std::int64_t>> all;
        for (const auto& a : autos) all.insert(a.node_images());
        for (const auto& a : autos) {
            CHECK(all.count(a.inverse().node_images()) == 1);
            for (const auto& b : autos)
                CHECK(all.count(a.after(b).node_images()) == 1);
        }
    }
}

TEST_CASE("apply_automorphism basics") {
    auto p = p_half();
    auto t = random_tree_name(p, 3, 4, 99);

    TreeAutomorphism id(p, 3);
    auto same = apply_automorphism(id, t);
    for (std::int64_t v = 1; v < t.index().node_count(); ++v)
        CHECK(same.label(v) == t.label(v));

    // a then a^-1 restores the name
    auto autos = enumerate_automorphisms(p, 3);
    const auto& a = autos[autos.size() / 2];
    auto round = apply_automorphism(a.inverse(), apply_automorphism(a, t));
    for (std::int64_t v = 1; v < t.index().node_count(); ++v)
        CHECK(round.label(v) == t.label(v));

    // root swap at height 1 moves the two labels
    TreeName one(p, 1, LabelKind::discrete);
    one.label(1).sym = 7;
    one.label(2).sym = 9;
    TreeAutomorphism swap(p, 1);
    swap.set_perm(0, {2, 1});
    auto swapped = apply_automorphism(swap, one);
    CHECK(swapped.label(1).sym == 9);
    CHECK(swapped.label(2).sym == 7);
}

TEST_CASE("composition acts like sequential application") {
    auto p = p_334();
    auto autos = enumerate_automorphisms(p, 2);
    auto t = random_tree_name(p, 2, 3, 5);
    const auto& a = autos[1];
    const auto& b = autos[autos.size() - 1];
    auto lhs = apply_automorphism(a, apply_automorphism(b, t));
    auto rhs = apply_automorphism(b.after(a), t);
    // t(a(b(v))) composes with the inner map applied first to node ids
    for (std::int64_t v = 1; v < t.index().node_count(); ++v)
        CHECK(lhs.label(v) == rhs.label(v));
}

TEST_CASE("random tree names are deterministic per seed") {
    auto p = p_half();
    auto a = random_tree_name(p, 3, 4, 42);
    auto b = random_tree_name(p, 3, 4, 42);
    for (std::int64_t v = 1; v < a.index().node_count(); ++v)
        CHECK(a.label(v) == b.label(v));

    int differing = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto c = random_tree_name(p, 3, 4, 1000 + seed);
        auto d = random_tree_name(p, 3, 4, 2000 + seed);
        for (std::int64_t v = 1; v < c.index().node_count(); ++v)
            if (!(c.label(v) == d.label(v))) { ++differing; break; }
    }
    CHECK(differing == 8);

    auto solo = random_tree_name(p, 3, 1, 7);
    for (std::int64_t v = 1; v < solo.index().node_count(); ++v)
        CHECK(solo.label(v).sym == 1);
}
