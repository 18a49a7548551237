#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "tvwb/prob_vector.hpp"
#include "tvwb/tree.hpp"

namespace tvwb {

struct BirkhoffTerm {
    double coefficient = 0.0;    // positive, sums to 1 across terms
    std::vector<int> perm;       // row -> column, 0-based
};

struct BirkhoffDecomposition {
    int n = 0;
    double alpha = 0.0;          // common row/column sum of the input
    std::vector<BirkhoffTerm> terms;
};

// Peels permutation matrices off a nonnegative matrix with constant row and
// column sums: at each step a bottleneck perfect matching on the positive
// support, subtracting its minimum entry. A Caratheodory reduction afterwards
// keeps the term count within (n-1)^2 + 1.
BirkhoffDecomposition birkhoff_decompose(const std::vector<double>& m, int n);

// sum of coefficient * alpha * P over terms, compared entrywise to m
double reconstruction_residual(const BirkhoffDecomposition& d, const std::vector<double>& m);

// s x s coupling matrix that vanishes off the weight-class diagonal blocks;
// inside the class of weight w every row and column sums to w.
struct BlockCoupling {
    ProbVector p;
    std::vector<double> entries; // s x s row-major
};

struct PermTerm {
    double probability = 0.0;
    std::vector<std::uint8_t> images; // symbol -> symbol, 1-based
};

// Birkhoff decomposition block by block, combined into the product measure on
// class-preserving permutations of {1..s}.
std::vector<PermTerm> block_decompose(const BlockCoupling& c);

struct AutomorphismMeasure {
    std::vector<std::pair<TreeAutomorphism, double>> support;
};

using NodePairKey = std::pair<std::int64_t, std::int64_t>;
using NodeCouplings = std::map<NodePairKey, BlockCoupling>;

// Product-form measure on A_N: each matched node pair of depth < N draws its
// child permutation independently from the block decomposition of its
// coupling. The full support is materialized (capped), never sampled.
AutomorphismMeasure automorphism_measure(const ProbVector& p, int height,
                                         const NodeCouplings& couplings);

// Path mass induced by the couplings: mass(root,root) = 1 and
// mass(bv, cu) = mass(v,u) * coupling(v,u)(b,c). Keys are node-id pairs.
std::map<NodePairKey, double> induced_pair_mass(const ProbVector& p, int height,
                                                const NodeCouplings& couplings);

} // namespace tvwb
