#pragma once

#include <cstdint>
#include <vector>

#include "tvwb/markov.hpp"
#include "tvwb/tree.hpp"

namespace tvwb {

struct TbarResult {
    double value = 0.0;
    TreeAutomorphism witness;
    int height = 0;
};

// (1/N) min over A in A_N of sum d(t1(v), t2(Av)) w_v, by bottom-up dynamic
// programming with exact per-class assignments. Equal subtrees are interned so
// repeated structure collapses into one memo entry.
TbarResult tbar_exact(const TreeName& t1, const TreeName& t2);

// Exhaustive minimum over the enumerated automorphism group; oracle for
// tbar_exact on instances where enumeration is feasible.
TbarResult tbar_bruteforce(const TreeName& t1, const TreeName& t2);

// Matching cost of one specific automorphism (audits witnesses).
double tbar_cost(const TreeName& t1, const TreeName& t2, const TreeAutomorphism& a);

struct StateDistanceTable {
    int n_states = 0;
    std::vector<std::string> state_names;
    std::vector<int> heights;
    std::vector<std::vector<double>> matrices; // n x n row-major, one per height
};

// Distances between the state tree names of a preimage graph. The subtree of
// a state name below any node depends only on the state there, so the DP is
// keyed on (state, state, remaining height) and stays polynomial in height.
StateDistanceTable tbar_states(const PreimageGraph& g, const std::vector<int>& heights);

struct SystemDescriptor;

struct McSummary {
    int pairs = 0;
    std::vector<double> values; // per-pair distances in draw order
    double mean = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0;
};

// Mean and quantiles of tbar_exact over independently drawn point pairs
// (product measure); deterministic for a fixed seed.
McSummary process_tbar_mc(const SystemDescriptor& sys_a, const SystemDescriptor& sys_b,
                          int height, int pairs, std::uint64_t seed);

} // namespace tvwb
