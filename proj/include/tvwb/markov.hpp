#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tvwb/bigint.hpp"
#include "tvwb/prob_vector.hpp"

namespace tvwb {

// Row-stochastic square matrix; entries kept exact when the source document
// carried fractions.
struct StochasticMatrix {
    int n = 0;
    std::vector<double> a;       // row-major
    std::vector<Rational> exact; // empty unless every entry was exact

    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
    bool has_exact() const { return !exact.empty(); }
    const Rational& exact_at(int i, int j) const {
        return exact[static_cast<std::size_t>(i) * n + j];
    }

    static StochasticMatrix from_fractions(const std::vector<std::vector<Rational>>& rows);
    static StochasticMatrix from_reals(const std::vector<std::vector<double>>& rows);
};

bool irreducible(const StochasticMatrix& m);
// some power strictly positive; powers checked up to the Wielandt bound (n-1)^2+1
bool primitive(const StochasticMatrix& m);

// Left fixed probability vector q with qA = q, q > 0, sum q = 1.
// Rejects reducible matrices.
std::vector<double> stationary(const StochasticMatrix& m);

struct EndPRejection {
    int row = 0; // 1-based offending row; 0 when the failure is global
    std::string reason;
};

struct EndPResult {
    std::optional<ProbVector> p;
    std::optional<EndPRejection> rejection;
    bool ok() const { return p.has_value(); }
};

// The matrix describes a p-endomorphism iff every row's nonzero entries form
// the same multiset; the common multiset, sorted ascending, is p.
EndPResult end_p_check(const StochasticMatrix& m);

// Finite-state weighted digraph whose out-edge weights at every state realize
// p: one out-edge per branch symbol, edge weight = the symbol's p-component.
struct PreimageGraph {
    ProbVector p;
    int n_states = 0;
    std::vector<std::vector<int>> target;   // [state][symbol-1] -> state, 0-based
    std::vector<std::string> state_names;   // for reporting

    PreimageGraph(ProbVector pv, int states)
        : p(std::move(pv)), n_states(states),
          target(states, std::vector<int>(p.size(), 0)), state_names(states) {}
};

// Branch symbols of each weight class are assigned to the targets carrying
// that weight in ascending state order (the canonical tree partition).
PreimageGraph preimage_graph_from_markov(const StochasticMatrix& m);

// Equal-rows special case: symbol j targets state j from every state.
PreimageGraph bernoulli_graph(const ProbVector& p);

// Z/n1 x ... x Z/nk with elements addressed by flat index.
struct FiniteAbelianGroup {
    std::vector<int> orders;

    explicit FiniteAbelianGroup(std::vector<int> ord);
    int order() const { return order_; }
    int add(int a, int b) const;
    int sub(int a, int b) const;
    std::string name(int g) const;

private:
    int order_ = 1;
};

// Memory-1 cocycle (one group element per branch symbol). States are
// (symbol, group element) pairs; the preimage edge from (i,g) via branch j
// targets (j, g - phi_j).
PreimageGraph preimage_graph_from_extension(const ProbVector& p, const FiniteAbelianGroup& g,
                                            const std::vector<int>& cocycle);

// nullopt when p is not uniform (the criterion is inapplicable);
// otherwise primitivity of the matrix.
std::optional<bool> sufficient_mixing_uniform(const StochasticMatrix& m);

// every pair of rows has a column holding two equal nonzero entries
bool sufficient_shared_entries(const StochasticMatrix& m);

struct TvwbWitness {
    std::vector<int> symbols;      // canonical branch symbols, one per step
    std::vector<double> weights;   // matching p-components
    // per start state: the (symbol, next state) steps it takes; all paths see
    // the witness weight sequence and end at common_endpoint
    std::vector<std::vector<std::pair<int, int>>> paths;
    int common_endpoint = 0;
};

struct TvwbVerdict {
    bool decision = false;
    int depth = 0;           // subset-BFS depth actually used
    BigUint length_bound;     // N^(3N), N = number of states
    std::optional<TvwbWitness> witness;
    std::vector<std::vector<int>> certificate; // reachable endpoint sets, 0-based states
};

// Breadth-first search over endpoint sets: from set S and each weight value,
// successors are all sets obtained by choosing one same-weight out-edge per
// state of S. Decision = a singleton set is reachable from the full set.
TvwbVerdict decide_tvwb(const PreimageGraph& g);

// N^(3N)
BigUint sync_bound(int n_states);

} // namespace tvwb
