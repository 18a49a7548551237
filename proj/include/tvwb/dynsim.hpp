#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvwb/markov.hpp"
#include "tvwb/tbar.hpp"
#include "tvwb/tree.hpp"

namespace tvwb {

enum class SystemKind { bernoulli, markov, finite_group_extension, circle_extension };

std::string kind_name(SystemKind k);

// One of the example endomorphisms: a one-sided Bernoulli shift, a one-sided
// Markov shift, a finite-abelian-group extension with a memory-1 cocycle, or
// a circle extension rotating by alpha_j on branch j.
struct SystemDescriptor {
    SystemKind kind;
    ProbVector p;
    std::optional<StochasticMatrix> matrix;
    std::optional<FiniteAbelianGroup> group;
    std::vector<int> cocycle;      // group element per symbol
    std::vector<double> alphas;    // circle point per symbol

    static SystemDescriptor make_bernoulli(ProbVector p);
    static SystemDescriptor make_markov(StochasticMatrix m);
    static SystemDescriptor make_group_extension(ProbVector p, FiniteAbelianGroup g,
                                                 std::vector<int> cocycle);
    static SystemDescriptor make_circle_extension(ProbVector p, std::vector<double> alphas);

    PreimageGraph graph() const; // finite-state kinds only
};

// Finitely many simulated coordinates of one point. For the right-infinite
// kinds the stream lists x_0..x_{L-1}; for the left-infinite Markov shift it
// lists x_{-L}..x_{-1} (so the current state is the last entry).
struct PointSample {
    std::vector<int> stream;
    std::optional<int> fiber_group;
    std::optional<double> fiber_circle;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seed_trace;
};

PointSample sample_point(const SystemDescriptor& d, int length, std::uint64_t seed);

enum class TreeLabel { symbol, symbol_and_fiber };

// The tree of partial inverses of x under the canonical tree partition:
// Bernoulli nodes carry their leading symbol, Markov nodes the state reached
// in the preimage graph, extension nodes the pair (leading symbol, fiber).
TreeName preimage_tree(const SystemDescriptor& d, const PointSample& x, int height,
                       TreeLabel label);

// (p_X(x), p_X(Tx), ...): the conditional probability of each point among the
// preimages of its image.
std::vector<double> p_name(const SystemDescriptor& d, const PointSample& x, int length);

// Midpoint of the dyadic interval of width 2^-N containing x.
double discretize(double x, int N);

struct GenericityReport {
    int start_state = 0;                 // 0-based graph state
    std::vector<double> theta;           // weight-averaged cell distribution
    std::vector<double> reference;       // dist(P) under the stationary law
    double deviation = 0.0;              // total variation (l1)
};

// theta_{x,M,P} by exact weight propagation on the preimage graph; the
// partition maps graph states to cells (empty = identity partition).
GenericityReport genericity(const SystemDescriptor& d, const PointSample& x, int levels,
                            const std::vector<int>& cell_of_state = {});

struct TvwbProfile {
    std::vector<int> heights;
    std::vector<double> eps_hat;          // per height
    std::vector<double> mean_distance;    // per height
    int samples = 0;
    int pairs = 0;
};

// Samples points, draws product-measure point pairs, and reports per height
// the least eps on a 0.01 grid such that the fraction of pairs with
// tbar < eps is at least (1-eps)^2.
TvwbProfile estimate_tvwb_profile(const SystemDescriptor& d, const std::vector<int>& heights,
                                  int samples, int pairs, std::uint64_t seed);

} // namespace tvwb
